# %% [markdown]
# # Revivals that ignore the chain length, and the critical angle
#
# The compass-point echo oscillates with a period that stays the same as the
# chain grows. Then we find where the gap closes, at `cos(theta_c) = h / sqrt(J_o J_e)`.

# %%
import numpy as np

from compass_echo import CompassParams, CouplingSpec, decoherence_factor
from compass_echo.analysis import revival_period
from compass_echo.model import critical_theta, spectral_gap

t = np.arange(0, 40.0001, 0.02)
for N in (100, 200, 400):
    s = decoherence_factor(CompassParams(1.0, 4.0, np.pi / 2, 0.0, N), CouplingSpec(0.1), t)
    print(f"N = {N}: revival period = {revival_period(s):.4f}")

# %% [markdown]
# The gap at the critical angle shrinks as `1/N`. Away from it the gap stays finite.

# %%
th = critical_theta(1.0, 4.0, 0.5)
print(f"theta_c = {th / np.pi:.4f} pi")
for N in (100, 200, 400, 800):
    print(f"N = {N}: gap at theta_c = {spectral_gap(CompassParams(1.0, 4.0, th, 0.5, N)):.2e}, "
          f"at theta_c + 0.3 = {spectral_gap(CompassParams(1.0, 4.0, th + 0.3, 0.5, N)):.3f}")

# %% [markdown]
# Crossing the critical angle strongly changes how fast the echo decays.

# %%
tt = np.arange(0, 10.0001, 0.05)
for d in (-0.3, -0.1, 0.0, 0.1, 0.3):
    s = decoherence_factor(CompassParams(1.0, 4.0, th + d, 0.5, 400), CouplingSpec(0.1), tt)
    print(f"theta_c {d:+.1f}: |F14|(t=10) = {s.values[-1]:.4f}, min = {s.values.min():.4f}")
