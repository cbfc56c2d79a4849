"""Environment model: the 1D general quantum compass chain in a transverse field.

The chain has N = 2N' spins. Odd bonds (2i-1, 2i) couple the pseudo-spin
components along +theta/2, even bonds (2i, 2i+1) along -theta/2, so theta is
the opening angle between the two pseudo-spin axes::

    sigma~(+-) = cos(theta/2) sigma^x +- sin(theta/2) sigma^y

    H_E = sum_i [ J_o sigma~(+)_{2i-1} sigma~(+)_{2i}
                + J_e sigma~(-)_{2i} sigma~(-)_{2i+1}
                + h (sigma^z_{2i-1} + sigma^z_{2i}) ]

With this convention theta = pi/2 is the quantum compass point and the
quasiparticle gap closes at cos(theta_c) = h / sqrt(J_o J_e).

After a Jordan-Wigner transformation (spin up = occupied) the chain is the
quadratic fermion Hamiltonian ``H = 1/2 Psi^dag M Psi + constant`` with
``Psi = (c_1..c_N, c_1^dag..c_N^dag)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

__all__ = [
    "Boundary",
    "CompassParams",
    "DispersionPoint",
    "BdGMatrix",
    "antiperiodic_momenta",
    "dispersion",
    "dispersion_grid",
    "momentum_block",
    "build_bdg",
    "spectral_gap",
    "gap_parameter",
    "critical_theta",
]

_CLAMP_TOL = 1e-12


class Boundary(str, enum.Enum):
    """Boundary condition of the environment chain.

    ``PERIODIC`` is the even fermion-parity sector of the closed chain: the
    wrap-around bond carries the antiperiodic sign.
    """

    OPEN = "open"
    PERIODIC = "periodic"


@dataclass(frozen=True)
class CompassParams:
    J_o: float
    J_e: float
    theta: float
    h: float = 0.0
    N: int = 400
    boundary: Boundary = Boundary.PERIODIC

    def __post_init__(self):
        object.__setattr__(self, "boundary", Boundary(self.boundary))
        for name in ("J_o", "J_e", "theta", "h"):
            value = getattr(self, name)
            if not np.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, float(value))
        if isinstance(self.N, bool) or int(self.N) != self.N:
            raise ValueError(f"N must be an integer, got {self.N!r}")
        object.__setattr__(self, "N", int(self.N))
        if self.N < 4 or self.N % 2:
            raise ValueError(f"N must be even and >= 4, got {self.N}")
        if self.J_o <= 0 or self.J_e <= 0:
            raise ValueError("J_o and J_e must be positive")
        if not (-_CLAMP_TOL <= self.theta <= math.pi + _CLAMP_TOL):
            raise ValueError(f"theta must lie in [0, pi], got {self.theta}")

    @property
    def n_cells(self) -> int:
        return self.N // 2

    def replace(self, **changes) -> "CompassParams":
        return replace(self, **changes)


@dataclass(frozen=True)
class DispersionPoint:
    """Quasiparticle energies at one momentum of the two-site unit cell.

    ``L`` is the hopping amplitude and ``J``/``J_minus`` the pairing amplitudes
    at k and -k (both in units of the bare couplings).
    """

    k: float
    L: complex
    J: complex
    J_minus: complex
    a: float
    b: float
    E_q: float
    E_p: float


@dataclass(frozen=True)
class BdGMatrix:
    """Single-particle Nambu matrix ``M`` of ``H = 1/2 Psi^dag M Psi + constant``."""

    matrix: np.ndarray
    field_shift: float
    constant: float = 0.0
    params: CompassParams | None = field(default=None, compare=False)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] % 2:
            raise ValueError(f"BdG matrix must be square with even size, got {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_modes(self) -> int:
        return self.matrix.shape[0] // 2

    def blocks(self):
        """Return the (particle-particle, pairing, hole-pairing, hole-hole) blocks."""
        n = self.n_modes
        m = self.matrix
        return m[:n, :n], m[:n, n:], m[n:, :n], m[n:, n:]

    def symmetry_errors(self) -> dict:
        """Relative violations of hermiticity and particle-hole symmetry."""
        A, B, Bd, D = self.blocks()
        scale = max(1.0, float(np.abs(self.matrix).max()))
        return {
            "hermitian": float(np.abs(self.matrix - self.matrix.conj().T).max()) / scale,
            "hole_block": float(np.abs(D + A.T).max()) / scale,
            "pairing_antisymmetric": float(np.abs(B + B.T).max()) / scale,
        }


def antiperiodic_momenta(n_cells: int) -> np.ndarray:
    """Momenta ``(2m+1) pi / N'`` folded into (-pi, pi], sorted ascending."""
    if n_cells < 1:
        raise ValueError("need at least one unit cell")
    k = np.pi * (2 * np.arange(n_cells) + 1) / n_cells
    k = np.where(k > np.pi + 1e-15, k - 2 * np.pi, k)
    return np.sort(k)


def _amplitudes(params: CompassParams, k):
    th = params.theta
    L = params.J_o + params.J_e * np.exp(1j * k)
    J = params.J_o * np.exp(1j * th) - params.J_e * np.exp(1j * (k - th))
    Jm = params.J_o * np.exp(1j * th) - params.J_e * np.exp(1j * (-k - th))
    return L, J, Jm


def _energies(params: CompassParams, k, field_shift: float = 0.0):
    h = params.h + field_shift
    L, J, Jm = _amplitudes(params, k)
    P, Q, Y = np.abs(J) ** 2, np.abs(Jm) ** 2, np.abs(L) ** 2
    x = 4 * h * h
    a = x + Y + 0.5 * (P + Q)
    b = (4 * x + P + Q) * Y + 0.25 * (P - Q) ** 2 \
        + 2 * np.real(np.conj(L) ** 2 * J * np.conj(Jm))
    scale = np.maximum(1.0, a * a)
    b = np.where((b < 0) & (b > -_CLAMP_TOL * scale), 0.0, b)
    if np.any(b < 0):
        raise FloatingPointError("negative discriminant in dispersion")
    # E_q^2 E_p^2 = a^2 - b; written so the flat band at the compass point
    # comes out as an exact zero instead of sqrt(roundoff)
    det = x * x + x * (P + Q - 2 * Y) + np.abs(L ** 2 - J * np.conj(Jm)) ** 2
    det = np.where((det < 0) & (det > -_CLAMP_TOL * scale), 0.0, det)
    if np.any(det < 0):
        raise FloatingPointError("negative lower branch in dispersion")
    Eq = np.sqrt(a + np.sqrt(b))
    Ep = np.divide(np.sqrt(det), Eq, out=np.zeros_like(Eq), where=Eq > 0)
    Ep = np.minimum(Ep, Eq)
    return L, J, Jm, a, b, Eq, Ep


def dispersion(params: CompassParams, k: float, field_shift: float = 0.0) -> DispersionPoint:
    """Closed-form quasiparticle energies ``E_q >= E_p >= 0`` at momentum ``k``.

    ``E^2 = a +- sqrt(b)`` with

    * ``a = 4h^2 + |L|^2 + (|J_k|^2 + |J_-k|^2)/2``
    * ``b = (16h^2 + |J_k|^2 + |J_-k|^2)|L|^2 + (|J_k|^2 - |J_-k|^2)^2/4
      + 2 Re(L*^2 J_k J_-k*)``

    The lower branch is evaluated as ``sqrt(a^2 - b) / E_q``. Here ``L = J_o + J_e e^{ik}`` and ``J_k = J_o e^{i theta} - J_e e^{i(k-theta)}``.
    """
    if not np.isfinite(k) or not np.isfinite(field_shift):
        raise ValueError("k and field_shift must be finite")
    if not (-math.pi - 1e-12 < k <= math.pi + 1e-12):
        raise ValueError(f"k must lie in (-pi, pi], got {k}")
    L, J, Jm, a, b, Eq, Ep = _energies(params, float(k), field_shift)
    return DispersionPoint(float(k), complex(L), complex(J), complex(Jm),
                           float(a), float(b), float(Eq), float(Ep))


def dispersion_grid(params: CompassParams, field_shift: float = 0.0):
    """Vectorised ``(k, E_q, E_p)`` over the antiperiodic momentum grid."""
    k = antiperiodic_momenta(params.n_cells)
    *_, Eq, Ep = _energies(params, k, field_shift)
    return k, Eq, Ep


def momentum_block(params: CompassParams, k, field_shift: float = 0.0) -> np.ndarray:
    """4x4 Nambu block(s) in the basis ``(a_k, b_k, a_-k^dag, b_-k^dag)``.

    ``a``/``b`` are the odd/even sublattice fermions. Accepts scalar or array
    ``k``; an array returns shape ``(len(k), 4, 4)``.
    """
    scalar = np.ndim(k) == 0
    k = np.atleast_1d(np.asarray(k, dtype=float))
    f = 2.0 * (params.h + field_shift)
    th = params.theta
    hop = params.J_o + params.J_e * np.exp(-1j * k)
    pair = params.J_o * np.exp(-1j * th) - params.J_e * np.exp(1j * th) * np.exp(-1j * k)
    pair_m = params.J_o * np.exp(-1j * th) - params.J_e * np.exp(1j * th) * np.exp(1j * k)
    M = np.zeros((k.size, 4, 4), dtype=complex)
    M[:, 0, 0] = M[:, 1, 1] = f
    M[:, 2, 2] = M[:, 3, 3] = -f
    M[:, 0, 1] = hop
    M[:, 1, 0] = hop.conj()
    M[:, 2, 3] = -hop
    M[:, 3, 2] = -hop.conj()
    M[:, 0, 3] = pair
    M[:, 1, 2] = -pair_m
    M[:, 3, 0] = pair.conj()
    M[:, 2, 1] = -pair_m.conj()
    return M[0] if scalar else M


def build_bdg(params: CompassParams, field_shift: float = 0.0) -> BdGMatrix:
    """Real-space Nambu matrix of the fermionised chain at field ``h + field_shift``.

    A bond with coupling J between sites j, j+1 along axis angle alpha maps to
    ``J (c_j^dag c_{j+1} + h.c.) + J (e^{-2i alpha} c_j^dag c_{j+1}^dag + h.c.)``
    and ``h sigma^z_j = h (2 n_j - 1)``. Sites are 0-based here, so odd bonds
    start on even indices.
    """
    if not np.isfinite(field_shift):
        raise ValueError("field_shift must be finite")
    N = params.N
    h = params.h + field_shift
    A = np.zeros((N, N), dtype=complex)
    B = np.zeros((N, N), dtype=complex)

    def bond(j, l, J, alpha, sign=1.0):
        A[j, l] += sign * J
        A[l, j] += sign * J
        p = sign * J * np.exp(-2j * alpha)
        B[j, l] += p
        B[l, j] -= p

    half = params.theta / 2
    for j in range(N - 1):
        if j % 2 == 0:
            bond(j, j + 1, params.J_o, half)
        else:
            bond(j, j + 1, params.J_e, -half)
    if params.boundary is Boundary.PERIODIC:
        # even parity sector: the string operator flips the wrap-around bond
        bond(N - 1, 0, params.J_e, -half, sign=-1.0)
    A[np.diag_indices(N)] += 2 * h
    # c^dag A c = 1/2 Psi^dag M Psi + tr(A)/2, and sigma^z = 2n - 1
    constant = 0.5 * float(np.trace(A).real) - N * h
    M = np.block([[A, B], [B.conj().T, -A.T]])
    return BdGMatrix(M, float(field_shift), constant, params)


def spectral_gap(params: CompassParams) -> float:
    """Lowest quasiparticle excitation above the ground manifold.

    Minimum of E_p over the antiperiodic grid. When the E_p branch is an
    identically flat zero band (the compass point theta = pi/2, h = 0) those
    modes only label the degenerate ground manifold, and the gap is the
    minimum of E_q instead.
    """
    _, Eq, Ep = dispersion_grid(params)
    if Ep.max() < 1e-9 * max(1.0, Eq.max()):
        return float(Eq.min())
    return float(Ep.min())


def gap_parameter(params: CompassParams) -> float:
    """Scaling variable ``|J_e - J_o|`` used for the relaxation-time fits."""
    return abs(params.J_e - params.J_o)


def critical_theta(J_o: float, J_e: float, h: float) -> float:
    """Angle where the gap closes: ``cos(theta_c) = h / sqrt(J_o J_e)``."""
    ratio = h / math.sqrt(J_o * J_e)
    if abs(ratio) > 1:
        raise ValueError("no critical angle: |h| exceeds sqrt(J_o J_e)")
    return math.acos(ratio)
