"""Scaling observables from echo time series.

Series are passed either as an object with ``times``/``values`` attributes
(an :class:`~compass_echo.fermion_engine.EchoSeries`) or as two arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "FitResult",
    "RelaxationPoint",
    "NoMinimumFound",
    "NoOscillation",
    "SMALL_GAP_WINDOW",
    "LARGE_GAP_WINDOW",
    "find_relaxation_time",
    "fit_power_law",
    "fit_gaussian_decay",
    "revival_period",
    "window_average",
    "gap_scan",
]

# Delta = |J_e - J_o| with J_o = 1; see README for why these differ from [0.2, 1] / [1.5, 4]
SMALL_GAP_WINDOW = (1.0, 2.0)
LARGE_GAP_WINDOW = (4.0, 8.0)


class NoMinimumFound(ValueError):
    """The series has no interior local minimum; extend the time grid."""


class NoOscillation(ValueError):
    """The post-transient tail is flat or too short for a period estimate."""


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    r_squared: float
    n_points: int
    window: tuple[float, float]
    kind: str = "linear"

    @property
    def tau(self) -> float:
        """Power-law exponent, ``T_r ~ Delta**tau``."""
        return self.slope

    @property
    def tau_reciprocal(self) -> float:
        """Exponent under the ``T_r ~ Delta**(-1/tau)`` reading."""
        return -1.0 / self.slope if self.slope != 0 else float("inf")

    @property
    def delta(self) -> float:
        """Gaussian rate, ``value ~ exp(-delta T_r**2)``."""
        return -self.slope

    @property
    def tau_or_delta(self) -> float:
        return self.delta if self.kind == "gaussian" else self.tau

    def as_dict(self) -> dict:
        return {
            "kind": self.kind,
            "slope": self.slope,
            "intercept": self.intercept,
            "tau_or_delta": self.tau_or_delta,
            "r_squared": self.r_squared,
            "window": list(self.window),
            "n_points": self.n_points,
        }


@dataclass(frozen=True)
class RelaxationPoint:
    delta: float
    T_r: float
    value_at_Tr: float

    def __post_init__(self):
        if not self.T_r > 0:
            raise ValueError("T_r must be positive")
        if not -1e-12 <= self.value_at_Tr <= 1 + 1e-12:
            raise ValueError("value_at_Tr outside [0, 1]")


def _unpack(series, values=None):
    if values is None:
        times, values = series.times, series.values
    else:
        times = series
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    if t.shape != v.shape or t.ndim != 1:
        raise ValueError("times and values must be 1-d arrays of equal length")
    return t, v


def _check_uniform(t):
    d = np.diff(t)
    if np.any(d <= 0) or not np.allclose(d, d[0], rtol=1e-6, atol=1e-12):
        raise ValueError("time grid must be uniform and increasing")
    return float(d[0])


def _moving_average(v, width):
    if width == 1:
        return v
    if width < 1 or width % 2 == 0:
        raise ValueError("smoothing width must be a positive odd integer")
    kernel = np.ones(width) / width
    inner = np.convolve(v, kernel, mode="valid")
    half = width // 2
    # edges keep the raw samples so indices line up
    return np.concatenate([v[:half], inner, v[len(v) - half:]])


def find_relaxation_time(series, values=None, *, smooth: int = 1, delta: float = np.nan) -> RelaxationPoint:
    """First strict local minimum after ``t=0``.

    A flat bottom counts as one minimum located at its first sample.
    """
    t, v = _unpack(series, values)
    if len(t) < 5:
        raise ValueError("need at least 5 samples")
    _check_uniform(t)
    s = _moving_average(v, smooth)
    n = len(s)
    i = 1
    while i < n - 1:
        if s[i] < s[i - 1]:
            j = i
            while j + 1 < n and s[j + 1] == s[i]:
                j += 1
            if j + 1 < n and s[j + 1] > s[i]:
                return RelaxationPoint(delta=delta, T_r=float(t[i]), value_at_Tr=float(np.clip(v[i], 0.0, 1.0)))
            i = j + 1
        else:
            i += 1
    raise NoMinimumFound("no interior local minimum; extend the time grid")


def _linear_fit(x, y, window, kind):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) < 3:
        raise ValueError(f"need at least 3 points in the fit window, got {len(x)}")
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return FitResult(float(slope), float(intercept), float(np.clip(r2, 0.0, 1.0)), len(x),
                     (float(window[0]), float(window[1])), kind)


def _select(points, window, key):
    if window is None:
        return list(points)
    lo, hi = window
    return [p for p in points if lo - 1e-12 <= key(p) <= hi + 1e-12]


def fit_power_law(points, window=None) -> FitResult:
    """Least squares of ``ln T_r`` on ``ln Delta``.

    ``points`` are RelaxationPoints or ``(delta, T_r)`` pairs; ``window``
    restricts Delta.
    """
    pts = [(p.delta, p.T_r) if isinstance(p, RelaxationPoint) else tuple(p)[:2] for p in points]
    pts = _select(pts, window, key=lambda p: p[0])
    d = np.array([p[0] for p in pts], dtype=float)
    T = np.array([p[1] for p in pts], dtype=float)
    if np.any(~(d > 0)) or np.any(~(T > 0)):
        raise ValueError("gaps and relaxation times must be positive")
    win = window if window is not None else (d.min(), d.max()) if len(d) else (np.nan, np.nan)
    return _linear_fit(np.log(d), np.log(T), win, "power_law")


def fit_gaussian_decay(points, window=None) -> FitResult:
    """Least squares of ``ln value`` on ``T_r**2``; ``window`` restricts T_r."""
    pts = [(p.T_r, p.value_at_Tr) if isinstance(p, RelaxationPoint) else tuple(p)[:2] for p in points]
    pts = _select(pts, window, key=lambda p: p[0])
    T = np.array([p[0] for p in pts], dtype=float)
    val = np.array([p[1] for p in pts], dtype=float)
    if np.any(~(val > 0)):
        raise ValueError("values must be positive for a log fit")
    win = window if window is not None else (T.min(), T.max()) if len(T) else (np.nan, np.nan)
    return _linear_fit(T ** 2, np.log(val), win, "gaussian")


def revival_period(series, values=None, *, t_start: float | None = None, pad: int = 8) -> float:
    """Dominant period of the tail after ``t_start`` (default: after T_r).

    Hann-windowed, zero-padded spectrum of the mean-subtracted tail, with a
    parabolic fit to the log power around the peak bin.
    """
    t, v = _unpack(series, values)
    dt = _check_uniform(t)
    if t_start is None:
        try:
            t_start = find_relaxation_time(t, v).T_r
        except NoMinimumFound:
            t_start = t[0]
    tail = v[t >= t_start]
    if len(tail) < 8:
        raise NoOscillation("tail too short")
    tail = tail - tail.mean()
    if np.var(tail) < 1e-12:
        raise NoOscillation("tail variance below 1e-12")
    n_fft = pad * (1 << int(np.ceil(np.log2(len(tail)))))
    power = np.abs(np.fft.rfft(tail * np.hanning(len(tail)), n_fft)) ** 2
    # skip the leakage lobe of the removed mean
    k0 = max(1, 2 * pad)
    k = k0 + int(np.argmax(power[k0:-1]))
    a, b, c = np.log(power[k - 1:k + 2] + 1e-300)
    denom = a - 2 * b + c
    shift = 0.5 * (a - c) / denom if denom != 0 else 0.0
    freq = (k + shift) / (n_fft * dt)
    period = 1.0 / freq
    span = dt * (len(tail) - 1)
    if period > span / 3:
        raise NoOscillation(f"fewer than 3 cycles in the tail (period {period:.4g}, span {span:.4g})")
    return float(period)


def window_average(series, values=None, t_min: float = 0.0, t_max: float = np.inf) -> float:
    t, v = _unpack(series, values)
    if t_min < t[0] - 1e-12 or t_max > t[-1] + 1e-12 or t_min > t_max:
        raise ValueError(f"window [{t_min}, {t_max}] outside series range [{t[0]}, {t[-1]}]")
    mask = (t >= t_min - 1e-12) & (t <= t_max + 1e-12)
    if not mask.any():
        raise ValueError("empty averaging window")
    return float(v[mask].mean())


def gap_scan(base, coupling, deltas, times, *, smooth: int = 1, threads=None) -> list[RelaxationPoint]:
    """Relaxation points of ``|F_14|`` for ``J_e = J_o + Delta``.

    ``base`` supplies everything except ``J_e``.
    """
    from .fermion_engine import decoherence_factor

    out = []
    for d in deltas:
        p = base.replace(J_e=base.J_o + float(d))
        s = decoherence_factor(p, coupling, times, threads=threads)
        out.append(find_relaxation_time(s, smooth=smooth, delta=float(d)))
    return out
