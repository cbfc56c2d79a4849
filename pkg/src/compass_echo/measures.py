"""Two-qubit X-states and closed-form correlation measures.

Basis order is ``(uu, ud, du, dd)``. All logarithms are base 2 with
``0 log 0 = 0``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "InitialXState",
    "XState",
    "QCRecord",
    "BELL",
    "assemble_xstate",
    "concurrence",
    "wootters_concurrence",
    "eof",
    "discord",
    "negativity",
    "partial_transpose",
    "measure_record",
    "records_from_echo",
]

POS_TOL = 1e-12

_SXX = np.fliplr(np.eye(4))
_SYY = np.diag([-1.0, 1.0, 1.0, -1.0])[:, ::-1]
_SZZ = np.diag([1.0, -1.0, -1.0, 1.0])


@dataclass(frozen=True)
class InitialXState:
    """``rho(0) = (1 + c_x sxsx + c_y sysy + c_z szsz) / 4``."""

    c_x: float
    c_y: float
    c_z: float

    def __post_init__(self):
        ev = self.eigenvalues()
        if not np.all(np.isfinite([self.c_x, self.c_y, self.c_z])):
            raise ValueError("correlation coefficients must be finite")
        if ev.min() < -POS_TOL:
            raise ValueError(f"initial state not positive: eigenvalues {ev}")

    def eigenvalues(self) -> np.ndarray:
        cz, s, d = self.c_z, self.c_x + self.c_y, self.c_x - self.c_y
        return np.array([1 + cz + d, 1 + cz - d, 1 - cz + s, 1 - cz - s]) / 4

    def matrix(self) -> np.ndarray:
        return (np.eye(4) + self.c_x * _SXX + self.c_y * _SYY + self.c_z * _SZZ).astype(complex) / 4


BELL = InitialXState(1.0, -1.0, 1.0)


@dataclass(frozen=True)
class XState:
    c_z: float
    c_beta: complex
    c_gamma: complex

    def __post_init__(self):
        ev = self.eigenvalues()
        if ev.min() < -POS_TOL:
            raise ValueError(f"X-state not positive: eigenvalues {ev}")

    def eigenvalues(self) -> np.ndarray:
        b, g, cz = abs(self.c_beta), abs(self.c_gamma), self.c_z
        return np.array([1 + cz + b, 1 + cz - b, 1 - cz + g, 1 - cz - g]) / 4

    def matrix(self) -> np.ndarray:
        cz = self.c_z
        rho = np.diag([1 + cz, 1 - cz, 1 - cz, 1 + cz]).astype(complex)
        rho[0, 3] = self.c_beta
        rho[3, 0] = np.conj(self.c_beta)
        rho[1, 2] = self.c_gamma
        rho[2, 1] = np.conj(self.c_gamma)
        return rho / 4


@dataclass(frozen=True)
class QCRecord:
    t: float
    absF: float
    concurrence: float
    eof: float
    discord: float
    classical: float
    negativity: float

    def __post_init__(self):
        vals = (self.t, self.absF, self.concurrence, self.eof, self.discord,
                self.classical, self.negativity)
        if not np.all(np.isfinite(vals)):
            raise ValueError("non-finite measure")

    FIELDS = ("t", "absF", "concurrence", "eof", "discord", "classical", "negativity")

    def as_tuple(self):
        return tuple(getattr(self, f) for f in self.FIELDS)


def assemble_xstate(initial: InitialXState, F14: complex, F23: complex = 1.0) -> XState:
    if abs(F14) > 1 + 1e-12 or abs(F23) > 1 + 1e-12:
        raise ValueError("decoherence factors must satisfy |F| <= 1")
    return XState(
        c_z=initial.c_z,
        c_beta=complex((initial.c_x - initial.c_y) * F14),
        c_gamma=complex((initial.c_x + initial.c_y) * F23),
    )


def concurrence(x: XState) -> float:
    b, g, cz = abs(x.c_beta), abs(x.c_gamma), x.c_z
    return float(min(1.0, max((b + cz - 1) / 2, (g - cz - 1) / 2, 0.0)))


def wootters_concurrence(rho: np.ndarray) -> float:
    """Concurrence of any two-qubit density matrix from the spin-flipped product."""
    rho = np.asarray(rho, dtype=complex)
    yy = np.kron([[0, -1j], [1j, 0]], [[0, -1j], [1j, 0]])
    R = rho @ yy @ rho.conj() @ yy
    lam = np.sqrt(np.clip(np.sort(np.linalg.eigvals(R).real)[::-1], 0, None))
    return float(max(0.0, lam[0] - lam[1:].sum()))


def _xlog2x(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = x[pos] * np.log2(x[pos])
    return out


def _binary_entropy(p):
    return -(_xlog2x(p) + _xlog2x(1 - p))


def eof(c) -> float | np.ndarray:
    """Entanglement of formation from a concurrence (scalar or array)."""
    c = np.asarray(c, dtype=float)
    if np.any((c < -POS_TOL) | (c > 1 + POS_TOL)):
        raise ValueError("concurrence outside [0, 1]")
    c = np.clip(c, 0.0, 1.0)
    f = 0.5 * (1 + np.sqrt(1 - c * c))
    out = np.clip(_binary_entropy(f), 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def discord(x: XState) -> tuple[float, float]:
    """``(Q, C)``: quantum discord and classical correlation."""
    b, g, cz = abs(x.c_beta), abs(x.c_gamma), x.c_z
    terms = np.array([1 - cz + g, 1 - cz - g, 1 + cz + b, 1 + cz - b])
    mutual = 0.25 * _xlog2x(np.clip(terms, 0, None)).sum()
    v = min(1.0, max(abs(cz), 0.5 * (b + g)))
    classical = 0.5 * (_xlog2x(1 + v) + _xlog2x(1 - v))
    q = float(np.clip(mutual - classical, 0.0, 1.0))
    return q, float(np.clip(classical, 0.0, 1.0))


def partial_transpose(rho: np.ndarray) -> np.ndarray:
    """Transpose on qubit B."""
    return np.asarray(rho).reshape(2, 2, 2, 2).transpose(0, 3, 2, 1).reshape(4, 4)


def negativity(x: XState | np.ndarray) -> float:
    rho = x.matrix() if isinstance(x, XState) else np.asarray(x)
    ev = np.linalg.eigvalsh(partial_transpose(rho))
    return float(np.clip(-ev[ev < 0].sum(), 0.0, 0.5))


def measure_record(t: float, initial: InitialXState, F14: complex, F23: complex = 1.0) -> QCRecord:
    x = assemble_xstate(initial, F14, F23)
    c = concurrence(x)
    q, cl = discord(x)
    return QCRecord(t=float(t), absF=float(abs(F14)), concurrence=c, eof=eof(c),
                    discord=q, classical=cl, negativity=negativity(x))


def records_from_echo(times, values, initial: InitialXState = BELL) -> list[QCRecord]:
    """Measures along an echo series (``F_23 = 1``)."""
    values = np.minimum(np.asarray(values), 1.0)
    return [measure_record(t, initial, v) for t, v in zip(np.asarray(times), values)]
