"""Gaussian-state engine for the fermionised compass chain.

A pure Gaussian state is stored as the stacked Bogoliubov columns
``W = [U; V]`` (2N x N). Column n defines the quasiparticle

    gamma_n = sum_i conj(U[i, n]) c_i + conj(V[i, n]) c_i^dag

and the state is the vacuum annihilated by every gamma_n. Evolution under
``H = 1/2 Psi^dag M Psi`` maps ``W -> exp(-i M t) W``.

Decoherence factors only need magnitudes, so overlaps are evaluated with the
Onishi determinant ``|<a|b>| = |det(W_a^dag W_b)|^(1/2)`` and no phase or
Pfaffian sign is tracked.
"""

from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .model import (Boundary, BdGMatrix, CompassParams, antiperiodic_momenta,
                    build_bdg, momentum_block)

__all__ = [
    "DegeneracyWarning",
    "GaussianState",
    "CouplingSpec",
    "EchoSeries",
    "Propagator",
    "ground_state",
    "evolve",
    "overlap_magnitude",
    "log_overlap_magnitude",
    "two_point",
    "energy",
    "vacuum_parity",
    "decoherence_factor",
]

ZERO_MODE_TOL = 1e-10


class DegeneracyWarning(UserWarning):
    """The ground state was picked from a degenerate manifold by tie-break."""


@dataclass(frozen=True)
class GaussianState:
    U: np.ndarray
    V: np.ndarray
    zero_modes: int = 0
    tie_break: str = ""

    def __post_init__(self):
        U = np.array(self.U, dtype=complex)
        V = np.array(self.V, dtype=complex)
        if U.shape != V.shape or U.ndim != 2:
            raise ValueError("U and V must be matrices of equal shape")
        U.setflags(write=False)
        V.setflags(write=False)
        object.__setattr__(self, "U", U)
        object.__setattr__(self, "V", V)

    @classmethod
    def from_columns(cls, W, **kw) -> "GaussianState":
        n = W.shape[0] // 2
        return cls(W[:n], W[n:], **kw)

    @property
    def W(self) -> np.ndarray:
        return np.vstack([self.U, self.V])

    @property
    def n_modes(self) -> int:
        return self.U.shape[0]

    @property
    def degenerate(self) -> bool:
        return self.zero_modes > 0

    def constraint_errors(self) -> tuple[float, float]:
        """Max violations of ``U^dag U + V^dag V = 1`` and ``U^T V + V^T U = 0``."""
        U, V = self.U, self.V
        norm = U.conj().T @ U + V.conj().T @ V - np.eye(U.shape[1])
        anti = U.T @ V + V.T @ U
        return float(np.abs(norm).max()), float(np.abs(anti).max())


@dataclass(frozen=True)
class CouplingSpec:
    """Central-qubit coupling. Eigenvalues of (g/2)(sz_A + sz_B) are (g, 0, 0, -g)."""

    g: float

    def __post_init__(self):
        if not np.isfinite(self.g):
            raise ValueError("g must be finite")
        object.__setattr__(self, "g", float(self.g))

    @property
    def eps(self) -> tuple[float, float, float, float]:
        return (self.g, 0.0, 0.0, -self.g)

    def shift(self, mu: int) -> float:
        if mu not in (1, 2, 3, 4):
            raise ValueError(f"branch index must be 1..4, got {mu}")
        return self.eps[mu - 1]

    def shifted_fields(self, h: float) -> tuple[float, ...]:
        return tuple(h + e for e in self.eps)


@dataclass(frozen=True)
class EchoSeries:
    params: CompassParams
    coupling: CouplingSpec
    times: np.ndarray
    values: np.ndarray
    pair: tuple[int, int] = (1, 4)
    warnings: tuple[str, ...] = field(default=())

    def __post_init__(self):
        for name in ("times", "values"):
            a = np.array(getattr(self, name), dtype=float)
            a.setflags(write=False)
            object.__setattr__(self, name, a)


def _null_space_basis(Z, K, tol):
    """Split the columns of Z by the sign of the projected perturbation K."""
    lam, c = np.linalg.eigh(K)
    scale = max(1.0, float(np.abs(lam).max()) if lam.size else 1.0)
    cut = tol * scale
    return Z @ c[:, lam > cut], Z @ c[:, np.abs(lam) <= cut]


def vacuum_parity(W: np.ndarray) -> float:
    """Fermion parity of the vacuum of ``W = [U; V]`` relative to the bare vacuum.

    Equals ``det [[U, V*], [V, U*]]``, which is +1 or -1 for a valid vacuum.
    """
    n = W.shape[0] // 2
    U, V = W[:n], W[n:]
    T = np.block([[U, V.conj()], [V, U.conj()]])
    return float(np.real(np.linalg.det(T)))


def _partner(v):
    """Particle-hole partner of a Nambu column."""
    n = v.shape[0] // 2
    return np.r_[v[n:], v[:n]].conj()


def _vacuum_columns(E, P, tol=ZERO_MODE_TOL, nambu=True):
    """Columns of the Bogoliubov vacuum from the eigensystem of a Nambu matrix.

    Positive-energy eigenvectors define the annihilators. Exact zero modes
    are resolved by the transverse field in the limit of vanishing field
    (first, then second order in degenerate perturbation theory), then by a
    site-indexed chemical potential. Pairs that none of these touch
    (Majorana end modes) are fixed by requiring an even-parity vacuum.
    ``nambu=False`` marks a momentum block, whose particle-hole partners live
    in the block at -k; the partner-based steps are skipped there.
    Returns ``(columns, n_zero_pairs, rule)``.
    """
    n = P.shape[0] // 2
    finish = _restore_constraints if nambu else (lambda W: W)
    scale = max(1.0, float(np.abs(E).max()))
    zero = np.abs(E) <= tol * scale
    chosen = [P[:, E > tol * scale]]
    if not zero.any():
        return finish(chosen[0]), 0, ""

    Z = P[:, zero]
    field_op = np.r_[np.full(n, 2.0), np.full(n, -2.0)]
    nz = ~zero
    Pn = P[:, nz]
    resolvent = (Pn / E[nz]) @ Pn.conj().T
    weights = np.arange(1, n + 1, dtype=float)
    index_op = np.r_[weights, -weights]
    steps = (
        ("field, first order", lambda S: S.conj().T @ (field_op[:, None] * S)),
        ("field, second order",
         lambda S: -(field_op[:, None] * S).conj().T @ resolvent @ (field_op[:, None] * S)),
        ("indexed chemical potential", lambda S: S.conj().T @ (index_op[:, None] * S)),
    )
    rest = Z
    rule = ""
    for name, proj in steps:
        if rest.shape[1] == 0:
            break
        picked, rest = _null_space_basis(rest, proj(rest), 1e-8)
        if picked.shape[1]:
            chosen.append(picked)
            rule = name
    if rest.shape[1] == 2 and nambu:
        # a single untouched pair: either member gives a vacuum, of opposite parity
        hop = np.ones((n, n)) + 1j * np.sign(np.subtract.outer(np.arange(n), np.arange(n))).T
        hop_op = np.block([[hop, np.zeros((n, n))], [np.zeros((n, n)), -hop.T]])
        picked, rest = _null_space_basis(rest, rest.conj().T @ hop_op @ rest, 1e-8)
        if picked.shape[1] == 1 and rest.shape[1] == 0:
            v = picked[:, 0]
            if vacuum_parity(np.hstack(chosen + [v[:, None]])) < 0:
                v = _partner(v)
            chosen.append(v[:, None])
            rule = "even parity"
    if rest.shape[1]:
        raise np.linalg.LinAlgError("zero modes could not be resolved by any tie-break")
    W = np.hstack(chosen)
    if W.shape[1] != n:
        raise np.linalg.LinAlgError(f"vacuum has {W.shape[1]} modes, expected {n}")
    return finish(W), int(zero.sum()) // 2, rule


def _restore_constraints(W):
    """Symmetric orthonormalisation of ``[W, partner(W)]``.

    Nearly degenerate +-E pairs (edge modes just above the zero-mode cut)
    come out of eigh slightly mixed with their partners, which breaks
    ``U^T V + V^T U = 0``. The polar factor of ``X = [W, tau W*]`` is the
    nearest unitary and keeps the particle-hole structure.
    """
    n = W.shape[0] // 2
    X = np.hstack([W, np.r_[W[n:], W[:n]].conj()])
    lam, Q = np.linalg.eigh(X.conj().T @ X)
    if lam.min() <= 0.5:
        raise np.linalg.LinAlgError("vacuum columns are linearly dependent on their partners")
    return (X @ ((Q / np.sqrt(lam)) @ Q.conj().T))[:, :n]


def ground_state(M: BdGMatrix, tol: float = ZERO_MODE_TOL) -> GaussianState:
    """Bogoliubov vacuum of ``M``.

    Eigenvectors come from ``numpy.linalg.eigh`` in ascending energy order;
    each column's phase is fixed so its largest-magnitude entry is real and
    positive. Zero modes trigger a :class:`DegeneracyWarning` and the
    deterministic tie-break described in :func:`_vacuum_columns`.
    """
    E, P = np.linalg.eigh(M.matrix)
    W, nzero, rule = _vacuum_columns(E, P, tol)
    W = _fix_phases(W)
    if nzero:
        warnings.warn(f"{nzero} zero-mode pairs resolved by {rule}", DegeneracyWarning,
                      stacklevel=2)
    return GaussianState.from_columns(W, zero_modes=nzero, tie_break=rule)


def _fix_phases(W):
    idx = np.argmax(np.abs(W), axis=0)
    ph = W[idx, np.arange(W.shape[1])]
    return W * (np.abs(ph) / ph)[None, :]


def _phases(E, t):
    return np.exp(-1j * E * t)


class Propagator:
    """``exp(-i M t)`` from one eigendecomposition of a Nambu matrix."""

    def __init__(self, M: BdGMatrix):
        self.bdg = M
        self.energies, self.vectors = np.linalg.eigh(M.matrix)

    def __call__(self, t: float) -> np.ndarray:
        P = self.vectors
        return (P * _phases(self.energies, t)[None, :]) @ P.conj().T

    def apply(self, W: np.ndarray, t: float) -> np.ndarray:
        P = self.vectors
        return P @ (_phases(self.energies, t)[:, None] * (P.conj().T @ W))


def evolve(state: GaussianState, M: BdGMatrix | Propagator, t: float) -> GaussianState:
    """``exp(-i H_M t)|state>`` up to a global phase."""
    if not np.isfinite(t):
        raise ValueError("t must be finite")
    prop = M if isinstance(M, Propagator) else Propagator(M)
    if prop.vectors.shape[0] != 2 * state.n_modes:
        raise ValueError("state and Hamiltonian dimensions differ")
    if t == 0:
        return state
    W = prop.apply(state.W, t)
    return GaussianState.from_columns(W, zero_modes=state.zero_modes, tie_break=state.tie_break)


def log_overlap_magnitude(s1: GaussianState, s2: GaussianState) -> float:
    """``log |<s1|s2>|``; -inf for orthogonal states."""
    if s1.U.shape != s2.U.shape:
        raise ValueError("states have different dimensions")
    O = s1.U.conj().T @ s2.U + s1.V.conj().T @ s2.V
    sign, logdet = np.linalg.slogdet(O)
    if sign == 0:
        return -math.inf
    return 0.5 * float(logdet)


def overlap_magnitude(s1: GaussianState, s2: GaussianState) -> float:
    """``|<s1|s2>| = |det(U1^dag U2 + V1^dag V2)|^(1/2)``, clamped to [0, 1]."""
    lo = log_overlap_magnitude(s1, s2)
    if lo == -math.inf:
        return 0.0
    return float(min(1.0, math.exp(min(lo, 0.0))))


def two_point(state: GaussianState):
    """Return ``(<c_i^dag c_j>, <c_i c_j>)`` for the state."""
    U, V = state.U, state.V
    return V @ V.conj().T, U @ V.conj().T


def energy(state: GaussianState, M: BdGMatrix) -> float:
    """``<H> = -1/2 tr(W^dag M W) + constant``."""
    W = state.W
    return float(-0.5 * np.trace(W.conj().T @ M.matrix @ W).real) + M.constant


def _check_times(times):
    t = np.asarray(times, dtype=float).ravel()
    if not np.all(np.isfinite(t)):
        raise ValueError("times must be finite")
    if t.size > 1 and np.any(np.diff(t) < 0):
        raise ValueError("times must be sorted ascending")
    return t


def _resolve_threads(threads):
    if threads is None:
        threads = int(os.environ.get("COMPASS_THREADS", "1") or 1)
    return max(1, int(threads))


def _map(fn, items, threads):
    if threads == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _realspace_echo(params, coupling, t, pair, threads):
    nu, mu = pair
    M0 = build_bdg(params)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", DegeneracyWarning)
        psi = ground_state(M0)
    notes = tuple(str(w.message) for w in caught)
    if coupling.shift(nu) == coupling.shift(mu):
        return np.ones_like(t), notes
    Pnu = Propagator(build_bdg(params, coupling.shift(nu)))
    Pmu = Propagator(build_bdg(params, coupling.shift(mu)))
    W = psi.W
    a_nu = Pnu.vectors.conj().T @ W
    a_mu = Pmu.vectors.conj().T @ W
    X = Pmu.vectors.conj().T @ Pnu.vectors

    def one(tt):
        left = _phases(Pmu.energies, tt)[:, None] * a_mu
        right = _phases(Pnu.energies, tt)[:, None] * a_nu
        sign, logdet = np.linalg.slogdet(left.conj().T @ (X @ right))
        return 0.0 if sign == 0 else min(1.0, math.exp(min(0.5 * logdet, 0.0)))

    return np.array(_map(one, list(t), threads)), notes


def _block_vacua(blocks):
    cols = np.empty((blocks.shape[0], 4, 2), dtype=complex)
    E, P = np.linalg.eigh(blocks)
    nzero = 0
    rule = ""
    for i in range(blocks.shape[0]):
        w, z, r = _vacuum_columns(E[i], P[i], nambu=False)
        cols[i] = w
        nzero += z
        rule = rule or r
    return cols, nzero, rule


def _momentum_echo(params, coupling, t, pair, threads):
    nu, mu = pair
    k = antiperiodic_momenta(params.n_cells)
    W, nzero, rule = _block_vacua(momentum_block(params, k))
    notes = (f"{nzero} zero-mode pairs resolved by {rule}",) if nzero else ()
    if coupling.shift(nu) == coupling.shift(mu):
        return np.ones_like(t), notes
    Enu, Pnu = np.linalg.eigh(momentum_block(params, k, coupling.shift(nu)))
    Emu, Pmu = np.linalg.eigh(momentum_block(params, k, coupling.shift(mu)))
    a_nu = np.einsum("kji,kjm->kim", Pnu.conj(), W)
    a_mu = np.einsum("kji,kjm->kim", Pmu.conj(), W)
    X = np.einsum("kji,kjl->kil", Pmu.conj(), Pnu)

    def one(tt):
        right = _phases(Enu, tt)[:, :, None] * a_nu
        left = _phases(Emu, tt)[:, :, None] * a_mu
        O = np.einsum("kim,kil,kln->kmn", left.conj(), X, right)
        d = np.abs(np.linalg.det(O))
        if np.any(d == 0):
            return 0.0
        return min(1.0, math.exp(min(0.5 * float(np.log(d).sum()), 0.0)))

    return np.array(_map(one, list(t), threads)), notes


def decoherence_factor(params: CompassParams, coupling: CouplingSpec, times,
                       pair: tuple[int, int] = (1, 4), method: str = "auto",
                       threads: int | None = None) -> EchoSeries:
    """``|F_{nu mu}(t)| = |<psi| U_mu^dag(t) U_nu(t) |psi>|`` on a time grid.

    ``psi`` is the ground state at field ``h`` and ``U_nu`` evolves with field
    ``h + eps_nu``. The default pair (1, 4) is the Bell-state echo; F_23 is
    identically 1.

    ``method`` is ``"realspace"`` (any boundary), ``"momentum"`` (periodic
    chains only; factorises into 4x4 blocks per momentum pair) or
    ``"auto"``, which picks momentum for periodic chains.
    """
    t = _check_times(times)
    if len(pair) != 2:
        raise ValueError("pair must be (nu, mu)")
    pair = (int(pair[0]), int(pair[1]))
    if method == "auto":
        method = "momentum" if params.boundary is Boundary.PERIODIC else "realspace"
    threads = _resolve_threads(threads)
    if method == "momentum":
        if params.boundary is not Boundary.PERIODIC:
            raise ValueError("momentum method needs the periodic boundary")
        values, notes = _momentum_echo(params, coupling, t, pair, threads)
    elif method == "realspace":
        values, notes = _realspace_echo(params, coupling, t, pair, threads)
    else:
        raise ValueError(f"unknown method {method!r}")
    return EchoSeries(params, coupling, t, values, pair, notes)
