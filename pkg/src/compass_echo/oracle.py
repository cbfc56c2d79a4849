"""Dense exact simulator for small chains.

Everything here works directly with 2^N spin vectors and Pauli matrices, with
no fermions involved, so it serves as an independent check on the
Gaussian-state engine. Basis states are ordered with site 1 as the most
significant qubit and ``|up> = (1, 0)``.
"""

from __future__ import annotations

import json
import warnings
from functools import reduce
from pathlib import Path

import numpy as np

from .fermion_engine import ZERO_MODE_TOL, CouplingSpec, DegeneracyWarning
from .model import Boundary, CompassParams

__all__ = [
    "MAX_SITES",
    "site_operator",
    "build_spin_hamiltonian",
    "magnetization",
    "even_parity_mask",
    "exact_ground_state",
    "exact_decoherence_factor",
    "exact_reduced_density",
    "jw_annihilators",
    "exact_two_point",
    "evolve_dense",
    "load_golden",
    "write_golden",
]

MAX_SITES = 14
MAX_SITES_WITH_QUBITS = 10
# a zero mode of the quadratic problem splits the many-body level by 2|E|
DEGENERACY_TOL = 2 * ZERO_MODE_TOL

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
SPLUS = np.array([[0, 1], [0, 0]], dtype=complex)
I2 = np.eye(2, dtype=complex)


def site_operator(op: np.ndarray, j: int, N: int) -> np.ndarray:
    """``op`` acting on site ``j`` (0-based) of an N-site chain."""
    left = np.eye(2 ** j, dtype=complex)
    right = np.eye(2 ** (N - j - 1), dtype=complex)
    return np.kron(np.kron(left, op), right)


def _check_size(N, limit=MAX_SITES):
    if N > limit:
        raise ValueError(f"dense oracle limited to N <= {limit}, got {N}")


def build_spin_hamiltonian(params: CompassParams, field_shift: float = 0.0) -> np.ndarray:
    """Dense ``H_E`` at field ``h + field_shift`` (2^N x 2^N)."""
    N = params.N
    _check_size(N)
    c, s = np.cos(params.theta / 2), np.sin(params.theta / 2)
    plus = c * SX + s * SY
    minus = c * SX - s * SY
    dim = 2 ** N
    H = np.zeros((dim, dim), dtype=complex)
    n_bonds = N if params.boundary is Boundary.PERIODIC else N - 1
    for j in range(n_bonds):
        l = (j + 1) % N
        if j % 2 == 0:
            H += params.J_o * site_operator(plus, j, N) @ site_operator(plus, l, N)
        else:
            H += params.J_e * site_operator(minus, j, N) @ site_operator(minus, l, N)
    H += (params.h + field_shift) * magnetization(N)
    return H


def magnetization(N: int) -> np.ndarray:
    """``sum_j sigma^z_j`` (diagonal, dense)."""
    _check_size(N)
    bits = (np.arange(2 ** N)[:, None] >> np.arange(N - 1, -1, -1)[None, :]) & 1
    return np.diag((N - 2 * bits.sum(axis=1)).astype(complex))


def even_parity_mask(N: int) -> np.ndarray:
    """Basis states with an even number of up spins (occupied fermions)."""
    ups = N - np.array([bin(i).count("1") for i in range(2 ** N)])
    return ups % 2 == 0


def _lowest_cluster(vals, tol):
    return vals <= vals[0] + tol


def exact_ground_state(params: CompassParams, field_shift: float = 0.0):
    """Return ``(E0, psi, degeneracy)``.

    A degenerate ground manifold is resolved the same way the fermion engine
    does it: by the transverse field in the limit of vanishing field (first,
    then second order), then by a site-weighted field ``sum_j (j+1) sigma^z_j``,
    and finally by keeping the even fermion-parity state.
    The returned vector has its largest-magnitude entry real and positive.
    """
    H = build_spin_hamiltonian(params, field_shift)
    if params.boundary is Boundary.PERIODIC:
        # the ring is compared within the even fermion-parity sector
        keep = even_parity_mask(params.N)
        E, Pk = np.linalg.eigh(H[np.ix_(keep, keep)])
        P = np.zeros((H.shape[0], Pk.shape[1]), dtype=complex)
        P[keep] = Pk
    else:
        E, P = np.linalg.eigh(H)
    ground = _lowest_cluster(E, DEGENERACY_TOL)
    deg = int(ground.sum())
    if deg == 1:
        psi = P[:, 0]
    else:
        warnings.warn(f"dense ground manifold of dimension {deg}", DegeneracyWarning,
                      stacklevel=2)
        N = params.N
        V = np.diag(magnetization(N)).real
        S = P[:, ground]
        Q = P[:, ~ground]
        gaps = E[0] - E[~ground]
        weighted = sum((j + 1) * np.diag(site_operator(SZ, j, N)).real for j in range(N))

        def first(S):
            return S.conj().T @ (V[:, None] * S)

        def second(S):
            VS = Q.conj().T @ (V[:, None] * S)
            return VS.conj().T @ (VS / gaps[:, None])

        def indexed(S):
            return S.conj().T @ (weighted[:, None] * S)

        for proj in (first, second, indexed):
            if S.shape[1] == 1:
                break
            K = proj(S)
            K = 0.5 * (K + K.conj().T)
            lam, c = np.linalg.eigh(K)
            keep = _lowest_cluster(lam, 1e-8)
            S = S @ c[:, keep]
        if S.shape[1] > 1:
            # Majorana end modes: keep the even fermion-parity state
            even = even_parity_mask(N).astype(float)
            K = S.conj().T @ (even[:, None] * S)
            lam, c = np.linalg.eigh(0.5 * (K + K.conj().T))
            S = S @ c[:, lam > 1 - 1e-8]
        if S.shape[1] != 1:
            raise np.linalg.LinAlgError("dense ground manifold could not be resolved")
        psi = S[:, 0]
    i = np.argmax(np.abs(psi))
    psi = psi * (abs(psi[i]) / psi[i])
    return float(E[0]), psi, deg


def evolve_dense(H: np.ndarray, psi: np.ndarray, t: float) -> np.ndarray:
    E, P = np.linalg.eigh(H)
    return P @ (np.exp(-1j * E * t) * (P.conj().T @ psi))


class _Evolver:
    def __init__(self, H):
        self.E, self.P = np.linalg.eigh(H)

    def __call__(self, psi, t):
        return self.P @ (np.exp(-1j * self.E * t) * (self.P.conj().T @ psi))


def exact_decoherence_factor(params: CompassParams, coupling: CouplingSpec, t,
                             pair: tuple[int, int] = (1, 4)):
    """Complex ``<psi| exp(i H(h_mu) t) exp(-i H(h_nu) t) |psi>``.

    Scalar ``t`` returns a complex number, array ``t`` an array.
    """
    nu, mu = pair
    _, psi, _ = exact_ground_state(params)
    U_nu = _Evolver(build_spin_hamiltonian(params, coupling.shift(nu)))
    U_mu = _Evolver(build_spin_hamiltonian(params, coupling.shift(mu)))
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.array([np.vdot(U_mu(psi, tt), U_nu(psi, tt)) for tt in ts])
    return complex(out[0]) if np.ndim(t) == 0 else out


def exact_reduced_density(params: CompassParams, coupling: CouplingSpec, initial, t) -> np.ndarray:
    """Two-qubit state at time ``t`` from the full qubits-plus-chain evolution.

    ``initial`` is a 4x4 density matrix or any object with a ``matrix()``
    method (e.g. :class:`compass_echo.measures.InitialXState`).
    """
    N = params.N
    _check_size(N, MAX_SITES_WITH_QUBITS)
    rho_ab = np.asarray(initial.matrix() if hasattr(initial, "matrix") else initial, dtype=complex)
    _, psi, _ = exact_ground_state(params)
    H = full_hamiltonian(params, coupling)
    rho0 = np.kron(rho_ab, np.outer(psi, psi.conj()))
    if t == 0:
        rho_t = rho0
    else:
        E, P = np.linalg.eigh(H)
        U = (P * np.exp(-1j * E * t)[None, :]) @ P.conj().T
        rho_t = U @ rho0 @ U.conj().T
    d = 2 ** N
    return np.einsum("aibi->ab", rho_t.reshape(4, d, 4, d))


def full_hamiltonian(params: CompassParams, coupling: CouplingSpec) -> np.ndarray:
    """``I_AB (x) H_E + (g/2)(sz_A + sz_B) (x) sum_j sz_j`` on 4 * 2^N states."""
    N = params.N
    _check_size(N, MAX_SITES_WITH_QUBITS)
    HE = build_spin_hamiltonian(params)
    szab = np.kron(SZ, I2) + np.kron(I2, SZ)
    return np.kron(np.eye(4), HE) + 0.5 * coupling.g * np.kron(szab, magnetization(N))


def central_charge_operator(N: int) -> np.ndarray:
    """``(sz_A + sz_B) (x) 1`` on the full space."""
    szab = np.kron(SZ, I2) + np.kron(I2, SZ)
    return np.kron(szab, np.eye(2 ** N))


def jw_annihilators(N: int) -> list[np.ndarray]:
    """Dense Jordan-Wigner fermions ``c_j = prod_{l<j}(-sz_l) sigma^-_j``."""
    _check_size(N)
    ops = []
    for j in range(N):
        factors = [-SZ] * j + [SPLUS.T] + [I2] * (N - j - 1)
        ops.append(reduce(np.kron, factors))
    return ops


def exact_two_point(psi: np.ndarray, N: int):
    """``(<c_i^dag c_j>, <c_i c_j>)`` of a dense state."""
    cs = jw_annihilators(N)
    cpsi = [c @ psi for c in cs]
    C = np.array([[np.vdot(a, b) for b in cpsi] for a in cpsi])
    cdpsi = [c.conj().T @ psi for c in cs]
    F = np.array([[np.vdot(cdpsi[i], cpsi[j]) for j in range(N)] for i in range(N)])
    return C, F


def write_golden(path, records) -> None:
    Path(path).write_text(json.dumps(records, indent=2, sort_keys=True) + "\n")


def golden_record(params: CompassParams, coupling: CouplingSpec, t: float) -> dict:
    F = exact_decoherence_factor(params, coupling, t)
    return {
        "params": {"J_o": params.J_o, "J_e": params.J_e, "theta": params.theta,
                   "h": params.h, "N": params.N, "boundary": params.boundary.value},
        "coupling": {"g": coupling.g},
        "t": t,
        "re": F.real,
        "im": F.imag,
    }


def load_golden(path) -> list[tuple[CompassParams, CouplingSpec, float, complex]]:
    out = []
    for rec in json.loads(Path(path).read_text()):
        p = CompassParams(**rec["params"])
        out.append((p, CouplingSpec(rec["coupling"]["g"]), rec["t"], complex(rec["re"], rec["im"])))
    return out
