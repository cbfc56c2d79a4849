"""Self-check suite behind ``compass-echo validate``.

Small chains only (N <= 8), so the whole run takes a few seconds.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import oracle
from .fermion_engine import (CouplingSpec, DegeneracyWarning, decoherence_factor,
                             ground_state)
from .measures import BELL, XState, assemble_xstate, concurrence, wootters_concurrence
from .model import Boundary, CompassParams, build_bdg, dispersion_grid

__all__ = ["Check", "Report", "run_validation"]


@dataclass(frozen=True)
class Check:
    name: str
    tolerance: float
    observed: float

    @property
    def ok(self) -> bool:
        return bool(np.isfinite(self.observed) and self.observed < self.tolerance)


@dataclass
class Report:
    checks: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def text(self) -> str:
        w = max(len(c.name) for c in self.checks)
        lines = [f"{'check':<{w}}  {'tolerance':>9}  {'observed':>9}  result"]
        for c in self.checks:
            lines.append(f"{c.name:<{w}}  {c.tolerance:9.1e}  {c.observed:9.2e}  "
                         f"{'PASS' if c.ok else 'FAIL'}")
        n_bad = sum(not c.ok for c in self.checks)
        lines.append("all checks passed" if n_bad == 0 else f"{n_bad} check(s) FAILED")
        return "\n".join(lines)


def _oracle_echo_error(rng, sizes=(4, 6, 8), draws=3):
    t = np.linspace(0.0, 5.0, 20)
    worst = 0.0
    for N in sizes:
        for _ in range(draws):
            p = CompassParams(1.0, rng.uniform(1, 5), rng.uniform(0, np.pi), rng.uniform(0, 1),
                              N, Boundary.OPEN)
            c = CouplingSpec(rng.uniform(0.05, 0.5))
            a = decoherence_factor(p, c, t, method="realspace").values
            b = np.abs(oracle.exact_decoherence_factor(p, c, t))
            worst = max(worst, float(np.max(np.abs(a - b))))
    return worst


def run_validation(seed: int = 2024) -> Report:
    rng = np.random.default_rng(seed)
    rep = Report()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegeneracyWarning)

        rep.checks.append(Check("engine vs dense |F14|, open N=4,6,8", 1e-7, _oracle_echo_error(rng)))

        cp = CompassParams(1.0, 4.0, np.pi / 2, 0.0, 8, Boundary.OPEN)
        t = np.array([0.5, 1.0, 2.0])
        err = np.max(np.abs(decoherence_factor(cp, CouplingSpec(0.1), t).values
                            - np.abs(oracle.exact_decoherence_factor(cp, CouplingSpec(0.1), t))))
        rep.checks.append(Check("engine vs dense at degenerate point, N=8", 1e-7, float(err)))

        pp = CompassParams(1.0, 2.5, 1.1, 0.3, 8, Boundary.PERIODIC)
        tt = np.linspace(0, 5, 11)
        a = decoherence_factor(pp, CouplingSpec(0.2), tt, method="momentum").values
        b = decoherence_factor(pp, CouplingSpec(0.2), tt, method="realspace").values
        d = np.abs(oracle.exact_decoherence_factor(pp, CouplingSpec(0.2), tt))
        rep.checks.append(Check("momentum vs real-space engine, ring N=8", 1e-10, float(np.max(np.abs(a - b)))))
        rep.checks.append(Check("momentum engine vs dense even sector, ring N=8", 1e-7,
                                float(np.max(np.abs(a - d)))))

        worst = 0.0
        for _ in range(3):
            p = CompassParams(1.0, rng.uniform(1, 5), rng.uniform(0, np.pi), rng.uniform(0, 1), 64)
            ev = np.linalg.eigvalsh(build_bdg(p).matrix)
            _, Eq, Ep = dispersion_grid(p)
            worst = max(worst, float(np.max(np.abs(np.sort(ev[ev.size // 2:]) - np.sort(np.r_[Eq, Ep])))))
        rep.checks.append(Check("BdG spectrum vs dispersion, ring N=64", 1e-10, worst))

        s = ground_state(build_bdg(cp))
        rep.checks.append(Check("Bogoliubov constraints at degenerate point", 1e-10, max(s.constraint_errors())))

        small = CompassParams(1.0, 3.0, 0.4 * np.pi, 0.2, 6, Boundary.OPEN)
        c = CouplingSpec(0.3)
        worst = 0.0
        for tt in (0.5, 1.0, 2.0):
            rho = oracle.exact_reduced_density(small, c, BELL, tt)
            F = oracle.exact_decoherence_factor(small, c, tt)
            worst = max(worst, float(np.max(np.abs(rho - assemble_xstate(BELL, F, 1.0).matrix()))))
        rep.checks.append(Check("reduced density vs X-state assembly, N=6", 1e-7, worst))

        worst = 0.0
        for _ in range(1000):
            cz = rng.uniform(-1, 1)
            x = XState(cz, rng.uniform(0, 1 + cz) * np.exp(2j * np.pi * rng.random()),
                       rng.uniform(0, 1 - cz) * np.exp(2j * np.pi * rng.random()))
            worst = max(worst, abs(concurrence(x) - wootters_concurrence(x.matrix())))
        rep.checks.append(Check("closed-form vs Wootters concurrence", 1e-10, worst))

        g0 = decoherence_factor(small, CouplingSpec(0.0), np.linspace(0, 5, 6)).values
        rep.checks.append(Check("g=0 leaves |F14| = 1", 1e-12, float(np.max(np.abs(g0 - 1)))))
    return rep
