"""Loschmidt-echo decoherence of two qubits coupled to a quantum compass chain."""

__version__ = "0.1.0"

from .model import Boundary, CompassParams, build_bdg, dispersion, spectral_gap  # noqa: E402
from .fermion_engine import CouplingSpec, EchoSeries, decoherence_factor  # noqa: E402
from .measures import BELL, InitialXState, XState, assemble_xstate  # noqa: E402

__all__ = [
    "Boundary",
    "CompassParams",
    "build_bdg",
    "dispersion",
    "spectral_gap",
    "CouplingSpec",
    "EchoSeries",
    "decoherence_factor",
    "BELL",
    "InitialXState",
    "XState",
    "assemble_xstate",
]
