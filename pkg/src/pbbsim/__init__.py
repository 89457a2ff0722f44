"""Photon-blockade breakdown in a driven, damped qubit-cavity system.

Classical steady states (semiclassical and neoclassical), quantum-jump
trajectories with a master-equation reference, telegraph segmentation of
the photon-number signal, and a coherent dressed-ladder model of the
bright state.
"""

__version__ = "0.1.0"

from .model import PureState, SystemParams, TruncationError, expectations
from .classical import (
    RootSet,
    intuitive_critical_eta,
    intuitive_photon_number,
    maxwell_bloch_integrate,
    neoclassical_roots,
    semiclassical_roots,
    trace_boundary,
)
from .mcwf import evolve_trajectory, master_equation_evolve, run_ensemble
from .telegraph import SegmentationSettings, segment, summarize
from .bright import ansatz_mutual_information, ansatz_pseudospin, build
from .config import RunConfig, emit_config, parse_config

__all__ = [
    "__version__",
    "PureState",
    "SystemParams",
    "TruncationError",
    "expectations",
    "RootSet",
    "intuitive_critical_eta",
    "intuitive_photon_number",
    "maxwell_bloch_integrate",
    "neoclassical_roots",
    "semiclassical_roots",
    "trace_boundary",
    "evolve_trajectory",
    "master_equation_evolve",
    "run_ensemble",
    "SegmentationSettings",
    "segment",
    "summarize",
    "ansatz_mutual_information",
    "ansatz_pseudospin",
    "build",
    "RunConfig",
    "emit_config",
    "parse_config",
]
