"""Cycle-repetition fidelity estimation with coherent/incoherent error budgeting.

Repeat a cycle circuit n times between 2-design state preparation and
reference-unitary inversion; fit the fidelity decay over n to separate
coherent from incoherent error. Includes the dynamical-decoupling variant
(DECAF), a single-CZ arbitrary-state-preparation compiler, and an
interleaved-RB comparison harness.
"""

from .analysis import (
    CzModelParams,
    ErrorBudget,
    FitResult,
    budget,
    fit,
    fit_group,
    model_1q,
    model_cz,
    model_general,
    model_quadratic,
    unitarity_relations,
)
from .channels import (
    KrausChannel,
    NoiseSpec,
    amp_phase_damping,
    avg_gate_fidelity,
    compose,
    depolarizing,
    identity_channel,
    tensor,
    unitary_channel,
)
from .protocol import (
    CafeDataset,
    CycleSpec,
    GroupSpec,
    Layer,
    RunConfig,
    build_cafe,
    run_cafe,
    run_parallel_groups,
    with_xx_interleave,
)
from .stateprep import PrepCircuit, measure_gadget, prep_1q, prep_with_cz
from .twodesign import StateEnsemble, design_2q, frame_potential, sic_1q, verify_2design
from .unitaries import CZ, FsimDelta, FsimParams, XDelta, fsim, fsim_delta, x_delta

__all__ = [
    "CzModelParams",
    "ErrorBudget",
    "FitResult",
    "budget",
    "fit",
    "fit_group",
    "model_1q",
    "model_cz",
    "model_general",
    "model_quadratic",
    "unitarity_relations",
    "KrausChannel",
    "NoiseSpec",
    "amp_phase_damping",
    "avg_gate_fidelity",
    "compose",
    "depolarizing",
    "identity_channel",
    "tensor",
    "unitary_channel",
    "CafeDataset",
    "CycleSpec",
    "GroupSpec",
    "Layer",
    "RunConfig",
    "build_cafe",
    "run_cafe",
    "run_parallel_groups",
    "with_xx_interleave",
    "PrepCircuit",
    "measure_gadget",
    "prep_1q",
    "prep_with_cz",
    "StateEnsemble",
    "design_2q",
    "frame_potential",
    "sic_1q",
    "verify_2design",
    "CZ",
    "FsimDelta",
    "FsimParams",
    "XDelta",
    "fsim",
    "fsim_delta",
    "x_delta",
]

__version__ = "0.1.0"
