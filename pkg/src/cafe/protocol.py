"""Build and execute cycle-repetition fidelity experiments (CAFE and DECAF).

A run prepares each 2-design state, repeats the noisy cycle circuit n times
(optionally followed by dynamical-decoupling interleave gates), applies the
inversion derived from the reference unitary, and records the probability of
measuring all zeros. Averaging that probability over the ensemble estimates
the fidelity of n cycles against the n-th power of the reference.

Circuits for distinct (group, state, depth) tuples are independent; sampled
runs derive one RNG stream per tuple from (seed, group, state, depth), so
results do not depend on execution order.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field, replace

import numpy as np

from . import stateprep
from .channels import KrausChannel
from .qcore import dagger, kron
from .twodesign import StateEnsemble, design_2q, sic_1q
from .unitaries import CZ, XX

__all__ = [
    "Layer",
    "GroupSpec",
    "CycleSpec",
    "RunConfig",
    "CircuitOp",
    "CafeCircuit",
    "GroupResult",
    "CafeDataset",
    "survival_00",
    "reference_cycle",
    "with_xx_interleave",
    "build_cafe",
    "run",
    "run_cafe",
    "run_parallel_groups",
]

_SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class Layer:
    """One layer of a cycle: an ideal unitary, its noisy realization, and optional noise."""

    label: str
    ideal: np.ndarray
    actual: np.ndarray | None = None
    channel: KrausChannel | None = None

    @property
    def realized(self) -> np.ndarray:
        return self.ideal if self.actual is None else self.actual

    @property
    def dim(self) -> int:
        return self.ideal.shape[0]


@dataclass(frozen=True)
class GroupSpec:
    """An independent qubit group (m = 1 or 2) with its cycle layers.

    ``interleave`` holds gates appended after each cycle repetition (DD
    pulses); they become part of the reference. ``cz_impl`` is the noisy CZ
    realization used for prep/measure entanglers when the run asks for
    realistic SPAM. ``reference`` overrides the ideal-product reference
    unitary of one cycle.
    """

    m: int
    layers: tuple[Layer, ...]
    interleave: tuple[Layer, ...] = ()
    cz_impl: Layer | None = None
    reference: np.ndarray | None = None
    label: str = ""

    def __post_init__(self) -> None:
        if self.m not in (1, 2):
            raise ValueError("groups must have m = 1 or 2 qubits")
        if not self.layers:
            raise ValueError("a cycle needs at least one layer")
        d = 2**self.m
        for layer in (*self.layers, *self.interleave):
            if layer.ideal.shape != (d, d):
                raise ValueError(f"layer {layer.label!r} has wrong dimension for m={self.m}")

    @property
    def dim(self) -> int:
        return 2**self.m


@dataclass(frozen=True)
class CycleSpec:
    groups: tuple[GroupSpec, ...]

    def __post_init__(self) -> None:
        if not self.groups:
            raise ValueError("CycleSpec needs at least one group")


@dataclass(frozen=True)
class RunConfig:
    """Execution settings shared by all groups.

    ``shots=None`` computes exact probabilities (sigma = 0); an integer draws
    binomial outcomes reproducibly from ``seed``. ``inversion`` selects the
    compiled single-CZ measurement gadget or the abstract exact inverse;
    ``noisy_spam`` substitutes each group's ``cz_impl`` (when present) for the
    prep/measure entanglers. ``stream`` namespaces the RNG for callers running
    many configs off one seed.
    """

    depths: tuple[int, ...] = (0, 2, 4, 6, 8)
    shots: int | None = None
    seed: int = 0
    inversion: str = "gadget"
    noisy_spam: bool = True
    stream: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if list(self.depths) != sorted(set(self.depths)):
            raise ValueError("depths must be sorted and distinct")
        if any(n < 0 for n in self.depths):
            raise ValueError("depths must be non-negative")
        if self.shots is not None and self.shots <= 0:
            raise ValueError("shots must be positive (or None for exact mode)")
        if self.inversion not in ("gadget", "exact"):
            raise ValueError("inversion must be 'gadget' or 'exact'")


@dataclass(frozen=True)
class CircuitOp:
    unitary: np.ndarray
    channel: KrausChannel | None = None


@dataclass(frozen=True)
class CafeCircuit:
    group_index: int
    state_index: int
    depth: int
    dim: int
    ops: tuple[CircuitOp, ...]


@dataclass(frozen=True)
class GroupResult:
    """Per-depth fidelity estimates for one qubit group."""

    label: str
    m: int
    variant: str
    ensemble_label: str
    depths: tuple[int, ...]
    f_hat: tuple[float, ...]
    sigma: tuple[float, ...]
    probs: tuple[tuple[float, ...], ...]  # per depth, per ensemble state


@dataclass(frozen=True)
class CafeDataset:
    groups: tuple[GroupResult, ...]
    shots: int | None
    seed: int

    def group(self, index: int = 0) -> GroupResult:
        return self.groups[index]

    def to_json(self) -> str:
        doc = {
            "shots": self.shots,
            "seed": self.seed,
            "groups": [
                {
                    "label": g.label,
                    "m": g.m,
                    "variant": g.variant,
                    "ensemble": g.ensemble_label,
                    "depths": list(g.depths),
                    "f_hat": list(g.f_hat),
                    "sigma": list(g.sigma),
                    "probs": [list(row) for row in g.probs],
                }
                for g in self.groups
            ],
        }
        return json.dumps(doc, indent=2, sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["group", "variant", "n", "f_hat", "sigma", "shots", "seed"])
        shots = "" if self.shots is None else self.shots
        for gi, g in enumerate(self.groups):
            name = g.label or str(gi)
            for n, f, s in zip(g.depths, g.f_hat, g.sigma):
                writer.writerow([name, g.variant, n, repr(f), repr(s), shots, self.seed])
        return buf.getvalue()


# ---------------------------------------------------------------------------
# Circuit assembly


def _product(mats) -> np.ndarray:
    """Unitary of gates applied in list order (first gate acts first)."""
    out = None
    for m in mats:
        out = m.copy() if out is None else m @ out
    return out


def reference_cycle(group: GroupSpec) -> np.ndarray:
    """Ideal unitary of one cycle, interleave gates included."""
    if group.reference is not None:
        return group.reference
    return _product([layer.ideal for layer in (*group.layers, *group.interleave)])


def with_xx_interleave(group: GroupSpec) -> GroupSpec:
    """DECAF variant of a two-qubit group: X on both qubits after each cycle."""
    if group.m != 2:
        raise ValueError("X-X interleaving applies to two-qubit groups")
    return replace(group, interleave=group.interleave + (Layer("xx", XX),))


def _entangler_op(group: GroupSpec, cfg: RunConfig) -> CircuitOp:
    if cfg.noisy_spam and group.cz_impl is not None:
        return CircuitOp(group.cz_impl.realized, group.cz_impl.channel)
    return CircuitOp(CZ)


def _gadget_ops(circuit: stateprep.PrepCircuit, group: GroupSpec, cfg: RunConfig) -> list[CircuitOp]:
    return [
        CircuitOp(kron(circuit.pre_q1, circuit.pre_q2)),
        _entangler_op(group, cfg),
        CircuitOp(kron(circuit.post_q1, circuit.post_q2)),
    ]


def build_group_circuits(
    group_index: int, group: GroupSpec, cfg: RunConfig, ensemble: StateEnsemble
) -> list[CafeCircuit]:
    if ensemble.m != group.m:
        raise ValueError(f"ensemble m={ensemble.m} does not match group m={group.m}")
    ref = reference_cycle(group)
    cycle_ops = tuple(
        CircuitOp(layer.realized, layer.channel) for layer in (*group.layers, *group.interleave)
    )
    circuits = []
    for i, psi in enumerate(ensemble.states):
        if group.m == 1:
            prep_u = stateprep.prep_1q(psi)
            prep_ops = [CircuitOp(prep_u)]
        elif cfg.inversion == "exact":
            prep_u = stateprep.prep_with_cz(psi).unitary()
            prep_ops = [CircuitOp(prep_u)]
        else:
            prep_circuit = stateprep.prep_with_cz(psi)
            prep_u = prep_circuit.unitary()
            prep_ops = _gadget_ops(prep_circuit, group, cfg)
        for n in cfg.depths:
            ops = list(prep_ops)
            for _ in range(n):
                ops.extend(cycle_ops)
            ref_n = np.linalg.matrix_power(ref, n)
            if group.m == 1 or cfg.inversion == "exact":
                ops.append(CircuitOp(dagger(ref_n @ prep_u)))
            else:
                predicted = ref_n @ psi
                ops.extend(_gadget_ops(stateprep.measure_gadget(predicted), group, cfg))
            circuits.append(
                CafeCircuit(
                    group_index=group_index,
                    state_index=i,
                    depth=n,
                    dim=group.dim,
                    ops=tuple(ops),
                )
            )
    return circuits


def build_cafe(
    cycle: CycleSpec, cfg: RunConfig, ensembles=None
) -> list[CafeCircuit]:
    """All executable circuits for every (group, state, depth) tuple."""
    circuits = []
    for gi, group in enumerate(cycle.groups):
        circuits.extend(build_group_circuits(gi, group, cfg, _ensemble_for(group, ensembles, gi)))
    return circuits


def _ensemble_for(group: GroupSpec, ensembles, gi: int) -> StateEnsemble:
    if ensembles is None:
        return sic_1q() if group.m == 1 else design_2q()
    if isinstance(ensembles, StateEnsemble):
        return ensembles
    return ensembles[gi]


# ---------------------------------------------------------------------------
# Execution


def survival_00(ops, dim: int) -> float:
    """Probability of the all-zeros outcome after the op sequence, by density-matrix evolution."""
    rho = np.zeros((dim, dim), dtype=np.complex128)
    rho[0, 0] = 1.0
    for op in ops:
        u = op.unitary
        rho = u @ rho @ dagger(u)
        if op.channel is not None:
            rho = op.channel.apply(rho)
    return float(min(max(rho[0, 0].real, 0.0), 1.0))


def run(circuits, cycle: CycleSpec, cfg: RunConfig, ensembles=None) -> CafeDataset:
    """Execute circuits and aggregate per-group, per-depth fidelity estimates."""
    probs: dict[tuple[int, int], dict[int, float]] = {}
    for c in circuits:
        probs.setdefault((c.group_index, c.depth), {})[c.state_index] = survival_00(c.ops, c.dim)

    groups = []
    for gi, group in enumerate(cycle.groups):
        ensemble = _ensemble_for(group, ensembles, gi)
        n_states = len(ensemble.states)
        f_hat, sigma, prob_rows = [], [], []
        for n in cfg.depths:
            row = probs[(gi, n)]
            p_exact = np.array([row[i] for i in range(n_states)])
            if cfg.shots is None:
                estimates = p_exact
                sig = 0.0
            else:
                estimates = np.empty(n_states)
                for i, p in enumerate(p_exact):
                    rng = np.random.default_rng(
                        np.random.SeedSequence(
                            [cfg.seed & _SEED_MASK, *cfg.stream, gi, i, n]
                        )
                    )
                    estimates[i] = rng.binomial(cfg.shots, p) / cfg.shots
                sig = float(np.sqrt(np.sum(estimates * (1 - estimates)) / cfg.shots) / n_states)
            f_hat.append(float(estimates.mean()))
            sigma.append(sig)
            prob_rows.append(tuple(float(v) for v in estimates))
        groups.append(
            GroupResult(
                label=group.label or f"g{gi}",
                m=group.m,
                variant="DECAF" if group.interleave else "CAFE",
                ensemble_label=ensemble.label,
                depths=tuple(cfg.depths),
                f_hat=tuple(f_hat),
                sigma=tuple(sigma),
                probs=tuple(prob_rows),
            )
        )
    return CafeDataset(groups=tuple(groups), shots=cfg.shots, seed=cfg.seed)


def run_cafe(cycle: CycleSpec, cfg: RunConfig, ensembles=None) -> CafeDataset:
    """Build and execute a CAFE/DECAF experiment in one call."""
    return run(build_cafe(cycle, cfg, ensembles), cycle, cfg, ensembles)


def run_parallel_groups(cycle: CycleSpec, cfg: RunConfig, ensembles=None) -> CafeDataset:
    """Independent CAFE runs for every group, sharing depths and the seed stream."""
    return run_cafe(cycle, cfg, ensembles)
