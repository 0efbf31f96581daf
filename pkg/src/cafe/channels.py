"""Kraus-operator quantum channels and exact average gate fidelity.

Channels act on density matrices directly (dim <= 4); no superoperator
assembly is needed at this scale. Every constructor verifies trace
preservation sum_a K_a^dag K_a = I to 1e-10.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .qcore import dagger, kron
from .unitaries import I2, X, Y, Z

TP_ATOL = 1e-10

__all__ = [
    "KrausChannel",
    "NoiseSpec",
    "identity_channel",
    "unitary_channel",
    "depolarizing",
    "amp_phase_damping",
    "tensor",
    "compose",
    "avg_gate_fidelity",
]

_PAULIS_1Q = (I2, X, Y, Z)


def _nontrivial_paulis(num_qubits: int) -> list[np.ndarray]:
    """All tensor products of I, X, Y, Z except the identity."""
    out = []
    for combo in itertools.product(range(4), repeat=num_qubits):
        if all(k == 0 for k in combo):
            continue
        m = _PAULIS_1Q[combo[0]]
        for k in combo[1:]:
            m = kron(m, _PAULIS_1Q[k])
        out.append(m)
    return out


@dataclass(frozen=True)
class KrausChannel:
    """Completely positive trace-preserving map given by Kraus operators."""

    dim: int
    kraus: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        for k in self.kraus:
            if k.shape != (self.dim, self.dim):
                raise ValueError(f"Kraus operator shape {k.shape} != ({self.dim}, {self.dim})")
        acc = sum(dagger(k) @ k for k in self.kraus)
        if np.abs(acc - np.eye(self.dim)).max() > TP_ATOL:
            raise ValueError("channel is not trace preserving")

    def apply(self, rho: np.ndarray) -> np.ndarray:
        """sum_a K_a rho K_a^dag."""
        out = np.zeros_like(rho)
        for k in self.kraus:
            out += k @ rho @ dagger(k)
        return out


def identity_channel(dim: int) -> KrausChannel:
    return KrausChannel(dim, (np.eye(dim, dtype=np.complex128),))


def unitary_channel(u: np.ndarray) -> KrausChannel:
    u = np.asarray(u, dtype=np.complex128)
    if np.abs(dagger(u) @ u - np.eye(u.shape[0])).max() > TP_ATOL:
        raise ValueError("unitary_channel requires a unitary matrix")
    return KrausChannel(u.shape[0], (u,))


def depolarizing(p: float, d: int) -> KrausChannel:
    """Channel mapping rho to (1-p) rho + p I/d.

    Kraus form is the uniform Pauli mixture: identity weight
    sqrt(1 - p (d^2-1)/d^2), each non-identity Pauli weight sqrt(p)/d.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"depolarizing probability {p} outside [0, 1]")
    if d not in (2, 4):
        raise ValueError("depolarizing supports 1 or 2 qubits (d = 2 or 4)")
    num_qubits = 1 if d == 2 else 2
    d2 = d * d
    ops = [np.sqrt(1.0 - p * (d2 - 1) / d2) * np.eye(d, dtype=np.complex128)]
    if p > 0.0:
        w = np.sqrt(p) / d
        ops.extend(w * pauli for pauli in _nontrivial_paulis(num_qubits))
    return KrausChannel(d, tuple(ops))


def amp_phase_damping(p_decay: float, p_phaseflip: float) -> KrausChannel:
    """Single-qubit amplitude damping followed by a phase flip.

    Amplitude damping decays |1> to |0> with probability ``p_decay``; the
    phase-flip part applies Z with probability ``p_phaseflip``. The two
    processes do not commute exactly, so the order (amplitude first) is part
    of the contract.
    """
    for name, p in (("p_decay", p_decay), ("p_phaseflip", p_phaseflip)):
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"{name}={p} outside [0, 1]")
    a0 = np.array([[1, 0], [0, np.sqrt(1 - p_decay)]], dtype=np.complex128)
    a1 = np.array([[0, np.sqrt(p_decay)], [0, 0]], dtype=np.complex128)
    amp = KrausChannel(2, (a0, a1) if p_decay > 0 else (a0,))
    if p_phaseflip == 0.0:
        return amp
    phase = KrausChannel(2, (np.sqrt(1 - p_phaseflip) * I2, np.sqrt(p_phaseflip) * Z))
    return compose(amp, phase)


def tensor(a: KrausChannel, b: KrausChannel) -> KrausChannel:
    """Joint channel with ``a`` on the most significant subsystem."""
    ops = tuple(kron(ka, kb) for ka in a.kraus for kb in b.kraus)
    return KrausChannel(a.dim * b.dim, ops)


def compose(first: KrausChannel, second: KrausChannel) -> KrausChannel:
    """Channel applying ``first`` then ``second``."""
    if first.dim != second.dim:
        raise ValueError(f"dimension mismatch: {first.dim} vs {second.dim}")
    ops = []
    for k2 in second.kraus:
        for k1 in first.kraus:
            k = k2 @ k1
            if np.abs(k).max() > 0.0:
                ops.append(k)
    return KrausChannel(first.dim, tuple(ops))


def avg_gate_fidelity(e: KrausChannel, u: np.ndarray) -> float:
    """Exact average gate fidelity of channel ``e`` against unitary ``u``.

    F = 1/(d+1) + sum_a |tr(u^dag K_a)|^2 / (d (d+1)).

    This is the ground-truth oracle for all budget validation.
    """
    u = np.asarray(u, dtype=np.complex128)
    d = e.dim
    if u.shape != (d, d):
        raise ValueError(f"unitary shape {u.shape} incompatible with channel dim {d}")
    total = sum(abs(np.trace(dagger(u) @ k)) ** 2 for k in e.kraus)
    return float(1.0 / (d + 1) + total / (d * (d + 1)))


@dataclass(frozen=True)
class NoiseSpec:
    """Declarative noise model attached to cycle layers.

    ``p_depol`` adds a whole-group depolarizing channel; ``damping`` holds
    per-qubit (p_decay, p_phaseflip) pairs. ``attach`` selects which layers
    the channel follows: "cz" (two-qubit layers only, the default) or "all".
    """

    p_depol: float = 0.0
    damping: tuple[tuple[float, float], ...] = field(default_factory=tuple)
    attach: str = "cz"

    def __post_init__(self) -> None:
        if not 0.0 <= self.p_depol <= 1.0:
            raise ValueError(f"p_depol={self.p_depol} outside [0, 1]")
        for pd, pf in self.damping:
            if not (0.0 <= pd <= 1.0 and 0.0 <= pf <= 1.0):
                raise ValueError("damping probabilities must lie in [0, 1]")
        if self.attach not in ("cz", "all", "none"):
            raise ValueError(f"unknown attach point {self.attach!r}")

    def channel(self, dim: int) -> KrausChannel | None:
        """Build the Kraus channel for a layer of the given dimension, or None if trivial."""
        parts: list[KrausChannel] = []
        if self.damping:
            num_qubits = 1 if dim == 2 else 2
            if len(self.damping) != num_qubits:
                raise ValueError(
                    f"{len(self.damping)} damping pairs for {num_qubits} qubit(s)"
                )
            per_qubit = [amp_phase_damping(pd, pf) for pd, pf in self.damping]
            if any(len(ch.kraus) > 1 for ch in per_qubit):
                joint = per_qubit[0]
                for ch in per_qubit[1:]:
                    joint = tensor(joint, ch)
                parts.append(joint)
        if self.p_depol > 0.0:
            parts.append(depolarizing(self.p_depol, dim))
        if not parts:
            return None
        out = parts[0]
        for ch in parts[1:]:
            out = compose(out, ch)
        return out

    @staticmethod
    def from_dict(doc: dict) -> "NoiseSpec":
        damping = tuple(tuple(pair) for pair in doc.get("damping", ()))
        return NoiseSpec(
            p_depol=float(doc.get("p_depol", 0.0)),
            damping=damping,
            attach=doc.get("attach", "cz"),
        )
