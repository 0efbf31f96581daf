"""Compile arbitrary two-qubit pure states into circuits with exactly one CZ.

The route: write the target amplitudes as a 2x2 matrix M (rows indexed by
qubit 1), take its SVD to read off the entanglement, prepare a state with the
matching Schmidt spectrum using H on qubit 1, Ry(alpha) on qubit 2 and one
CZ, then rotate into place with single-qubit corrections. The measurement
gadget is the exact adjoint circuit: applied to the target it returns |00>.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .qcore import dagger, kron, svd_2x2
from .unitaries import CZ, H, ry

__all__ = ["PrepCircuit", "prep_with_cz", "measure_gadget", "prep_1q"]


@dataclass(frozen=True)
class PrepCircuit:
    """Single-entangler two-qubit circuit: 1q layer, one CZ, 1q layer."""

    pre_q1: np.ndarray
    pre_q2: np.ndarray
    post_q1: np.ndarray
    post_q2: np.ndarray

    @property
    def entangler_count(self) -> int:
        return 1

    def unitary(self) -> np.ndarray:
        """Full 4x4 unitary with an ideal CZ as the entangler."""
        return kron(self.post_q1, self.post_q2) @ CZ @ kron(self.pre_q1, self.pre_q2)

    def inverse(self) -> "PrepCircuit":
        """The adjoint circuit, with the same one-CZ structure."""
        return PrepCircuit(
            pre_q1=dagger(self.post_q1),
            pre_q2=dagger(self.post_q2),
            post_q1=dagger(self.pre_q1),
            post_q2=dagger(self.pre_q2),
        )


def _amplitude_matrix(state: np.ndarray) -> np.ndarray:
    # Row index = qubit 1 (most significant), column index = qubit 2.
    return state.reshape(2, 2)


def prep_with_cz(target: np.ndarray) -> PrepCircuit:
    """Compile a circuit mapping |00> to the target state with a single CZ.

    Local unitaries act on the amplitude matrix as M -> u1 M u2^T, which
    fixes how the SVD correction factors are applied.
    """
    target = np.asarray(target, dtype=np.complex128).ravel()
    if target.size != 4:
        raise ValueError("prep_with_cz expects a two-qubit state (4 amplitudes)")
    if abs(np.linalg.norm(target) - 1.0) > 1e-10:
        raise ValueError("target state must be normalized")

    m_psi = _amplitude_matrix(target)
    u_psi, s_psi, v_psi = svd_2x2(m_psi)
    # Descending singular values with s0^2 + s1^2 = 1 put s0 in [1/sqrt(2), 1],
    # hence alpha in [0, pi/2].
    alpha = 2.0 * np.arccos(np.clip(s_psi[0], 0.0, 1.0))

    pre_q1 = H
    pre_q2 = ry(alpha)
    intermediate = CZ @ kron(pre_q1, pre_q2) @ np.array([1, 0, 0, 0], dtype=np.complex128)
    u_cz, _, v_cz = svd_2x2(_amplitude_matrix(intermediate))

    post_q1 = u_psi @ dagger(u_cz)
    post_q2 = np.conj(v_psi @ dagger(v_cz))
    return PrepCircuit(pre_q1=pre_q1, pre_q2=pre_q2, post_q1=post_q1, post_q2=post_q2)


def measure_gadget(target: np.ndarray) -> PrepCircuit:
    """Circuit mapping the target state to |00>: the adjoint of its prep circuit."""
    return prep_with_cz(target).inverse()


def prep_1q(target: np.ndarray) -> np.ndarray:
    """Single-qubit unitary with the target state as its first column."""
    target = np.asarray(target, dtype=np.complex128).ravel()
    if target.size != 2:
        raise ValueError("prep_1q expects a single-qubit state")
    if abs(np.linalg.norm(target) - 1.0) > 1e-10:
        raise ValueError("target state must be normalized")
    a, b = target
    return np.array([[a, -np.conj(b)], [b, np.conj(a)]], dtype=np.complex128)
