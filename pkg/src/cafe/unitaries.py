"""Gate matrices: fixed gates plus the parametrized families under characterization.

The two-qubit gates follow the basis convention fixed in :mod:`cafe.qcore`.
Global phases of the parametrized families are kept exactly as defined (no
re-normalization) so trace formulas in :mod:`cafe.analysis` apply verbatim.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .qcore import kron

__all__ = [
    "FsimParams",
    "FsimDelta",
    "XDelta",
    "I2",
    "X",
    "Y",
    "Z",
    "H",
    "S",
    "CZ",
    "XX",
    "rx",
    "ry",
    "rz",
    "fsim",
    "fsim_delta",
    "x_delta",
]

I2 = np.eye(2, dtype=np.complex128)
X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
H = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2.0)
S = np.array([[1, 0], [0, 1j]], dtype=np.complex128)
CZ = np.diag([1, 1, 1, -1]).astype(np.complex128)
XX = kron(X, X)


def rx(angle: float) -> np.ndarray:
    """exp(-i angle X / 2)."""
    c, s = np.cos(angle / 2), np.sin(angle / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=np.complex128)


def ry(angle: float) -> np.ndarray:
    """exp(-i angle Y / 2)."""
    c, s = np.cos(angle / 2), np.sin(angle / 2)
    return np.array([[c, -s], [s, c]], dtype=np.complex128)


def rz(angle: float) -> np.ndarray:
    """exp(-i angle Z / 2)."""
    return np.array([[np.exp(-0.5j * angle), 0], [0, np.exp(0.5j * angle)]], dtype=np.complex128)


@dataclass(frozen=True)
class FsimParams:
    """Five angles of a general excitation-preserving two-qubit gate.

    All angles in radians; the zero point is CZ. theta is the swap angle,
    zeta the differential single-qubit phase, chi the swap phase, gamma the
    common single-qubit phase, and phi the controlled phase.
    """

    theta: float = 0.0
    zeta: float = 0.0
    chi: float = 0.0
    gamma: float = 0.0
    phi: float = 0.0


@dataclass(frozen=True)
class FsimDelta:
    """Three-angle miscalibration of a CZ-like gate (swap, common phase, controlled phase)."""

    dtheta: float = 0.0
    dgamma: float = 0.0
    dphi: float = 0.0


@dataclass(frozen=True)
class XDelta:
    """Rotation-angle miscalibration of an X(pi) gate."""

    dmu: float = 0.0


def fsim(p: FsimParams) -> np.ndarray:
    """Excitation-preserving two-qubit unitary for the five-angle parametrization.

    ``fsim(FsimParams())`` is exactly CZ.
    """
    c, s = np.cos(p.theta), np.sin(p.theta)
    g = p.gamma
    return np.array(
        [
            [1, 0, 0, 0],
            [0, np.exp(-1j * (g + p.zeta)) * c, -1j * np.exp(-1j * (g - p.chi)) * s, 0],
            [0, -1j * np.exp(-1j * (g + p.chi)) * s, np.exp(-1j * (g - p.zeta)) * c, 0],
            [0, 0, 0, -np.exp(-1j * (2 * g + p.phi))],
        ],
        dtype=np.complex128,
    )


def fsim_delta(d: FsimDelta) -> np.ndarray:
    """CZ-like unitary with swap/common-phase/controlled-phase miscalibrations.

    Equals ``fsim(FsimParams(theta=dtheta, gamma=dgamma, phi=dphi))``;
    ``fsim_delta(FsimDelta())`` is exactly CZ.
    """
    return fsim(FsimParams(theta=d.dtheta, gamma=d.dgamma, phi=d.dphi))


def x_delta(d: XDelta) -> np.ndarray:
    """Single-qubit unitary close to X(pi) = exp(-i pi X / 2); ``x_delta(XDelta())`` is -iX."""
    c, s = np.cos(d.dmu / 2), np.sin(d.dmu / 2)
    return np.array([[-s, -1j * c], [-1j * c, -s]], dtype=np.complex128)
