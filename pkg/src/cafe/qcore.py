"""Small dense complex linear algebra: the numerical substrate for everything else.

All matrices are numpy ``complex128`` arrays. The two-qubit basis order is
|00>, |01>, |10>, |11> with qubit 1 as the most significant index; every other
module relies on this convention, so it is fixed here once.

Exact closed-form algebra is held to ``ATOL_EXACT``; iterated or composed
results to ``ATOL_COMPOSED``.
"""

from __future__ import annotations

import numpy as np

ATOL_EXACT = 1e-12
ATOL_COMPOSED = 1e-9

__all__ = [
    "ATOL_EXACT",
    "ATOL_COMPOSED",
    "dagger",
    "kron",
    "is_unitary",
    "is_density",
    "density",
    "normalize",
    "state_fidelity",
    "random_state",
    "random_unitary",
    "svd_2x2",
    "replica_swap",
    "symmetric_projector",
]


def dagger(m: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return m.conj().T


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Tensor product with qubit 1 (argument ``a``) as the most significant index."""
    return np.kron(a, b)


def is_unitary(m: np.ndarray, atol: float = ATOL_EXACT) -> bool:
    """Check ||U^dag U - I||_max <= atol."""
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    return bool(np.abs(dagger(m) @ m - np.eye(m.shape[0])).max() <= atol)


def is_density(rho: np.ndarray, atol: float = ATOL_EXACT) -> bool:
    """Check Hermiticity, unit trace and eigenvalues >= -atol."""
    rho = np.asarray(rho)
    if np.abs(rho - dagger(rho)).max() > atol:
        return False
    if abs(np.trace(rho) - 1.0) > atol:
        return False
    return bool(np.linalg.eigvalsh(rho).min() >= -atol)


def density(psi: np.ndarray) -> np.ndarray:
    """|psi><psi| for a state vector."""
    psi = np.asarray(psi, dtype=np.complex128)
    return np.outer(psi, psi.conj())


def normalize(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=np.complex128)
    norm = np.linalg.norm(psi)
    if norm == 0.0:
        raise ValueError("cannot normalize the zero vector")
    return psi / norm


def state_fidelity(a: np.ndarray, b: np.ndarray) -> float:
    """|<a|b>|^2 for pure states."""
    return float(abs(np.vdot(a, b)) ** 2)


def random_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random pure state."""
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return normalize(v)


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR with the standard phase correction."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def svd_2x2(m: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Closed-form SVD of a 2x2 complex matrix with a deterministic phase convention.

    Returns ``(u, s, v)`` with ``m = u @ diag(s) @ v.conj().T``, ``s`` real
    non-negative in descending order, and the first nonzero entry of each
    column of ``u`` real non-negative. The zero matrix yields
    ``(I, (0, 0), I)``. Two calls on identical input produce bit-identical
    output.
    """
    m = np.asarray(m, dtype=np.complex128)
    if m.shape != (2, 2):
        raise ValueError(f"svd_2x2 expects a 2x2 matrix, got shape {m.shape}")
    scale = np.abs(m).max()
    if scale == 0.0:
        return np.eye(2, dtype=np.complex128), np.zeros(2), np.eye(2, dtype=np.complex128)

    # Eigen-decomposition of the 2x2 Hermitian Gram matrix m^dag m.
    h = dagger(m) @ m
    a = h[0, 0].real
    c = h[1, 1].real
    b = h[0, 1]
    mid = 0.5 * (a + c)
    disc = np.hypot(0.5 * (a - c), abs(b))
    lam0 = mid + disc
    lam1 = max(mid - disc, 0.0)

    if abs(b) <= 1e-16 * max(a, c):
        if a >= c:
            v0 = np.array([1.0, 0.0], dtype=np.complex128)
        else:
            v0 = np.array([0.0, 1.0], dtype=np.complex128)
    else:
        # Eigenvector of h for lam0; pick the better-conditioned closed form.
        t0 = lam0 - a
        t1 = lam0 - c
        if t1 >= t0:
            v0 = np.array([b, t1], dtype=np.complex128)
        else:
            v0 = np.array([t0, np.conj(b)], dtype=np.complex128)
        v0 = v0 / np.linalg.norm(v0)
    v1 = np.array([-np.conj(v0[1]), np.conj(v0[0])])

    s0 = np.sqrt(lam0)
    s1 = np.sqrt(lam1)

    u0 = m @ v0 / s0
    u0 = u0 / np.linalg.norm(u0)
    # The second left vector is the orthonormal complement of u0, phase-aligned
    # with m @ v1 so the reconstruction holds when s1 > 0.
    u1 = np.array([-np.conj(u0[1]), np.conj(u0[0])])
    w = m @ v1
    ov = np.vdot(u1, w)
    if abs(ov) > 1e-14 * scale:
        u1 = u1 * (ov / abs(ov))

    u = np.column_stack([u0, u1])
    v = np.column_stack([v0, v1])
    s = np.array([s0, s1])

    # Phase convention: first entry of each u column above threshold made
    # real non-negative; the compensating phase goes into v so u s v^dag
    # is unchanged.
    for j in range(2):
        col = u[:, j]
        idx = 0 if abs(col[0]) > 1e-12 else 1
        ph = col[idx]
        if abs(ph) > 0.0:
            ph = ph / abs(ph)
            u[:, j] = u[:, j] * np.conj(ph)
            v[:, j] = v[:, j] * np.conj(ph)
    return u, s, v


def replica_swap(d: int) -> np.ndarray:
    """SWAP operator on C^d x C^d exchanging the two replicas."""
    swap = np.zeros((d * d, d * d), dtype=np.complex128)
    for i in range(d):
        for j in range(d):
            swap[i * d + j, j * d + i] = 1.0
    return swap


def symmetric_projector(d: int) -> np.ndarray:
    """Projector onto the symmetric subspace of a system and one replica.

    P = (I + SWAP)/2 on C^d x C^d; idempotent, Hermitian, trace d(d+1)/2.
    """
    return 0.5 * (np.eye(d * d, dtype=np.complex128) + replica_swap(d))
