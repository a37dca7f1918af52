"""Closed-form linear algebra for 2x2 Hermitian matrices.

Everything here works on a single ``(2, 2)`` matrix or on a stack of shape
``(..., 2, 2)``; eigenvectors come back as the last axis of the returned
vector arrays.
"""

import numpy as np

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = np.stack([SIGMA_X, SIGMA_Y, SIGMA_Z])

DEGENERACY_TOL = 1e-13


def from_pauli(c, n):
    """Return ``c * (n_x sigma_x + n_y sigma_y + n_z sigma_z)``.

    ``n`` may carry leading batch axes; its last axis must have length 3.
    """
    c = np.asarray(c, dtype=float)
    n = np.asarray(n, dtype=float)
    if n.shape[-1] != 3:
        raise ValueError("n must have a trailing axis of length 3")
    if not (np.all(np.isfinite(c)) and np.all(np.isfinite(n))):
        raise ValueError("from_pauli requires finite components")
    h = c[..., None] * n
    return np.einsum("...k,kij->...ij", h, PAULI)


def pauli_components(H):
    """Inverse of :func:`from_pauli` for traceless input: real ``(..., 3)``."""
    H = np.asarray(H)
    return np.real(np.einsum("...ij,kji->...k", H, PAULI)) / 2.0


def _fix_gauge(v):
    # largest-modulus component made real and positive; ties go to index 0
    idx = np.argmax(np.abs(v), axis=-1)
    pivot = np.take_along_axis(v, idx[..., None], axis=-1)
    phase = np.conj(pivot) / np.abs(pivot)
    return v * phase


def eig2(H):
    """Eigendecomposition of a Hermitian 2x2 matrix (or stack of them).

    Returns
    -------
    energies : ndarray, shape (..., 2)
        ``[E_minus, E_plus]`` with ``E_minus <= E_plus``.
    vectors : ndarray, shape (..., 2, 2)
        ``vectors[..., k, :]`` is the unit eigenvector for ``energies[..., k]``,
        with its largest-modulus component real and positive.

    Degenerate input (gap below ``1e-13`` times the matrix scale) returns the
    computational basis; callers that need a gap must check it themselves.
    """
    H = np.asarray(H, dtype=complex)
    a = H[..., 0, 0].real
    d = H[..., 1, 1].real
    b = H[..., 0, 1]
    mean = 0.5 * (a + d)
    half = 0.5 * (a - d)
    r = np.hypot(half, np.abs(b))
    energies = np.stack([mean - r, mean + r], axis=-1)

    # two algebraically equivalent forms per eigenvector; pick the one whose
    # leading entry does not cancel
    pos = half >= 0
    vp = np.where(
        pos[..., None],
        np.stack([r + half + 0j, np.conj(b)], axis=-1),
        np.stack([b, r - half + 0j], axis=-1),
    )
    vm = np.where(
        pos[..., None],
        np.stack([b, -(r + half) + 0j], axis=-1),
        np.stack([half - r + 0j, np.conj(b)], axis=-1),
    )
    vectors = np.stack([vm, vp], axis=-2)
    norms = np.linalg.norm(vectors, axis=-1, keepdims=True)

    scale = np.maximum(np.abs(a) + np.abs(d) + 2 * np.abs(b), 1.0)
    degenerate = r <= DEGENERACY_TOL * scale
    eye = np.broadcast_to(np.eye(2, dtype=complex), vectors.shape)
    safe = np.where(norms > 0, norms, 1.0)
    vectors = np.where(degenerate[..., None, None], eye, vectors / safe)
    return energies, _fix_gauge(vectors)


def residual(H, energies, vectors):
    """Largest ``||H v - E v||`` over the eigenpairs returned by :func:`eig2`."""
    Hv = np.einsum("...ij,...kj->...ki", np.asarray(H), vectors)
    return np.max(np.linalg.norm(Hv - energies[..., None] * vectors, axis=-1))
