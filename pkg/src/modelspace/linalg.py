"""Small dense linear-algebra helpers: numerical rank, orthonormal ranges,
projection residuals and principal angles."""
from __future__ import annotations

import numpy as np
import scipy.linalg


def singular_values(A: np.ndarray) -> np.ndarray:
    return np.linalg.svd(np.asarray(A, dtype=complex), compute_uv=False)


def numerical_rank(A: np.ndarray, rtol: float = 1e-8) -> int:
    s = singular_values(A)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > rtol * s[0]))


def range_basis(A: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """Left singular vectors with sigma_i > tol * sigma_max, as columns."""
    A = np.asarray(A, dtype=complex)
    U, s, _ = np.linalg.svd(A)
    if s.size == 0 or s[0] == 0:
        return np.zeros((A.shape[0], 0), dtype=complex)
    return U[:, s > tol * s[0]]


def gap_rank(s: np.ndarray, tol: float = 1e-8, floor: float = 1e-14, min_gap: float = 1e3) -> int:
    """Numerical rank from descending singular values.

    Values above ``tol * s[0]`` always count.  Values between
    ``floor * s[0]`` and that threshold are kept up to the widest gap
    ``s[c-1] / s[c]`` (the tail is bounded below by machine epsilon), provided
    the gap exceeds ``min_gap``; otherwise they are treated as noise.
    """
    s = np.asarray(s, dtype=float)
    if s.size == 0 or s[0] == 0:
        return 0
    sure = int(np.sum(s > tol * s[0]))
    grey = int(np.sum(s > floor * s[0]))
    if grey == sure:
        return sure
    eps = np.finfo(float).eps * s[0]
    best, best_gap = sure, 0.0
    for c in range(sure, grey + 1):
        below = max(s[c] if c < s.size else 0.0, eps)
        gap = s[c - 1] / below if c > 0 else 0.0
        if gap > best_gap:
            best, best_gap = c, gap
    return best if best_gap >= min_gap else sure


def range_split(A: np.ndarray, tol: float = 1e-8, floor: float = 1e-14):
    """Orthonormal range of A by the gap rule, and the relative noise level
    sigma_{r+1} / sigma_r that bounds the angle error of that range."""
    A = np.asarray(A, dtype=complex)
    U, s, _ = np.linalg.svd(A)
    r = gap_rank(s, tol, floor)
    if r == 0:
        return U[:, :0], 0.0
    tail = s[r] if r < s.size else 0.0
    noise = max(tail, np.finfo(float).eps * s[0]) / s[r - 1]
    return U[:, :r], float(noise)


def orth(vectors: np.ndarray, rtol: float = 1e-12) -> np.ndarray:
    """Orthonormal basis for the column span (rank-revealing)."""
    return scipy.linalg.orth(np.asarray(vectors, dtype=complex), rcond=rtol)


def projection_residual(Q: np.ndarray, vectors: np.ndarray) -> float:
    """Largest relative distance of the given columns from span(Q).

    Q must have orthonormal columns.
    """
    V = np.asarray(vectors, dtype=complex)
    if V.ndim == 1:
        V = V[:, None]
    R = V - Q @ (Q.conj().T @ V)
    norms = np.linalg.norm(V, axis=0)
    norms[norms == 0] = 1.0
    return float(np.max(np.linalg.norm(R, axis=0) / norms))


def subspace_containment(Q: np.ndarray, vectors: np.ndarray) -> float:
    """sin of the largest principal angle between span(vectors) and its
    projection onto span(Q): 0 when span(vectors) lies inside span(Q)."""
    P = orth(vectors)
    if P.shape[1] == 0:
        return 0.0
    return float(np.linalg.norm(P - Q @ (Q.conj().T @ P), 2))


def principal_angles(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    return scipy.linalg.subspace_angles(np.asarray(A, dtype=complex), np.asarray(B, dtype=complex))
