"""Dense GF(2) linear algebra on numpy uint8 arrays."""

from __future__ import annotations

import numpy as np


def as_binary(a) -> np.ndarray:
    """Return a C-contiguous uint8 copy of ``a`` reduced mod 2."""
    return np.ascontiguousarray(np.asarray(a, dtype=np.int64) % 2, dtype=np.uint8)


def row_reduce(a: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form over GF(2).

    Returns the reduced matrix (same shape, zero rows at the bottom) and the
    list of pivot columns.
    """
    m = as_binary(a).astype(bool)
    rows, cols = m.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        hits = np.flatnonzero(m[r:, c])
        if hits.size == 0:
            continue
        p = r + hits[0]
        if p != r:
            m[[r, p]] = m[[p, r]]
        others = np.flatnonzero(m[:, c])
        others = others[others != r]
        if others.size:
            m[others] ^= m[r]
        pivots.append(c)
        r += 1
    return m.astype(np.uint8), pivots


def rank(a: np.ndarray) -> int:
    a = np.asarray(a)
    if a.size == 0:
        return 0
    return len(row_reduce(a)[1])


def nullspace(a: np.ndarray) -> np.ndarray:
    """Basis of the right kernel ``{x : a x = 0}`` as rows of a uint8 matrix."""
    a = np.asarray(a)
    n = a.shape[1]
    if a.shape[0] == 0:
        return np.eye(n, dtype=np.uint8)
    red, pivots = row_reduce(a)
    pivot_set = set(pivots)
    free = [c for c in range(n) if c not in pivot_set]
    basis = np.zeros((len(free), n), dtype=np.uint8)
    basis[np.arange(len(free)), free] = 1
    if pivots and free:
        basis[:, pivots] = red[: len(pivots)][:, free].T
    return basis


def in_rowspace(vec: np.ndarray, a: np.ndarray) -> bool:
    a = np.asarray(a)
    if a.shape[0] == 0:
        return not np.any(as_binary(vec))
    return rank(np.vstack([a, as_binary(vec)[None, :]])) == rank(a)


def logical_basis(h_x: np.ndarray, h_z: np.ndarray) -> np.ndarray:
    """Representatives of the logical Z operators of a CSS code.

    These are vectors in ker(h_x) independent of rowspace(h_z). An X-type
    residual with zero h_z-syndrome is a nontrivial logical operator iff it
    has odd overlap with at least one returned row.
    """
    n = h_z.shape[1]
    kernel = nullspace(h_x)
    # greedy selection: pivot columns of [h_z^T | kernel^T] past the h_z block
    stacked = np.hstack([as_binary(h_z).T, kernel.T])
    _, pivots = row_reduce(stacked)
    offset = h_z.shape[0]
    chosen = [p - offset for p in pivots if p >= offset]
    return kernel[chosen] if chosen else np.zeros((0, n), dtype=np.uint8)
