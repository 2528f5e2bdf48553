"""Belief propagation with ordered-statistics post-processing (BP-OSD).

Messages live on the edges of the Tanner graph and are batched over shots:
every message array has shape ``(n_edges, batch)``. Shots that satisfy
their syndrome are frozen at that iteration, so a shot's result does not
depend on which other shots share its batch.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp

from . import gf2

RULES = ("product_sum", "min_sum")
MAX_MESSAGE = 1e6
_TANH_FLOOR = 1e-300
_ATANH_CEIL = 1.0 - 1e-15


class DimensionError(ValueError):
    pass


@dataclass
class DecodeResult:
    """Output of :meth:`BpOsdDecoder.decode`.

    For batched calls every field gains a leading shot axis.
    """

    estimate: np.ndarray
    converged: np.ndarray
    iterations_used: np.ndarray
    posterior_llrs: np.ndarray


class _Tanner:
    """Edge bookkeeping for a sparse binary matrix; edges are sorted by check."""

    def __init__(self, h):
        csr = sp.csr_matrix(h, dtype=np.uint8)
        csr.eliminate_zeros()
        csr.sort_indices()
        self.shape = csr.shape
        self.h = csr
        self.edge_var = csr.indices.astype(np.int64)
        self.edge_check = np.repeat(np.arange(csr.shape[0]), np.diff(csr.indptr))
        self.check_start = csr.indptr[:-1][np.diff(csr.indptr) > 0]
        self.nonempty = np.flatnonzero(np.diff(csr.indptr) > 0)
        n_edges = len(self.edge_var)
        # variable x edge incidence, used to sum incoming check messages
        self.var_edges = sp.csr_matrix(
            (np.ones(n_edges), (self.edge_var, np.arange(n_edges))), shape=(csr.shape[1], n_edges)
        )

    @property
    def n_edges(self) -> int:
        return len(self.edge_var)

    def per_check(self, values: np.ndarray, ufunc) -> np.ndarray:
        """Reduce edge values to one row per check (checks without edges get the identity)."""
        out = np.full((self.shape[0],) + values.shape[1:], ufunc.identity, dtype=values.dtype)
        if self.n_edges:
            out[self.nonempty] = ufunc.reduceat(values, self.check_start, axis=0)
        return out

    def syndrome(self, bits: np.ndarray) -> np.ndarray:
        """``h @ bits`` mod 2 for bits shaped ``(n, batch)``."""
        return (np.asarray(self.h @ bits.astype(np.int64)) % 2).astype(np.uint8)


def _check_update_product_sum(t: _Tanner, v2c: np.ndarray, syn_sign: np.ndarray) -> np.ndarray:
    tanh = np.tanh(0.5 * v2c)
    log_mag = np.log(np.maximum(np.abs(tanh), _TANH_FLOOR))
    neg = tanh < 0
    total_log = t.per_check(log_mag, np.add)[t.edge_check]
    total_neg = t.per_check(neg.astype(np.int64), np.add)[t.edge_check]
    mag = np.exp(total_log - log_mag)
    sign = np.where((total_neg - neg) % 2 == 1, -1.0, 1.0) * syn_sign[t.edge_check]
    return sign * 2.0 * np.arctanh(np.minimum(mag, _ATANH_CEIL))


def _check_update_min_sum(t: _Tanner, v2c: np.ndarray, syn_sign: np.ndarray, scale: float) -> np.ndarray:
    mag = np.abs(v2c)
    neg = v2c < 0
    min1 = t.per_check(mag, np.minimum)[t.edge_check]
    # mask the first edge attaining the minimum, then take the runner-up
    is_min = mag == min1
    run = np.cumsum(is_min, axis=0)
    start = t.check_start[np.searchsorted(t.nonempty, t.edge_check)]
    before = np.where(start[:, None] > 0, run[start - 1], 0)
    first = is_min & (run - before == 1)
    min2 = t.per_check(np.where(first, np.inf, mag), np.minimum)[t.edge_check]
    out_mag = np.minimum(np.where(first, min2, min1), MAX_MESSAGE)
    total_neg = t.per_check(neg.astype(np.int64), np.add)[t.edge_check]
    sign = np.where((total_neg - neg) % 2 == 1, -1.0, 1.0) * syn_sign[t.edge_check]
    return scale * sign * out_mag


def _bp(t: _Tanner, syndromes: np.ndarray, llrs: np.ndarray, max_iters: int, rule: str, scale: float):
    """Flooding BP on ``syndromes (m, B)`` and ``llrs (n, B)``."""
    m, n = t.shape
    B = syndromes.shape[1]
    posterior = llrs.copy()
    hard = (llrs < 0).astype(np.uint8)
    converged = np.zeros(B, dtype=bool)
    iters = np.full(B, max_iters, dtype=np.int64)
    active = np.arange(B)
    v2c = llrs[t.edge_var]
    syn_sign = 1.0 - 2.0 * syndromes.astype(float)
    for it in range(1, max_iters + 1):
        if rule == "product_sum":
            c2v = _check_update_product_sum(t, v2c, syn_sign)
        else:
            c2v = _check_update_min_sum(t, v2c, syn_sign, scale)
        post = llrs + np.asarray(t.var_edges @ c2v)
        h_bits = (post < 0).astype(np.uint8)
        ok = np.all(t.syndrome(h_bits) == syndromes, axis=0)
        posterior[:, active] = post
        hard[:, active] = h_bits
        if ok.any():
            converged[active[ok]] = True
            iters[active[ok]] = it
            keep = ~ok
            active, llrs, syn_sign, syndromes = active[keep], llrs[:, keep], syn_sign[:, keep], syndromes[:, keep]
            post, c2v = post[:, keep], c2v[:, keep]
            if active.size == 0:
                break
        v2c = np.clip(post[t.edge_var] - c2v, -MAX_MESSAGE, MAX_MESSAGE)
    return posterior, hard, converged, iters


def _prepare(h, syndrome, llrs):
    t = h if isinstance(h, _Tanner) else _Tanner(h)
    m, n = t.shape
    s = np.asarray(syndrome, dtype=np.uint8) % 2
    single = s.ndim == 1
    s2 = np.atleast_2d(s)
    if s2.shape[1] != m:
        raise DimensionError(f"syndrome has length {s2.shape[1]}, matrix has {m} rows")
    L = np.asarray(llrs, dtype=float)
    if L.shape[-1] != n:
        raise DimensionError(f"LLR vector has length {L.shape[-1]}, matrix has {n} columns")
    L2 = np.broadcast_to(np.atleast_2d(L), (s2.shape[0], n))
    return t, single, s2, L2


def bp_decode(h, syndrome, llrs, max_iters: int = 32, rule: str = "product_sum", scale: float = 1.0):
    """Returns ``(posterior_llrs, hard_decision, converged)``; batched if ``syndrome`` is 2-D."""
    if max_iters < 1:
        raise ValueError("max_iters must be at least 1")
    if rule not in RULES:
        raise ValueError(f"unknown check rule {rule!r}; choose from {RULES}")
    t, single, s2, L2 = _prepare(h, syndrome, llrs)
    post, hard, conv, _ = _bp(t, s2.T.copy(), L2.T.copy(), max_iters, rule, scale)
    if single:
        return post[:, 0], hard[:, 0], bool(conv[0])
    return post.T, hard.T, conv


def osd_postprocess(h, syndrome, posterior_llrs, order: int = 0, hard_decision=None) -> np.ndarray:
    """Ordered-statistics decoding of one shot.

    Columns are ranked most-likely-flipped first (ascending posterior LLR,
    ties by index); the first independent columns in that order form the
    information set. Order ``w`` then tries every pattern on the ``w``
    best-ranked remaining columns and keeps the smallest soft weight
    ``sum(e * llr)``.
    """
    h = h.h if isinstance(h, _Tanner) else h
    dense = gf2.as_binary(h.toarray() if sp.issparse(h) else h)
    m, n = dense.shape
    s = gf2.as_binary(syndrome)
    L = np.asarray(posterior_llrs, dtype=float)
    if s.shape != (m,) or L.shape != (n,):
        raise DimensionError("syndrome or LLR length does not match the matrix")
    if hard_decision is not None:
        hd = gf2.as_binary(hard_decision)
        if np.array_equal((dense.astype(np.int64) @ hd) % 2, s):
            return hd
    perm = np.argsort(L, kind="stable")
    red, pivots = gf2.row_reduce(np.hstack([dense[:, perm], s[:, None]]))
    if pivots and pivots[-1] == n:
        raise ValueError("syndrome is not in the column space of the matrix")
    r = len(pivots)
    piv = np.array(pivots, dtype=np.int64)
    pivot_mask = np.zeros(n, dtype=bool)
    pivot_mask[piv] = True
    free = np.flatnonzero(~pivot_mask)[: max(order, 0)]
    base = red[:r, n].astype(np.uint8)
    Lp = L[perm]
    best, best_cost = None, np.inf
    for pattern in itertools.product((0, 1), repeat=len(free)):
        e = np.zeros(n, dtype=np.uint8)
        sel = free[np.array(pattern, dtype=bool)] if free.size else free
        e[sel] = 1
        e[piv] = base ^ (red[:r][:, sel].sum(axis=1) % 2).astype(np.uint8) if sel.size else base
        cost = float(e @ Lp)
        if cost < best_cost:
            best, best_cost = e, cost
    out = np.zeros(n, dtype=np.uint8)
    out[perm] = best
    return out


def soft_weight(estimate, llrs) -> float:
    return float(np.asarray(estimate, dtype=float) @ np.asarray(llrs, dtype=float))


class BpOsdDecoder:
    """BP-OSD bound to one parity-check matrix."""

    def __init__(
        self,
        h,
        max_iters: int = 32,
        rule: str = "product_sum",
        osd_order: int = 0,
        min_sum_scale: float = 1.0,
    ):
        if max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if rule not in RULES:
            raise ValueError(f"unknown check rule {rule!r}; choose from {RULES}")
        if osd_order < 0:
            raise ValueError("osd_order must be non-negative")
        self.tanner = _Tanner(h)
        self._dense: Optional[np.ndarray] = None
        self.max_iters = max_iters
        self.rule = rule
        self.osd_order = osd_order
        self.min_sum_scale = min_sum_scale

    @property
    def shape(self) -> tuple[int, int]:
        return self.tanner.shape

    def _dense_h(self) -> np.ndarray:
        if self._dense is None:
            self._dense = self.tanner.h.toarray()
        return self._dense

    def decode(self, syndrome, llrs) -> DecodeResult:
        t, single, s2, L2 = _prepare(self.tanner, syndrome, llrs)
        post, hard, conv, iters = _bp(t, s2.T.copy(), L2.T.copy(), self.max_iters, self.rule, self.min_sum_scale)
        est = hard.T.copy()
        post = post.T
        for b in np.flatnonzero(~conv):
            est[b] = osd_postprocess(self._dense_h(), s2[b], post[b], self.osd_order)
        if single:
            return DecodeResult(est[0], bool(conv[0]), int(iters[0]), post[0])
        return DecodeResult(est, conv, iters, post)
