"""Circuit-level parity-check matrix and per-column LLR initialisation."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Mapping, Optional

import numpy as np
import scipy.sparse as sp

from . import gkp
from .circuit import FaultLocation
from .codes import CssCode
from .gkp import GkpParams, Mechanism
from .propagation import MemoryCircuit
from .schedule import Schedule

P_CLAMP = 1e-12


class LlrMode(str, enum.Enum):
    UNIFORM = "uniform"
    PRIOR = "prior"
    REALTIME = "realtime"


@dataclass(frozen=True, eq=False)
class CircuitCheckMatrix:
    """Deduplicated circuit-level check matrix for X faults.

    Column ``j`` stands for every fault location in ``column_groups[j]``;
    all of them trigger the detectors in ``matrix[:, j]`` and leave the data
    error ``data_effects[j]`` at the end of the window.
    """

    memory: MemoryCircuit
    matrix: sp.csr_matrix  # detectors x columns
    data_effects: sp.csr_matrix  # columns x data qubits
    location_column: np.ndarray  # location -> column
    mechanisms: np.ndarray  # location -> Mechanism value
    pairs: np.ndarray  # (n_gates, 2) location indices of CNOT control and target legs
    singles: np.ndarray  # locations sampled on their own

    @property
    def locations(self) -> list[FaultLocation]:
        return self.memory.locations()

    @property
    def code(self) -> CssCode:
        return self.memory.code

    @property
    def m(self) -> int:
        return self.memory.m

    @property
    def n_columns(self) -> int:
        return self.matrix.shape[1]

    @property
    def n_locations(self) -> int:
        return len(self.location_column)

    @property
    def column_groups(self) -> list[np.ndarray]:
        order = np.argsort(self.location_column, kind="stable")
        bounds = np.searchsorted(self.location_column[order], np.arange(self.n_columns + 1))
        return [order[bounds[j]:bounds[j + 1]] for j in range(self.n_columns)]

    @property
    def group_matrix(self) -> sp.csr_matrix:
        """Location x column incidence (one 1 per row)."""
        L = self.n_locations
        return sp.csr_matrix(
            (np.ones(L, dtype=np.uint8), (np.arange(L), self.location_column)), shape=(L, self.n_columns)
        )

    def mechanism_counts(self) -> dict[str, int]:
        return {m.label: int(np.count_nonzero(self.mechanisms == m)) for m in Mechanism}


def _location_effects(memory: MemoryCircuit) -> list[tuple[int, int]]:
    """(detector bits, data bits) of a lone X at every location, as int bitsets.

    Runs the frame propagation backwards: the effect of an X just before a
    gate level is the effect just after it, with a control's effect picking
    up its target's (X on the control is copied to the target).
    """
    code, m, rounds = memory.code, memory.m, memory.rounds
    n = code.n
    next_start = [(0, 1 << q) for q in range(n)]
    tables: dict[tuple[str, int], list[list[tuple[int, int]]]] = {}
    for basis, r in reversed(memory.segments):
        circ = memory.circuits[basis]
        after = list(next_start)
        for c in range(circ.ancilla_qubits):
            bits = 0
            if basis == "Z":
                bits = 1 << (r * m + c)
                if r + 1 < rounds:
                    bits |= 1 << ((r + 1) * m + c)
            after.append((bits, 0))
        table = [after]
        for gates in reversed(circ.levels):
            before = list(after)
            for ctl, tgt in gates:
                a, b = after[ctl], after[tgt]
                before[ctl] = (a[0] ^ b[0], a[1] ^ b[1])
            table.append(before)
            after = before
        table.reverse()  # table[l] = effect at slot l
        tables[(basis, r)] = table
        next_start = table[0][:n]

    out = []
    for loc in memory.locations():
        table = tables[(loc.basis, loc.round)]
        out.append(table[min(loc.level, len(table) - 1)][loc.qubit])
    return out


def _bits(x: int) -> list[int]:
    out = []
    while x:
        low = x & -x
        out.append(low.bit_length() - 1)
        x ^= low
    return out


def build_circuit_check_matrix(
    code: CssCode, schedules: Mapping[str, Optional[Schedule]], rounds: int = 3
) -> CircuitCheckMatrix:
    memory = MemoryCircuit.build(code, schedules, rounds)
    return build_from_memory(memory)


def build_from_memory(memory: MemoryCircuit) -> CircuitCheckMatrix:
    locations = memory.locations()
    effects = _location_effects(memory)
    index: dict[tuple[int, int], int] = {}
    location_column = np.empty(len(locations), dtype=np.int64)
    for i, eff in enumerate(effects):
        location_column[i] = index.setdefault(eff, len(index))

    det_rows, det_cols, dat_rows, dat_cols = [], [], [], []
    for j, (syn, data) in enumerate(index):
        s = _bits(syn)
        det_rows.extend(s)
        det_cols.extend([j] * len(s))
        d = _bits(data)
        dat_cols.extend(d)
        dat_rows.extend([j] * len(d))
    C = len(index)
    matrix = sp.csr_matrix(
        (np.ones(len(det_rows), dtype=np.uint8), (det_rows, det_cols)), shape=(memory.n_detectors, C)
    )
    data_effects = sp.csr_matrix(
        (np.ones(len(dat_rows), dtype=np.uint8), (dat_rows, dat_cols)), shape=(C, memory.code.n)
    )

    slot_index = {(loc.basis, loc.round, loc.level, loc.qubit): i for i, loc in enumerate(locations)}
    pairs = []
    for basis, r in memory.segments:
        for level, gates in enumerate(memory.circuits[basis].levels, start=1):
            for ctl, tgt in gates:
                pairs.append((slot_index[(basis, r, level, ctl)], slot_index[(basis, r, level, tgt)]))
    pairs_arr = np.array(pairs, dtype=np.int64).reshape(-1, 2)
    mechanisms = np.array([int(loc.mechanism) for loc in locations], dtype=np.int8)
    singles = np.flatnonzero(
        (mechanisms != Mechanism.CNOT_CONTROL) & (mechanisms != Mechanism.CNOT_TARGET)
    )
    return CircuitCheckMatrix(memory, matrix, data_effects, location_column, mechanisms, pairs_arr, singles)


# ---------------------------------------------------------------------------
# probabilities and LLRs


def merge_probabilities(probs) -> float:
    """Probability that an odd number of independent faults occur."""
    p = np.asarray(probs, dtype=float)
    return float(0.5 - 0.5 * np.prod(1.0 - 2.0 * p))


def merge_groups(probs: np.ndarray, group_matrix: sp.csr_matrix) -> np.ndarray:
    """:func:`merge_probabilities` applied per column, vectorised over leading axes.

    ``probs`` has shape ``(..., n_locations)``; the result ``(..., n_columns)``.
    """
    p = np.asarray(probs, dtype=float)
    lead = p.shape[:-1]
    p2 = p.reshape(-1, p.shape[-1])
    factor = 1.0 - 2.0 * p2
    gt = group_matrix.T.tocsr().astype(float)
    with np.errstate(divide="ignore"):
        log_mag = np.log(np.abs(factor))
    # sparse products skip the implicit zeros, so -inf stays confined to its column
    log_sum = np.asarray((gt @ log_mag.T)).T
    negatives = np.asarray((gt @ (factor < 0).T.astype(float))).T
    sign = 1.0 - 2.0 * (np.rint(negatives) % 2)
    merged = 0.5 - 0.5 * sign * np.exp(log_sum)
    return merged.reshape(lead + (group_matrix.shape[1],))


def probability_to_llr(p):
    p = np.clip(np.asarray(p, dtype=float), P_CLAMP, 1.0 - P_CLAMP)
    out = np.log((1.0 - p) / p)
    return float(out) if out.ndim == 0 else out


def mechanism_priors(params: GkpParams) -> dict[Mechanism, float]:
    """Unconditional X-flip probability of each kind of fault location."""
    s2 = params.base_variance
    ctl, tgt = gkp.cnot_leg_priors("q", s2)
    return {
        Mechanism.IDLE: gkp.prior_flip_probability(2 * s2),
        Mechanism.PREPARE: gkp.prior_flip_probability(2 * s2),
        Mechanism.MEASURE: gkp.prior_flip_probability(s2),
        Mechanism.CNOT_CONTROL: ctl,
        Mechanism.CNOT_TARGET: tgt,
    }


def prior_location_probs(ccm: CircuitCheckMatrix, params: GkpParams) -> np.ndarray:
    table = mechanism_priors(params)
    lookup = np.array([table[Mechanism(i)] for i in range(len(Mechanism))])
    return lookup[ccm.mechanisms]


def realtime_location_probs(ccm: CircuitCheckMatrix, params: GkpParams, residues: np.ndarray) -> np.ndarray:
    """Posterior flip probabilities given the GKP residues at every location."""
    residues = np.asarray(residues, dtype=float)
    s2 = params.base_variance
    out = np.empty_like(residues)
    single_var = np.where(ccm.mechanisms[ccm.singles] == Mechanism.MEASURE, s2, 2 * s2)
    for var in np.unique(single_var):
        idx = ccm.singles[single_var == var]
        out[..., idx] = gkp.posterior_flip_probability(residues[..., idx], float(var))
    if len(ccm.pairs):
        ctl, tgt = ccm.pairs[:, 0], ccm.pairs[:, 1]
        post = gkp.pair_posteriors(residues[..., ctl], residues[..., tgt], "q", s2)
        out[..., ctl], out[..., tgt] = gkp.pair_marginals(post)
    return out


def uniform_llr(params: GkpParams) -> float:
    """Shared LLR for the no-soft-information case: the mean prior over mechanisms."""
    return probability_to_llr(float(np.mean(list(mechanism_priors(params).values()))))


def init_llrs(mode, ccm: CircuitCheckMatrix, params: GkpParams, sample=None) -> np.ndarray:
    """Initial column LLRs; with a batched sample the result has one row per shot."""
    mode = LlrMode(mode)
    if mode is LlrMode.UNIFORM:
        return np.full(ccm.n_columns, uniform_llr(params))
    if mode is LlrMode.PRIOR:
        merged = merge_groups(prior_location_probs(ccm, params), ccm.group_matrix)
        return probability_to_llr(merged)
    residues = getattr(sample, "residues", None)
    if residues is None:
        raise ValueError("real-time LLRs need a fault sample carrying the measured residues")
    probs = realtime_location_probs(ccm, params, residues)
    return probability_to_llr(merge_groups(probs, ccm.group_matrix))
