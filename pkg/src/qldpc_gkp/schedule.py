"""CNOT measurement schedules: which (check, qubit) gates run at each gate level."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

Gate = tuple[int, int]  # (check index, data qubit index)


class ScheduleError(ValueError):
    pass


@dataclass(frozen=True)
class Schedule:
    """Gate levels for one check matrix; each level touches every check and qubit at most once."""

    levels: tuple[tuple[Gate, ...], ...]

    @classmethod
    def from_levels(cls, levels: Iterable[Iterable[Gate]]) -> "Schedule":
        return cls(tuple(tuple((int(c), int(q)) for c, q in level) for level in levels))

    @property
    def depth(self) -> int:
        return len(self.levels)

    @property
    def n_gates(self) -> int:
        return sum(len(level) for level in self.levels)

    def validate(self, h: np.ndarray) -> "Schedule":
        """Raise :class:`ScheduleError` unless this schedule covers ``h`` exactly once."""
        h = np.asarray(h)
        seen: set[Gate] = set()
        for i, level in enumerate(self.levels):
            checks = [c for c, _ in level]
            qubits = [q for _, q in level]
            if len(set(checks)) != len(checks):
                raise ScheduleError(f"level {i} reuses an ancilla")
            if len(set(qubits)) != len(qubits):
                raise ScheduleError(f"level {i} reuses a data qubit")
            for c, q in level:
                if not (0 <= c < h.shape[0] and 0 <= q < h.shape[1]) or not h[c, q]:
                    raise ScheduleError(f"level {i} has gate {c}:{q} outside the check support")
                if (c, q) in seen:
                    raise ScheduleError(f"gate {c}:{q} scheduled twice")
                seen.add((c, q))
        if len(seen) != int(np.count_nonzero(h)):
            raise ScheduleError(f"schedule covers {len(seen)} of {int(np.count_nonzero(h))} check entries")
        return self


def _edges(h: np.ndarray) -> list[Gate]:
    rows, cols = np.nonzero(np.asarray(h))
    return list(zip(rows.tolist(), cols.tolist()))


def greedy_schedule(h: np.ndarray) -> Schedule:
    """First-fit edge colouring of the Tanner graph, edges taken row by row."""
    check_busy: dict[int, set[int]] = {}
    qubit_busy: dict[int, set[int]] = {}
    levels: list[list[Gate]] = []
    for c, q in _edges(h):
        cb = check_busy.setdefault(c, set())
        qb = qubit_busy.setdefault(q, set())
        t = 0
        while t in cb or t in qb:
            t += 1
        if t == len(levels):
            levels.append([])
        levels[t].append((c, q))
        cb.add(t)
        qb.add(t)
    return Schedule.from_levels(levels)


def serial_schedule(h: np.ndarray) -> Schedule:
    """One CNOT per level, in row-major order (the layout drawn for small examples)."""
    return Schedule.from_levels([[e] for e in _edges(h)])


def coloring_schedule(h: np.ndarray) -> Schedule:
    """Minimum-depth schedule: a proper edge colouring with max-degree colours.

    The Tanner graph is bipartite, so König's theorem guarantees a colouring
    with as many colours as the largest row or column weight. Conflicts are
    resolved by swapping colours along alternating paths.
    """
    h = np.asarray(h)
    edges = _edges(h)
    if not edges:
        return Schedule(())
    delta = int(max(h.sum(axis=0).max(), h.sum(axis=1).max()))
    # node -> {colour: neighbour}; checks are ("c", i), qubits ("q", j)
    at: dict[tuple[str, int], dict[int, tuple[str, int]]] = {}
    for c, q in edges:
        u, v = ("c", c), ("q", q)
        cu = at.setdefault(u, {})
        cv = at.setdefault(v, {})
        a = next(k for k in range(delta) if k not in cu)
        b = next(k for k in range(delta) if k not in cv)
        if a not in cv:
            col = a
        else:
            # flip the a/b alternating path that starts at v with colour a
            path = [v]
            node, want = v, a
            while want in at[node]:
                node = at[node][want]
                path.append(node)
                want = b if want == a else a
            recolour = []
            for x, y in zip(path, path[1:]):
                k = a if len(recolour) % 2 == 0 else b
                recolour.append((x, y, k))
            for x, y, k in recolour:
                del at[x][k]
                del at[y][k]
            for x, y, k in recolour:
                other = b if k == a else a
                at[x][other] = y
                at[y][other] = x
            col = a
        cu[col] = v
        cv[col] = u
    levels: list[list[Gate]] = [[] for _ in range(delta)]
    for node, colours in at.items():
        if node[0] != "c":
            continue
        for k, (_, q) in colours.items():
            levels[k].append((node[1], q))
    return Schedule.from_levels(sorted(level) for level in levels if level)


def split_levels(schedule: Schedule, parts: int, key=lambda gate: gate[0]) -> Schedule:
    """Deepen a schedule by splitting every level into ``parts`` sub-levels.

    Gates go to sub-level ``key(gate) % parts``; subsets of a valid level are
    valid, so the result is still a schedule for the same matrix.
    """
    out: list[list[Gate]] = []
    for level in schedule.levels:
        buckets: list[list[Gate]] = [[] for _ in range(parts)]
        for g in level:
            buckets[key(g) % parts].append(g)
        out.extend(b for b in buckets if b)
    return Schedule.from_levels(out)


def term_schedule(terms: Sequence[np.ndarray], offsets: Sequence[int]) -> Schedule:
    """One level per permutation-matrix term of a check matrix.

    ``terms[t]`` is a square permutation matrix placed at column offset
    ``offsets[t]``; each term is a perfect matching, so it fits in one level.
    """
    levels = []
    for mat, off in zip(terms, offsets):
        rows, cols = np.nonzero(mat)
        levels.append(sorted(zip(rows.tolist(), (cols + off).tolist())))
    return Schedule.from_levels(levels)
