from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from qldpc_gkp import codes
from qldpc_gkp.io import load_bundle
from qldpc_gkp.schedule import (
    Schedule,
    ScheduleError,
    coloring_schedule,
    greedy_schedule,
    serial_schedule,
    split_levels,
)


def test_repetition_greedy_depth():
    assert greedy_schedule(codes.repetition_checks(3)).depth == 2


@given(hnp.arrays(np.uint8, st.tuples(st.integers(1, 6), st.integers(1, 8)), elements=st.integers(0, 1)))
def test_schedules_cover_exactly_once(h):
    if not h.any():
        return
    weight = max(h.sum(axis=1).max(), h.sum(axis=0).max())
    for make in (greedy_schedule, serial_schedule, coloring_schedule):
        s = make(h).validate(h)
        assert s.depth >= weight
    assert coloring_schedule(h).depth == weight


def test_validate_rejects_bad_schedules():
    h = codes.repetition_checks(3)
    with pytest.raises(ScheduleError):
        Schedule.from_levels([[(0, 0), (0, 1)], [(1, 1), (1, 2)]]).validate(h)
    with pytest.raises(ScheduleError):
        Schedule.from_levels([[(0, 0)], [(0, 1)], [(1, 1)]]).validate(h)
    with pytest.raises(ScheduleError):
        Schedule.from_levels([[(0, 2)]]).validate(h)


def test_bundled_depths():
    bb = load_bundle("bb144")
    assert bb.schedule("depth6")["Z"].depth == 6 and bb.schedule("depth6")["X"].depth == 6
    lp = load_bundle("lp1054")
    assert lp.schedule("depth8")["Z"].depth == 8
    assert lp.schedule("depth40")["Z"].depth == 40


def test_split_levels_preserves_gates():
    h = codes.hypergraph_product(codes.repetition_checks(3), codes.repetition_checks(3)).h_z
    s = coloring_schedule(h)
    deep = split_levels(s, 3).validate(h)
    assert deep.n_gates == s.n_gates and deep.depth >= s.depth
