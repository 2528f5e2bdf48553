from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from qldpc_gkp import codes
from qldpc_gkp.circuit import build_circuit, enumerate_fault_locations, format_circuit, location_counts
from qldpc_gkp.gkp import Mechanism
from qldpc_gkp.io import load_bundle
from qldpc_gkp.schedule import ScheduleError, Schedule, greedy_schedule, serial_schedule

GOLDEN = Path(__file__).parent / "golden"


def test_repetition_greedy_structure(rep3):
    c = build_circuit(rep3, greedy_schedule(rep3.h_z), "Z")
    assert (c.data_qubits, c.ancilla_qubits, c.depth) == (3, 2, 2)
    assert sum(len(level) for level in c.levels) == 4
    # Z checks: data controls, ancilla targets
    assert all(ctl < 3 <= tgt for level in c.levels for ctl, tgt in level)


def test_x_checks_point_ancilla_to_data():
    steane = codes.steane_code()
    c = build_circuit(steane, greedy_schedule(steane.h_x), "X")
    assert all(ctl >= 7 > tgt for level in c.levels for ctl, tgt in level)


def test_serialised_repetition_has_27_locations(rep3):
    locs = enumerate_fault_locations(build_circuit(rep3, serial_schedule(rep3.h_z), "Z"))
    assert len(locs) == 27


def test_golden_circuit_dump(rep3):
    c = build_circuit(rep3, serial_schedule(rep3.h_z), "Z")
    assert format_circuit(c) == (GOLDEN / "repetition3_serial_z.txt").read_text()


def test_parallel_schedule_has_fewer_idles(rep3):
    deep = location_counts(enumerate_fault_locations(build_circuit(rep3, serial_schedule(rep3.h_z), "Z")))
    flat = location_counts(enumerate_fault_locations(build_circuit(rep3, greedy_schedule(rep3.h_z), "Z")))
    assert flat["Idle"] < deep["Idle"]
    assert {k: v for k, v in flat.items() if k != "Idle"} == {k: v for k, v in deep.items() if k != "Idle"}


@pytest.mark.parametrize("name,schedule", [("steane", "greedy"), ("hgp13", "serial"), ("bb144", "depth6")])
def test_location_accounting(name, schedule):
    bundle = load_bundle(name)
    for basis, sched in bundle.schedule(schedule).items():
        h = bundle.code.check_matrix(basis)
        c = build_circuit(bundle.code, sched, basis)
        counts = location_counts(enumerate_fault_locations(c))
        ones = int(h.sum())
        assert counts["Prepare"] == counts["Measure"] == h.shape[0]
        assert counts["CnotControl"] == counts["CnotTarget"] == ones
        total = c.n_qubits * (c.depth + 1) + c.ancilla_qubits
        assert sum(counts.values()) == total
        assert counts["Idle"] == total - 2 * h.shape[0] - 2 * ones


def test_location_types_follow_gates(rep3):
    c = build_circuit(rep3, greedy_schedule(rep3.h_z), "Z")
    roles = c.gate_roles()
    for loc in enumerate_fault_locations(c):
        if loc.mechanism == Mechanism.PREPARE:
            assert loc.level == 0 and c.is_ancilla(loc.qubit)
        elif loc.mechanism == Mechanism.MEASURE:
            assert loc.level == c.depth + 1 and c.is_ancilla(loc.qubit)
        elif loc.mechanism == Mechanism.CNOT_CONTROL:
            assert roles[loc.level, loc.qubit] == 1
        elif loc.mechanism == Mechanism.CNOT_TARGET:
            assert roles[loc.level, loc.qubit] == 2


def test_bb_depth6():
    bundle = load_bundle("bb144")
    assert build_circuit(bundle.code, bundle.schedule("depth6")["Z"], "Z").depth == 6


def test_idles_grow_with_depth():
    code = codes.hypergraph_product(codes.repetition_checks(3), codes.repetition_checks(3))
    a = location_counts(enumerate_fault_locations(build_circuit(code, greedy_schedule(code.h_z), "Z")))
    b = location_counts(enumerate_fault_locations(build_circuit(code, serial_schedule(code.h_z), "Z")))
    assert b["Idle"] > a["Idle"]


def test_errors(rep3):
    with pytest.raises(ValueError, match="empty"):
        build_circuit(rep3, Schedule.from_levels([]), "X")
    with pytest.raises(ScheduleError):
        build_circuit(rep3, Schedule.from_levels([[(0, 0)]]), "Z")


def test_enumeration_is_stable(rep3):
    c = build_circuit(rep3, greedy_schedule(rep3.h_z), "Z")
    assert enumerate_fault_locations(c) == enumerate_fault_locations(c)
    keys = [(l.level if l.level else -1, l.qubit) for l in enumerate_fault_locations(c)]
    assert keys == sorted(keys)
