from __future__ import annotations

import numpy as np
import pytest

from qldpc_gkp import codes
from qldpc_gkp.circuit import FaultLocation
from qldpc_gkp.detector_model import _location_effects
from qldpc_gkp.gkp import Mechanism
from qldpc_gkp.io import load_bundle
from qldpc_gkp.propagation import MemoryCircuit, propagate_fault, propagate_faults
from qldpc_gkp.schedule import greedy_schedule, serial_schedule


@pytest.fixture(scope="module")
def rep_memory(rep3):
    return MemoryCircuit.build(rep3, {"Z": serial_schedule(rep3.h_z)}, rounds=3)


@pytest.fixture(scope="module")
def hgp_memory():
    b = load_bundle("hgp13")
    return MemoryCircuit.build(b.code, b.schedule("greedy"), rounds=3)


def _xor(a, b):
    return (a.syndrome_bits ^ b.syndrome_bits, a.data_error ^ b.data_error)


def test_measurement_fault_fires_two_detectors(rep_memory):
    m = rep_memory.m
    depth = rep_memory.circuits["Z"].depth
    eff = propagate_fault(FaultLocation(Mechanism.MEASURE, 3, depth + 1, 0, "Z"), rep_memory)
    assert eff.syndrome_bits == {0, m} and not eff.data_error
    last = propagate_fault(FaultLocation(Mechanism.MEASURE, 3, depth + 1, 2, "Z"), rep_memory)
    assert last.syndrome_bits == {2 * m}


def test_first_data_qubit_flip_one_round(rep3):
    mem = MemoryCircuit.build(rep3, {"Z": serial_schedule(rep3.h_z)}, rounds=1)
    eff = propagate_fault(FaultLocation(Mechanism.IDLE, 0, 0, 0, "Z"), mem)
    assert eff.syndrome_bits == {0} and eff.data_error == {0}


def test_final_idle_is_invisible(rep_memory):
    depth = rep_memory.circuits["Z"].depth
    eff = propagate_fault(FaultLocation(Mechanism.IDLE, 0, depth, 2, "Z"), rep_memory)
    assert not eff.syndrome_bits and eff.data_error == {0}


def test_invalid_location_rejected(rep_memory):
    with pytest.raises(ValueError):
        propagate_fault(FaultLocation(Mechanism.MEASURE, 0, 5, 0, "Z"), rep_memory)
    with pytest.raises(ValueError):
        propagate_fault(FaultLocation(Mechanism.IDLE, 0, 0, 7, "Z"), rep_memory)
    with pytest.raises(ValueError):
        propagate_fault(FaultLocation(Mechanism.IDLE, 0, 0, 0, "X"), rep_memory)


@pytest.mark.parametrize("fixture", ["rep_memory", "hgp_memory"])
def test_backward_table_matches_forward_walker(fixture, request):
    mem = request.getfixturevalue(fixture)
    for loc, (syn, data) in zip(mem.locations(), _location_effects(mem)):
        eff = propagate_fault(loc, mem)
        assert eff.syndrome_bits == {i for i in range(mem.n_detectors) if syn >> i & 1}
        assert eff.data_error == {i for i in range(mem.code.n) if data >> i & 1}


def test_linearity(hgp_memory):
    locs = hgp_memory.locations()
    rng = np.random.default_rng(0)
    for _ in range(1000):
        a, b = rng.choice(len(locs), 2, replace=False)
        both = propagate_faults([locs[a], locs[b]], hgp_memory)
        assert (both.syndrome_bits, both.data_error) == _xor(
            propagate_fault(locs[a], hgp_memory), propagate_fault(locs[b], hgp_memory)
        )


def test_only_z_detectors_and_x_ancilla_readout_silent(hgp_memory):
    for loc in hgp_memory.locations():
        eff = propagate_fault(loc, hgp_memory)
        assert all(0 <= d < hgp_memory.n_detectors for d in eff.syndrome_bits)
        if loc.basis == "X" and loc.mechanism == Mechanism.MEASURE:
            assert not eff.syndrome_bits and not eff.data_error


def test_delay_past_untouching_gate(hgp_memory):
    rng = np.random.default_rng(1)
    checked = 0
    locs = hgp_memory.locations()
    while checked < 100:
        loc = locs[rng.integers(len(locs))]
        circ = hgp_memory.circuits[loc.basis]
        nxt = loc.level + 1
        if nxt > circ.depth or circ.gate_roles()[nxt, loc.qubit] != 0:
            continue
        later = FaultLocation(Mechanism.IDLE, loc.qubit, nxt, loc.round, loc.basis)
        assert propagate_fault(loc, hgp_memory) == propagate_fault(later, hgp_memory)
        checked += 1


def test_memory_needs_z_checks():
    with pytest.raises(ValueError):
        MemoryCircuit.build(codes.validate_css([[1, 1]], np.zeros((0, 2), dtype=np.uint8)), {}, 3)
    rep = codes.repetition_code(3)
    with pytest.raises(ValueError):
        MemoryCircuit.build(rep, {"Z": greedy_schedule(rep.h_z)}, 0)
