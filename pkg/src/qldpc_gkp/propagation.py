"""Pauli-frame propagation of X faults through repeated syndrome-extraction rounds.

The memory window runs every X-check round first and then every Z-check
round. Only Z-check outcomes are recorded. Detector ``r*m + c`` is the raw
outcome of Z check ``c`` in round ``r`` XORed with the same check in round
``r - 1`` (round 0 is compared against the noiseless value).
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple, Optional

from .circuit import FaultLocation, MeasurementCircuit, build_circuit, enumerate_fault_locations
from .codes import CssCode
from .gkp import Mechanism
from .schedule import Schedule


class FaultEffect(NamedTuple):
    syndrome_bits: frozenset
    data_error: frozenset


@dataclass(frozen=True, eq=False)
class MemoryCircuit:
    """The full faulty circuit of one decoding window."""

    code: CssCode
    circuits: Mapping[str, Optional[MeasurementCircuit]]
    rounds: int
    _locations: list = field(default_factory=list, repr=False)

    @classmethod
    def build(cls, code: CssCode, schedules: Mapping[str, Optional[Schedule]], rounds: int = 3) -> "MemoryCircuit":
        if rounds < 1:
            raise ValueError("need at least one measurement round")
        if code.h_z.shape[0] == 0:
            raise ValueError("the code has no Z checks; X faults would be undetectable")
        circuits: dict[str, Optional[MeasurementCircuit]] = {}
        for basis in ("X", "Z"):
            h = code.check_matrix(basis)
            if h.shape[0] == 0:
                circuits[basis] = None
                continue
            sched = schedules.get(basis)
            if sched is None:
                raise ValueError(f"no schedule given for the {basis} checks")
            circuits[basis] = build_circuit(code, sched, basis)
        return cls(code, circuits, rounds)

    @property
    def m(self) -> int:
        return self.code.h_z.shape[0]

    @property
    def n_detectors(self) -> int:
        return self.rounds * self.m

    @property
    def segments(self) -> list[tuple[str, int]]:
        """Basis rounds in time order."""
        out = []
        for basis in ("X", "Z"):
            if self.circuits.get(basis) is not None:
                out.extend((basis, r) for r in range(self.rounds))
        return out

    def locations(self) -> list[FaultLocation]:
        if not self._locations:
            for basis, r in self.segments:
                self._locations.extend(enumerate_fault_locations(self.circuits[basis], r))
        return self._locations

    def check_location(self, loc: FaultLocation) -> None:
        circ = self.circuits.get(loc.basis)
        if circ is None or not 0 <= loc.round < self.rounds or not 0 <= loc.qubit < circ.n_qubits:
            raise ValueError(f"location {loc} is not part of this circuit")
        anc = circ.is_ancilla(loc.qubit)
        if loc.level == 0:
            expected = Mechanism.PREPARE if anc else Mechanism.IDLE
        elif loc.level == circ.depth + 1 and anc:
            expected = Mechanism.MEASURE
        elif 1 <= loc.level <= circ.depth:
            role = int(circ.gate_roles()[loc.level, loc.qubit])
            expected = (Mechanism.IDLE, Mechanism.CNOT_CONTROL, Mechanism.CNOT_TARGET)[role]
        else:
            raise ValueError(f"location {loc} has no slot at level {loc.level}")
        if loc.mechanism != expected:
            raise ValueError(f"location {loc} should be a {expected.label} slot")


def propagate_faults(locations: Iterable[FaultLocation], memory: MemoryCircuit) -> FaultEffect:
    """Insert an X at every given location and walk the frame to the end of the window."""
    inserts: dict[tuple[str, int, int], list[int]] = defaultdict(list)
    for loc in locations:
        memory.check_location(loc)
        inserts[(loc.basis, loc.round, loc.level)].append(loc.qubit)

    m = memory.m
    n = memory.code.n
    data_frame: set[int] = set()
    raw: set[tuple[int, int]] = set()
    for basis, r in memory.segments:
        circ = memory.circuits[basis]
        frame = set(data_frame)

        def insert(level: int) -> None:
            for q in inserts.get((basis, r, level), ()):
                frame.symmetric_difference_update((q,))

        insert(0)
        for level, gates in enumerate(circ.levels, start=1):
            for c, t in gates:
                # X on the control copies onto the target
                if c in frame:
                    frame.symmetric_difference_update((t,))
            insert(level)
        insert(circ.depth + 1)
        if basis == "Z":
            for a in frame:
                if a >= n:
                    raw.add((r, a - n))
        data_frame = {q for q in frame if q < n}

    detectors: set[int] = set()
    for r, c in raw:
        detectors.symmetric_difference_update((r * m + c,))
        if r + 1 < memory.rounds:
            detectors.symmetric_difference_update(((r + 1) * m + c,))
    return FaultEffect(frozenset(detectors), frozenset(data_frame))


def propagate_fault(location: FaultLocation, memory: MemoryCircuit) -> FaultEffect:
    return propagate_faults([location], memory)
