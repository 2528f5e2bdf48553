"""Faulty syndrome-measurement circuits and their fault locations.

Qubits are indexed data first (``0..n-1``) then ancillas (``n + check``).
Within one measurement round a circuit has gate levels ``1..depth``; a
fault slot follows every level (slot ``l`` sits after level ``l``, slot 0
before the first level). Ancillas get one extra slot, ``depth + 1``, just
before they are measured.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .codes import CssCode
from .gkp import Mechanism
from .schedule import Schedule, ScheduleError

BASES = ("X", "Z")


@dataclass(frozen=True)
class MeasurementCircuit:
    """One round of syndrome extraction for the checks of one basis.

    ``levels[i]`` lists the ``(control, target)`` CNOTs of gate level ``i + 1``.
    Z checks use fresh |0> ancillas as CNOT targets and are measured in Z;
    X checks use |+> ancillas as CNOT controls and are measured in X.
    """

    basis: str
    data_qubits: int
    ancilla_qubits: int
    levels: tuple[tuple[tuple[int, int], ...], ...]

    @property
    def depth(self) -> int:
        return len(self.levels)

    @property
    def n_qubits(self) -> int:
        return self.data_qubits + self.ancilla_qubits

    def is_ancilla(self, qubit: int) -> bool:
        return qubit >= self.data_qubits

    def gate_roles(self) -> np.ndarray:
        """``roles[level, qubit]``: 0 untouched, 1 control, 2 target (level 0 unused)."""
        roles = np.zeros((self.depth + 1, self.n_qubits), dtype=np.int8)
        for i, level in enumerate(self.levels, start=1):
            for c, t in level:
                roles[i, c] = 1
                roles[i, t] = 2
        return roles


class FaultLocation(NamedTuple):
    mechanism: Mechanism
    qubit: int
    level: int
    round: int
    basis: str

    def describe(self) -> str:
        return f"{self.basis}:r{self.round}:l{self.level}:q{self.qubit}:{self.mechanism.label}"


def build_circuit(code: CssCode, schedule: Schedule, basis: str) -> MeasurementCircuit:
    if basis not in BASES:
        raise ValueError(f"basis must be 'X' or 'Z', got {basis!r}")
    h = code.check_matrix(basis)
    if h.shape[0] == 0 or not h.any():
        raise ValueError(f"the {basis} check matrix is empty; there is no circuit to build")
    try:
        schedule.validate(h)
    except ScheduleError as exc:
        raise ScheduleError(f"schedule does not match the {basis} checks: {exc}") from None
    n = code.n
    levels = []
    for level in schedule.levels:
        if basis == "Z":
            gates = tuple((q, n + c) for c, q in level)
        else:
            gates = tuple((n + c, q) for c, q in level)
        levels.append(gates)
    return MeasurementCircuit(basis, n, h.shape[0], tuple(levels))


def enumerate_fault_locations(circuit: MeasurementCircuit, round: int = 0) -> list[FaultLocation]:
    """All fault slots of one round, ordered by level then qubit."""
    if circuit.ancilla_qubits == 0:
        return []
    roles = circuit.gate_roles()
    depth, n, basis = circuit.depth, circuit.data_qubits, circuit.basis
    out: list[FaultLocation] = []
    for q in range(circuit.n_qubits):
        out.append(FaultLocation(Mechanism.PREPARE if q >= n else Mechanism.IDLE, q, 0, round, basis))
    kinds = (Mechanism.IDLE, Mechanism.CNOT_CONTROL, Mechanism.CNOT_TARGET)
    for level in range(1, depth + 1):
        for q in range(circuit.n_qubits):
            out.append(FaultLocation(kinds[roles[level, q]], q, level, round, basis))
    for q in range(n, circuit.n_qubits):
        out.append(FaultLocation(Mechanism.MEASURE, q, depth + 1, round, basis))
    return out


def location_counts(locations) -> dict[str, int]:
    counts = {m.label: 0 for m in Mechanism}
    for loc in locations:
        counts[loc.mechanism.label] += 1
    return counts


def format_circuit(circuit: MeasurementCircuit) -> str:
    """Text dump: one row per qubit, one column per slot.

    Slot codes: P prepare, I idle, C control, T target, M measure; gate
    levels are shown between slots as ``*`` (control) / ``+`` (target).
    """
    roles = circuit.gate_roles()
    n = circuit.data_qubits
    lines = [f"# {circuit.basis}-check circuit: {n} data, {circuit.ancilla_qubits} ancilla, depth {circuit.depth}"]
    for i, level in enumerate(circuit.levels, start=1):
        gates = " ".join(f"{_name(c, n)}->{_name(t, n)}" for c, t in level)
        lines.append(f"# level {i}: {gates}")
    symbols = {Mechanism.IDLE: "I", Mechanism.PREPARE: "P", Mechanism.MEASURE: "M",
               Mechanism.CNOT_CONTROL: "C", Mechanism.CNOT_TARGET: "T"}
    slots: dict[int, list[str]] = {q: [] for q in range(circuit.n_qubits)}
    for loc in enumerate_fault_locations(circuit):
        slots[loc.qubit].append(symbols[loc.mechanism])
    for q in range(circuit.n_qubits):
        row = [slots[q][0]]
        for level in range(1, circuit.depth + 1):
            wire = {1: "*", 2: "+"}.get(int(roles[level, q]), "-")
            row.append(wire)
            row.append(slots[q][level])
        if q >= n:
            row.append("-")
            row.append(slots[q][-1])
        lines.append(f"{_name(q, n):>4} " + "".join(row))
    return "\n".join(lines) + "\n"


def _name(q: int, n: int) -> str:
    return f"D{q}" if q < n else f"A{q - n}"
