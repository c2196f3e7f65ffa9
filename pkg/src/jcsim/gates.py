"""Gate set with fixed matrix conventions.

Angle conventions (half-angle form throughout):

- ``RZ(t) = diag(exp(-i t/2), exp(+i t/2)) = exp(-i t Z / 2)``
- ``RX(t) = exp(-i t X / 2)``, ``RY(t) = exp(-i t Y / 2)``
- ``H = (X + Z) / sqrt(2)``, so ``H RZ(t) H = RX(t)``
- ``CX``, ``CRZ``, ``CH``: first target is the control
- ``RCCX``: relative-phase Toffoli; see `rccx_truth_table`

Two-and three-qubit matrices are indexed in reading order: ``targets[0]``
is the most significant bit of the matrix index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import apply_operator

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
HADAMARD = (PAULI_X + PAULI_Z) / np.sqrt(2)

GATE_ARITIES = {
    "H": 1,
    "X": 1,
    "RX": 1,
    "RY": 1,
    "RZ": 1,
    "CX": 2,
    "CRZ": 2,
    "CH": 2,
    "RCCX": 3,
}
PARAMETRIC_KINDS = frozenset({"RX", "RY", "RZ", "CRZ"})


@dataclass(frozen=True)
class Gate:
    """One gate application: kind, ordered targets (controls first), angle."""

    kind: str
    targets: tuple[int, ...]
    angle: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        if self.kind not in GATE_ARITIES:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        arity = GATE_ARITIES[self.kind]
        if len(self.targets) != arity:
            raise ValueError(f"{self.kind} takes {arity} targets, got {self.targets}")
        if len(set(self.targets)) != len(self.targets):
            raise ValueError(f"duplicate targets {self.targets}")
        if any(t < 0 for t in self.targets):
            raise ValueError(f"negative target in {self.targets}")
        if self.kind in PARAMETRIC_KINDS:
            if self.angle is None:
                raise ValueError(f"{self.kind} requires an angle")
            object.__setattr__(self, "angle", float(self.angle))
        elif self.angle is not None:
            raise ValueError(f"{self.kind} takes no angle")


def _rx(t: float) -> np.ndarray:
    c, s = np.cos(t / 2), np.sin(t / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


def _ry(t: float) -> np.ndarray:
    c, s = np.cos(t / 2), np.sin(t / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def _rz(t: float) -> np.ndarray:
    return np.diag([np.exp(-1j * t / 2), np.exp(1j * t / 2)]).astype(complex)


def _controlled(u: np.ndarray) -> np.ndarray:
    out = np.eye(4, dtype=complex)
    out[2:, 2:] = u
    return out


def _build_rccx() -> np.ndarray:
    # H-T-CX ladder of the simplified (relative-phase) Toffoli, applied to
    # targets (a, b, c) = (bit2, bit1, bit0) of a 3-qubit register.
    t_gate = np.diag([1.0, np.exp(1j * np.pi / 4)]).astype(complex)
    cx = _controlled(PAULI_X)
    sequence = [
        (HADAMARD, (0,)),
        (t_gate, (0,)),
        (cx, (1, 0)),
        (t_gate.conj().T, (0,)),
        (cx, (2, 0)),
        (t_gate, (0,)),
        (cx, (1, 0)),
        (t_gate.conj().T, (0,)),
        (HADAMARD, (0,)),
    ]
    u = np.eye(8, dtype=complex)
    for column in range(8):
        state = np.zeros(8, dtype=complex)
        state[column] = 1.0
        for matrix, targets in sequence:
            state = apply_operator(state, matrix, targets)
        u[:, column] = state
    u[np.abs(u) < 1e-15] = 0.0
    return u


#: Relative-phase Toffoli on (a, b, c): flips c when a & b, with the frozen
#: phase pattern  |110> -> +i|111>,  |111> -> -i|110>,  |101> -> -|101>,
#: +1 elsewhere.  Squares to the identity, so compute/uncompute pairs around
#: an ancilla prepared in |0> are exactly phase-free.
RCCX_MATRIX = _build_rccx()


def gate_unitary(gate: Gate) -> np.ndarray:
    """Unitary matrix of a gate in reading-order indexing."""
    kind = gate.kind
    if kind == "H":
        return HADAMARD.copy()
    if kind == "X":
        return PAULI_X.copy()
    if kind == "RX":
        return _rx(gate.angle)
    if kind == "RY":
        return _ry(gate.angle)
    if kind == "RZ":
        return _rz(gate.angle)
    if kind == "CX":
        return _controlled(PAULI_X)
    if kind == "CRZ":
        return _controlled(_rz(gate.angle))
    if kind == "CH":
        return _controlled(HADAMARD)
    if kind == "RCCX":
        return RCCX_MATRIX.copy()
    raise ValueError(f"unknown gate kind {kind!r}")


def rccx_truth_table() -> dict[tuple[int, int, int], tuple[tuple[int, int, int], complex]]:
    """Map (a, b, c) -> ((a, b, c xor (a and b)), phase) from `RCCX_MATRIX`."""
    table = {}
    for col in range(8):
        column = RCCX_MATRIX[:, col]
        row = int(np.argmax(np.abs(column)))
        bits_in = ((col >> 2) & 1, (col >> 1) & 1, col & 1)
        bits_out = ((row >> 2) & 1, (row >> 1) & 1, row & 1)
        table[bits_in] = (bits_out, complex(column[row]))
    return table
