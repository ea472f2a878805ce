#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Deterministic statevector simulator.

Qubit 0 is the most significant bit of a basis index, so the amplitude of
|q0 q1 ... q(n-1)> sits at position int("q0q1...", 2). Measured bitstrings use
the same convention: the first measured qubit (or clbit 0) is the leftmost
character.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import reduce
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from .errors import (
    ConfigurationError,
    DimensionError,
    InvalidOperationError,
    NumericError,
    SingularityError,
)

MAX_QUBITS = 20
NORM_TOL = 1e-10


def derive_seed(base: int, *indices: int) -> int:
    """Independent, schedule-free seed for the work unit identified by indices"""
    sequence = np.random.SeedSequence([int(base), *(int(i) for i in indices)])
    return int(sequence.generate_state(1, dtype=np.uint32)[0])


class GateKind(str, Enum):
    H = "h"
    X = "x"
    RY = "ry"
    RZ = "rz"
    CX = "cx"
    CZ = "cz"
    CSWAP = "cswap"
    INITIALIZE = "initialize"
    BARRIER = "barrier"


_ARITY = {
    GateKind.H: 1,
    GateKind.X: 1,
    GateKind.RY: 1,
    GateKind.RZ: 1,
    GateKind.CX: 2,
    GateKind.CZ: 2,
    GateKind.CSWAP: 3,
}

_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_CX = np.eye(4, dtype=complex)[[0, 1, 3, 2]]
_CZ = np.diag([1, 1, 1, -1]).astype(complex)
# |c a b>: swap |101> and |110>
_CSWAP = np.eye(8, dtype=complex)[[0, 1, 2, 3, 4, 6, 5, 7]]


@dataclass(frozen=True, eq=False)
class StateVector:
    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amplitudes = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amplitudes.shape[0] != 2 ** self.num_qubits:
            raise DimensionError(
                f"{self.num_qubits} qubits need {2 ** self.num_qubits} amplitudes, got {amplitudes.shape[0]}"
            )
        norm = float(np.vdot(amplitudes, amplitudes).real)
        if abs(norm - 1.0) > NORM_TOL:
            raise NumericError(f"state is not normalized: squared norm {norm!r}")
        amplitudes.setflags(write=False)
        object.__setattr__(self, "amplitudes", amplitudes)

    @property
    def dimension(self) -> int:
        return 2 ** self.num_qubits

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


@dataclass(frozen=True)
class Gate:
    kind: GateKind
    qubits: Tuple[int, ...]
    angle: Optional[float] = None
    amplitudes: Optional[Tuple[complex, ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", GateKind(self.kind))
        qubits = tuple(int(q) for q in self.qubits)
        object.__setattr__(self, "qubits", qubits)

        if len(set(qubits)) != len(qubits):
            raise InvalidOperationError(f"{self.kind.value} operands must be distinct, got {qubits}")
        if any(q < 0 for q in qubits):
            raise InvalidOperationError(f"negative qubit index in {qubits}")

        arity = _ARITY.get(self.kind)
        if arity is not None and len(qubits) != arity:
            raise InvalidOperationError(f"{self.kind.value} takes {arity} qubit(s), got {len(qubits)}")
        if self.kind in (GateKind.RY, GateKind.RZ) and self.angle is None:
            raise InvalidOperationError(f"{self.kind.value} needs an angle")

        if self.kind is GateKind.INITIALIZE:
            if not qubits or self.amplitudes is None:
                raise InvalidOperationError("initialize needs target qubits and amplitudes")
            amplitudes = tuple(complex(a) for a in self.amplitudes)
            if len(amplitudes) != 2 ** len(qubits):
                raise InvalidOperationError(
                    f"initialize on {len(qubits)} qubit(s) needs {2 ** len(qubits)} amplitudes, got {len(amplitudes)}"
                )
            norm = sum(abs(a) ** 2 for a in amplitudes)
            if abs(norm - 1.0) > NORM_TOL:
                raise InvalidOperationError(f"initialize amplitudes are not unit norm: {norm!r}")
            object.__setattr__(self, "amplitudes", amplitudes)

    def matrix(self) -> np.ndarray:
        """Unitary acting on the operand qubits, first operand most significant"""
        if self.kind is GateKind.H:
            return _H
        if self.kind is GateKind.X:
            return _X
        if self.kind is GateKind.RY:
            c, s = math.cos(self.angle / 2), math.sin(self.angle / 2)
            return np.array([[c, -s], [s, c]], dtype=complex)
        if self.kind is GateKind.RZ:
            phase = np.exp(0.5j * self.angle)
            return np.diag([1 / phase, phase])
        if self.kind is GateKind.CX:
            return _CX
        if self.kind is GateKind.CZ:
            return _CZ
        if self.kind is GateKind.CSWAP:
            return _CSWAP
        raise InvalidOperationError(f"{self.kind.value} has no unitary matrix")


@dataclass
class Circuit:
    """Ordered gate program plus (qubit, clbit) measurement map"""

    num_qubits: int
    num_clbits: int = 0
    gates: List[Gate] = field(default_factory=list)
    measurements: List[Tuple[int, int]] = field(default_factory=list)

    def __post_init__(self):
        if not 1 <= self.num_qubits <= MAX_QUBITS:
            raise ConfigurationError(f"circuit needs 1..{MAX_QUBITS} qubits, got {self.num_qubits}")
        if self.num_clbits < 0:
            raise ConfigurationError(f"negative clbit count {self.num_clbits}")
        gates, self.gates = list(self.gates), []
        for gate in gates:
            self.append(gate)
        measurements, self.measurements = list(self.measurements), []
        for qubit, clbit in measurements:
            self.measure(qubit, clbit)

    def append(self, gate: Gate) -> "Circuit":
        if any(q >= self.num_qubits for q in gate.qubits):
            raise InvalidOperationError(
                f"{gate.kind.value} on {gate.qubits} does not fit a {self.num_qubits}-qubit circuit"
            )
        self.gates.append(gate)
        return self

    def h(self, qubit: int) -> "Circuit":
        return self.append(Gate(GateKind.H, (qubit,)))

    def x(self, qubit: int) -> "Circuit":
        return self.append(Gate(GateKind.X, (qubit,)))

    def ry(self, angle: float, qubit: int) -> "Circuit":
        return self.append(Gate(GateKind.RY, (qubit,), angle=float(angle)))

    def rz(self, angle: float, qubit: int) -> "Circuit":
        return self.append(Gate(GateKind.RZ, (qubit,), angle=float(angle)))

    def cx(self, control: int, target: int) -> "Circuit":
        return self.append(Gate(GateKind.CX, (control, target)))

    def cz(self, first: int, second: int) -> "Circuit":
        return self.append(Gate(GateKind.CZ, (first, second)))

    def cswap(self, control: int, first: int, second: int) -> "Circuit":
        return self.append(Gate(GateKind.CSWAP, (control, first, second)))

    def initialize(self, amplitudes: Sequence[complex], qubits: Sequence[int]) -> "Circuit":
        return self.append(Gate(GateKind.INITIALIZE, tuple(qubits), amplitudes=tuple(amplitudes)))

    def barrier(self) -> "Circuit":
        return self.append(Gate(GateKind.BARRIER, tuple(range(self.num_qubits))))

    def measure(self, qubit: int, clbit: int) -> "Circuit":
        if not 0 <= qubit < self.num_qubits:
            raise InvalidOperationError(f"measured qubit {qubit} out of range")
        if not 0 <= clbit < self.num_clbits:
            raise InvalidOperationError(f"clbit {clbit} out of range")
        if any(c == clbit for _, c in self.measurements):
            raise InvalidOperationError(f"clbit {clbit} is already written")
        self.measurements.append((qubit, clbit))
        return self

    @property
    def measured_qubits(self) -> List[int]:
        """Measured qubits ordered by the clbit they are written to"""
        return [q for q, _ in sorted(self.measurements, key=lambda m: m[1])]


@dataclass(frozen=True)
class ReadoutNoiseModel:
    """Independent per-bit readout flips: p01 = P(read 1 | 0), p10 = P(read 0 | 1)"""

    p01: float = 0.0
    p10: float = 0.0

    def __post_init__(self):
        for name in ("p01", "p10"):
            value = float(getattr(self, name))
            if not 0.0 <= value <= 1.0:
                raise ConfigurationError(f"{name} must lie in [0, 1], got {value}")
            object.__setattr__(self, name, value)

    def confusion(self, num_bits: int) -> np.ndarray:
        single = np.array([[1 - self.p01, self.p10], [self.p01, 1 - self.p10]])
        return reduce(np.kron, [single] * num_bits)


@dataclass(frozen=True)
class CountsHistogram:
    counts: Dict[str, int]
    total_shots: int
    num_bits: int

    def __post_init__(self):
        if self.total_shots <= 0:
            raise ConfigurationError(f"total_shots must be positive, got {self.total_shots}")
        if any(c < 0 for c in self.counts.values()):
            raise NumericError("negative count in histogram")
        if sum(self.counts.values()) != self.total_shots:
            raise NumericError(f"counts sum to {sum(self.counts.values())}, expected {self.total_shots}")

    def frequency(self, bitstring: str) -> float:
        return self.counts.get(bitstring, 0) / self.total_shots

    def frequencies(self) -> Dict[str, float]:
        return {
            _bitstring(i, self.num_bits): self.frequency(_bitstring(i, self.num_bits))
            for i in range(2 ** self.num_bits)
        }


@dataclass(frozen=True, eq=False)
class CalibrationMatrix:
    """Entry (i, j) is P(read i | true j)"""

    matrix: np.ndarray
    num_bits: int

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=float)
        size = 2 ** self.num_bits
        if matrix.shape != (size, size):
            raise DimensionError(f"calibration for {self.num_bits} bit(s) must be {size}x{size}")
        if np.any(matrix < -1e-12) or np.any(matrix > 1 + 1e-12):
            raise NumericError("calibration entries must lie in [0, 1]")
        if not np.allclose(matrix.sum(axis=0), 1.0, rtol=0, atol=NORM_TOL):
            raise NumericError("calibration columns must sum to 1")
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)


def _bitstring(index: int, num_bits: int) -> str:
    return format(index, f"0{num_bits}b")


def _to_vector(distribution: Mapping[str, float]) -> Tuple[np.ndarray, int]:
    if not distribution:
        raise NumericError("empty distribution")
    widths = {len(key) for key in distribution}
    if len(widths) != 1:
        raise DimensionError(f"bitstrings of mixed width: {sorted(widths)}")
    num_bits = widths.pop()
    vector = np.zeros(2 ** num_bits)
    for key, value in distribution.items():
        if set(key) - {"0", "1"}:
            raise DimensionError(f"not a bitstring: {key!r}")
        vector[int(key, 2)] += float(value)
    return vector, num_bits


def _to_map(vector: np.ndarray, num_bits: int) -> Dict[str, float]:
    return {_bitstring(i, num_bits): float(v) for i, v in enumerate(vector)}


def new_zero_state(num_qubits: int) -> StateVector:
    if not isinstance(num_qubits, (int, np.integer)) or not 1 <= num_qubits <= MAX_QUBITS:
        raise ConfigurationError(f"qubit count must be in 1..{MAX_QUBITS}, got {num_qubits}")
    amplitudes = np.zeros(2 ** int(num_qubits), dtype=complex)
    amplitudes[0] = 1.0
    return StateVector(int(num_qubits), amplitudes)


def _apply_matrix(amplitudes: np.ndarray, matrix: np.ndarray, targets: Tuple[int, ...], num_qubits: int) -> np.ndarray:
    k = len(targets)
    psi = amplitudes.reshape((2,) * num_qubits)
    op = matrix.reshape((2,) * (2 * k))
    out = np.tensordot(op, psi, axes=(list(range(k, 2 * k)), list(targets)))
    out = np.moveaxis(out, list(range(k)), list(targets))
    return out.reshape(-1)


def _initialize(state: StateVector, gate: Gate) -> StateVector:
    n = state.num_qubits
    targets = gate.qubits
    k = len(targets)
    psi = state.amplitudes.reshape((2,) * n)

    # The register must be exactly |0...0> (hence a product with the rest)
    index = tuple(0 if axis in targets else slice(None) for axis in range(n))
    rest = np.asarray(psi[index])
    weight = float(np.vdot(rest, rest).real)
    if abs(weight - 1.0) > NORM_TOL:
        raise InvalidOperationError(
            f"initialize on {targets} needs a fresh |0> register, found weight {weight:.6g} on |0...0>"
        )

    block = np.asarray(gate.amplitudes, dtype=complex).reshape((2,) * k)
    new = np.multiply.outer(rest, block)
    new = np.moveaxis(new, list(range(n - k, n)), list(targets))
    return StateVector(n, new.reshape(-1))


def apply_gate(state: StateVector, gate: Gate) -> StateVector:
    if any(q >= state.num_qubits for q in gate.qubits):
        raise InvalidOperationError(
            f"{gate.kind.value} on {gate.qubits} does not fit a {state.num_qubits}-qubit state"
        )
    if gate.kind is GateKind.BARRIER:
        return state
    if gate.kind is GateKind.INITIALIZE:
        return _initialize(state, gate)
    amplitudes = _apply_matrix(state.amplitudes, gate.matrix(), gate.qubits, state.num_qubits)
    return StateVector(state.num_qubits, amplitudes)


def run_circuit(circuit: Circuit) -> StateVector:
    """Evolve |0...0> through every gate of the circuit"""
    state = new_zero_state(circuit.num_qubits)
    for gate in circuit.gates:
        state = apply_gate(state, gate)
    return state


def exact_probabilities(state: StateVector, measured_qubits: Sequence[int]) -> Dict[str, float]:
    """Born-rule marginal over the measured qubits, keyed by bitstring"""
    qubits = [int(q) for q in measured_qubits]
    if not qubits:
        raise InvalidOperationError("no qubits to measure")
    if len(set(qubits)) != len(qubits):
        raise InvalidOperationError(f"measured qubits must be distinct, got {qubits}")
    if any(not 0 <= q < state.num_qubits for q in qubits):
        raise InvalidOperationError(f"measured qubit out of range in {qubits}")

    n = state.num_qubits
    probs = state.probabilities().reshape((2,) * n)
    others = tuple(axis for axis in range(n) if axis not in qubits)
    marginal = probs.sum(axis=others) if others else probs

    # summed array keeps the measured axes in ascending order
    ascending = sorted(qubits)
    marginal = np.transpose(marginal, [ascending.index(q) for q in qubits]).reshape(-1)
    return _to_map(marginal, len(qubits))


def sample_counts(probabilities: Mapping[str, float], shots: int, seed: int) -> CountsHistogram:
    if shots <= 0:
        raise ConfigurationError(f"shots must be positive, got {shots}")
    vector, num_bits = _to_vector(probabilities)
    if np.any(vector < -1e-12) or abs(vector.sum() - 1.0) > 1e-8:
        raise NumericError(f"distribution is not normalized (sum {vector.sum()!r})")

    vector = np.clip(vector, 0.0, None)
    vector = vector / vector.sum()
    rng = np.random.default_rng(seed)
    draws = rng.multinomial(shots, vector)
    counts = {_bitstring(i, num_bits): int(c) for i, c in enumerate(draws) if c > 0}
    return CountsHistogram(counts=counts, total_shots=int(shots), num_bits=num_bits)


def apply_readout_noise(probabilities: Mapping[str, float], noise: ReadoutNoiseModel) -> Dict[str, float]:
    vector, num_bits = _to_vector(probabilities)
    return _to_map(noise.confusion(num_bits) @ vector, num_bits)


def build_calibration_matrix(noise: ReadoutNoiseModel, num_bits: int) -> CalibrationMatrix:
    if num_bits < 1:
        raise ConfigurationError(f"calibration needs at least one bit, got {num_bits}")
    if noise.p01 + noise.p10 >= 1.0:
        raise SingularityError(f"p01 + p10 = {noise.p01 + noise.p10} >= 1, calibration is singular")
    return CalibrationMatrix(noise.confusion(num_bits), num_bits)


def mitigate_probabilities(distribution: Mapping[str, float], calibration: CalibrationMatrix) -> Dict[str, float]:
    """Solve calibration . x = distribution, clip negatives and renormalize"""
    vector, num_bits = _to_vector(distribution)
    if num_bits != calibration.num_bits:
        raise DimensionError(f"{num_bits}-bit data against a {calibration.num_bits}-bit calibration")
    if np.linalg.cond(calibration.matrix) > 1e12:
        raise SingularityError("calibration matrix is numerically singular")
    try:
        solution = np.linalg.solve(calibration.matrix, vector)
    except np.linalg.LinAlgError as e:
        raise SingularityError(f"calibration solve failed: {e}")

    solution = np.clip(solution, 0.0, None)
    total = solution.sum()
    if total <= 0:
        raise NumericError("mitigated distribution has no positive mass")
    return _to_map(solution / total, num_bits)


def mitigate_counts(counts: CountsHistogram, calibration: CalibrationMatrix) -> Dict[str, float]:
    return mitigate_probabilities(counts.frequencies(), calibration)


def expectation(state: StateVector, hermitian: np.ndarray) -> float:
    """<psi|H|psi> for a dense Hermitian matrix"""
    matrix = np.asarray(hermitian, dtype=complex)
    if matrix.shape != (state.dimension, state.dimension):
        raise DimensionError(f"operator of shape {matrix.shape} on a {state.dimension}-dimensional state")
    if not np.allclose(matrix, matrix.conj().T, rtol=0, atol=1e-10):
        raise NumericError("operator is not Hermitian")
    value = np.vdot(state.amplitudes, matrix @ state.amplitudes)
    if abs(value.imag) > 1e-10:
        logger.warning(f"expectation has imaginary residue {value.imag:.3g}")
    return float(value.real)
