#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""Squared Euclidean distances from the swap test, plus the classical oracle."""

from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional, Sequence

import numpy as np
from loguru import logger
from scipy.spatial import distance

from .encoding import EncodedPair, encode_pair
from .errors import ConfigurationError, DimensionError, InvalidOperationError
from .simulator import (
    Circuit,
    ReadoutNoiseModel,
    apply_readout_noise,
    build_calibration_matrix,
    derive_seed,
    exact_probabilities,
    mitigate_counts,
    run_circuit,
    sample_counts,
)


class SwapMode(str, Enum):
    EXACT = "exact"
    SAMPLED = "sampled"


class Provenance(str, Enum):
    CLASSICAL = "classical"
    QUANTUM = "quantum"


@dataclass(frozen=True)
class SwapTestConfig:
    shots: int = 8192
    seed: int = 0
    noise: Optional[ReadoutNoiseModel] = None
    mitigate: bool = False
    mode: SwapMode = SwapMode.SAMPLED

    def __post_init__(self):
        object.__setattr__(self, "mode", SwapMode(self.mode))
        if self.mode is SwapMode.SAMPLED and self.shots <= 0:
            raise ConfigurationError(f"sampled swap test needs positive shots, got {self.shots}")
        if self.seed < 0:
            raise ConfigurationError(f"seed must be non-negative, got {self.seed}")


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    """Squared distances d_ij between atom i of one segment and atom j of another"""

    entries: np.ndarray
    provenance: Provenance

    @property
    def shape(self):
        return self.entries.shape


def build_swap_test_circuit(pair: EncodedPair) -> Circuit:
    """
    Qubit 0 is the ancilla, qubit 1 holds phi, qubits 2.. hold psi with its
    atom-selector qubit first. The CSWAP exchanges phi with that selector.
    """
    psi_start = 2
    num_qubits = psi_start + pair.psi_qubits
    circuit = Circuit(num_qubits=num_qubits, num_clbits=1)
    circuit.initialize(pair.phi, [1])
    circuit.initialize(pair.psi, list(range(psi_start, num_qubits)))
    circuit.h(0)
    circuit.cswap(0, 1, psi_start)
    circuit.h(0)
    circuit.measure(0, 0)
    return circuit


def build_overlap_circuit(first: Sequence[complex], second: Sequence[complex]) -> Circuit:
    """Register-wide swap test: P(0) = 1/2 + |<first|second>|^2 / 2"""
    a = np.asarray(first, dtype=complex).reshape(-1)
    b = np.asarray(second, dtype=complex).reshape(-1)
    if a.size != b.size or a.size < 2 or a.size & (a.size - 1):
        raise DimensionError(f"registers need equal power-of-two sizes, got {a.size} and {b.size}")

    width = a.size.bit_length() - 1
    circuit = Circuit(num_qubits=1 + 2 * width, num_clbits=1)
    first_reg = list(range(1, 1 + width))
    second_reg = list(range(1 + width, 1 + 2 * width))
    circuit.initialize(a, first_reg)
    circuit.initialize(b, second_reg)
    circuit.h(0)
    for q1, q2 in zip(first_reg, second_reg):
        circuit.cswap(0, q1, q2)
    circuit.h(0)
    circuit.measure(0, 0)
    return circuit


def estimate_p0(circuit: Circuit, cfg: SwapTestConfig) -> float:
    if len(circuit.measurements) != 1:
        raise InvalidOperationError(f"expected exactly one measured bit, got {len(circuit.measurements)}")

    state = run_circuit(circuit)
    probabilities = exact_probabilities(state, circuit.measured_qubits)
    if cfg.mode is SwapMode.EXACT:
        return probabilities["0"]

    if cfg.shots <= 0:
        raise ConfigurationError(f"sampled swap test needs positive shots, got {cfg.shots}")

    noise = cfg.noise
    if noise is not None:
        probabilities = apply_readout_noise(probabilities, noise)
    counts = sample_counts(probabilities, cfg.shots, cfg.seed)

    if cfg.mitigate:
        calibration = build_calibration_matrix(noise or ReadoutNoiseModel(), 1)
        return mitigate_counts(counts, calibration)["0"]
    return counts.frequency("0")


def distance_from_p0(p0: float, norm_factor: float) -> float:
    """|u - v|^2 = 2 Z (2 P(0) - 1), clipped at zero"""
    value = 2.0 * norm_factor * (2.0 * p0 - 1.0)
    if value < 0.0:
        if value < -1e-9:
            logger.debug(f"Clipped negative distance estimate {value:.6g} (P0={p0:.6g})")
        return 0.0
    return value


def squared_distance(u: Sequence[float], v: Sequence[float], cfg: SwapTestConfig) -> float:
    pair = encode_pair(u, v)
    p0 = estimate_p0(build_swap_test_circuit(pair), cfg)
    return distance_from_p0(p0, pair.norm_factor)


def _check_segments(seg_a, seg_b):
    a = np.atleast_2d(np.asarray(seg_a, dtype=float))
    b = np.atleast_2d(np.asarray(seg_b, dtype=float))
    if a.shape[0] == 0 or b.shape[0] == 0 or a.size == 0 or b.size == 0:
        raise DimensionError("segments must be non-empty")
    if a.shape[1] != b.shape[1]:
        raise DimensionError(f"segments have coordinate dimensions {a.shape[1]} and {b.shape[1]}")
    return a, b


def quantum_distance_matrix(seg_a, seg_b, cfg: SwapTestConfig) -> DistanceMatrix:
    a, b = _check_segments(seg_a, seg_b)
    entries = np.zeros((a.shape[0], b.shape[0]))
    for i, atom_a in enumerate(a):
        for j, atom_b in enumerate(b):
            entry_cfg = replace(cfg, seed=derive_seed(cfg.seed, i, j))
            entries[i, j] = squared_distance(atom_a, atom_b, entry_cfg)
    return DistanceMatrix(entries=entries, provenance=Provenance.QUANTUM)


def classical_distance_matrix(seg_a, seg_b) -> DistanceMatrix:
    a, b = _check_segments(seg_a, seg_b)
    return DistanceMatrix(entries=distance.cdist(a, b, "sqeuclidean"), provenance=Provenance.CLASSICAL)
