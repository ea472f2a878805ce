#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""Largest eigenvalue of block distance matrices: cyclic Jacobi oracle and VQE."""

import time
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from .encoding import matrix_operator
from .errors import ConfigurationError, DimensionError, NumericError
from .optimizers import nelder_mead, spsa
from .simulator import Circuit, StateVector, derive_seed, expectation, run_circuit

JACOBI_MAX_DIM = 64
VQE_MAX_DIM = 16


def _symmetric(matrix: np.ndarray, max_dim: int) -> np.ndarray:
    a = np.array(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise DimensionError(f"expected a non-empty square matrix, got shape {a.shape}")
    if a.shape[0] > max_dim:
        raise ConfigurationError(f"matrix dimension {a.shape[0]} exceeds the cap of {max_dim}")
    if not np.allclose(a, a.T, rtol=0, atol=1e-10):
        raise NumericError("matrix is not symmetric")
    return (a + a.T) / 2


def jacobi_eigenvalues(matrix: np.ndarray, tolerance: float = 1e-12, max_sweeps: int = 100) -> np.ndarray:
    """All eigenvalues, ascending, by cyclic Jacobi rotations"""
    a = _symmetric(matrix, JACOBI_MAX_DIM)
    n = a.shape[0]
    threshold = tolerance * max(1.0, float(np.linalg.norm(a)))

    for sweep in range(max_sweeps):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off < threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if a[p, q] == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * a[p, q])
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta ** 2 + 1.0)) if theta != 0.0 else 1.0
                c = 1.0 / np.sqrt(t ** 2 + 1.0)
                s = t * c

                col_p, col_q = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p, row_q = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = a[q, p] = 0.0
    else:
        logger.warning(f"Jacobi stopped after {max_sweeps} sweeps without reaching tolerance")

    return np.sort(np.diag(a))


def classical_largest_eigenvalue(bpm: np.ndarray) -> float:
    return float(jacobi_eigenvalues(bpm)[-1])


class OptimizerKind(str, Enum):
    NELDER_MEAD = "nelder_mead"
    SPSA = "spsa"


@dataclass(frozen=True)
class AnsatzConfig:
    depth: int = 2

    def __post_init__(self):
        if self.depth < 0:
            raise ConfigurationError(f"ansatz depth must be >= 0, got {self.depth}")


@dataclass(frozen=True)
class Ansatz:
    """
    Hardware-efficient ansatz: `depth` blocks of (RY on every qubit, CZ chain),
    closed by a final RY layer. Depth 0 is a single RY layer.
    """

    num_qubits: int
    depth: int = 2

    def __post_init__(self):
        if self.num_qubits < 1:
            raise ConfigurationError(f"ansatz needs at least one qubit, got {self.num_qubits}")
        if self.depth < 0:
            raise ConfigurationError(f"ansatz depth must be >= 0, got {self.depth}")

    @property
    def num_parameters(self) -> int:
        return self.num_qubits * (self.depth + 1)

    def circuit(self, theta: Sequence[float]) -> Circuit:
        theta = np.asarray(theta, dtype=float).reshape(-1)
        if theta.size != self.num_parameters:
            raise ConfigurationError(f"ansatz takes {self.num_parameters} parameters, got {theta.size}")

        n = self.num_qubits
        circuit = Circuit(num_qubits=n)
        for layer in range(self.depth + 1):
            for q in range(n):
                circuit.ry(theta[layer * n + q], q)
            if layer < self.depth:
                for q in range(n - 1):
                    circuit.cz(q, q + 1)
        return circuit


@dataclass(frozen=True)
class OptimizerConfig:
    kind: OptimizerKind = OptimizerKind.NELDER_MEAD
    max_iterations: int = 500
    tolerance: float = 1e-6
    seed: int = 0
    restarts: int = 5

    def __post_init__(self):
        object.__setattr__(self, "kind", OptimizerKind(self.kind))
        if self.max_iterations <= 0:
            raise ConfigurationError(f"max_iterations must be positive, got {self.max_iterations}")
        if self.restarts < 1:
            raise ConfigurationError(f"restarts must be >= 1, got {self.restarts}")
        if self.tolerance <= 0:
            raise ConfigurationError(f"tolerance must be positive, got {self.tolerance}")
        if self.seed < 0:
            raise ConfigurationError(f"seed must be non-negative, got {self.seed}")


@dataclass
class VQEResult:
    eigenvalue_estimate: float
    optimal_theta: np.ndarray
    trace: List[float] = field(default_factory=list)
    elapsed: float = 0.0
    restart_values: List[float] = field(default_factory=list)


def ansatz_state(ansatz: Ansatz, theta: Sequence[float]) -> StateVector:
    return run_circuit(ansatz.circuit(theta))


def vqe_cost(ansatz: Ansatz, theta: Sequence[float], hamiltonian: np.ndarray) -> float:
    return expectation(ansatz_state(ansatz, theta), hamiltonian)


def run_vqe(
    hamiltonian: np.ndarray,
    ansatz: Ansatz,
    optimizer: OptimizerConfig,
    initial_theta: Optional[Sequence[float]] = None,
) -> VQEResult:
    """
    Best of `optimizer.restarts` independent minimizations of <psi(theta)|H|psi(theta)>.

    Restart r draws its start point uniformly from [0, 1) with seed
    derive_seed(optimizer.seed, r); a given initial_theta replaces the draw
    of restart 0.
    """
    h = np.asarray(hamiltonian, dtype=complex)
    if h.shape != (2 ** ansatz.num_qubits, 2 ** ansatz.num_qubits):
        raise DimensionError(f"{ansatz.num_qubits}-qubit ansatz cannot evaluate an operator of shape {h.shape}")
    if initial_theta is not None and len(initial_theta) != ansatz.num_parameters:
        raise ConfigurationError(
            f"initial_theta has {len(initial_theta)} entries, ansatz takes {ansatz.num_parameters}"
        )

    started = time.perf_counter()
    best: Optional[VQEResult] = None
    restart_values: List[float] = []

    for restart in range(optimizer.restarts):
        rng = np.random.default_rng(derive_seed(optimizer.seed, restart))
        if restart == 0 and initial_theta is not None:
            theta0 = np.asarray(initial_theta, dtype=float)
        else:
            theta0 = rng.random(ansatz.num_parameters)

        trace: List[float] = []
        best_point = {"value": np.inf, "theta": theta0}

        def objective(theta: np.ndarray) -> float:
            value = vqe_cost(ansatz, theta, h)
            trace.append(value)
            if value < best_point["value"]:
                best_point["value"] = value
                best_point["theta"] = np.array(theta, dtype=float)
            return value

        if optimizer.kind is OptimizerKind.SPSA:
            spsa(objective, theta0, optimizer.max_iterations, optimizer.tolerance, rng)
        else:
            nelder_mead(objective, theta0, optimizer.max_iterations, optimizer.tolerance)

        value = float(min(trace))
        restart_values.append(value)
        logger.debug(f"VQE restart {restart}: cost {value:.10g} after {len(trace)} evaluations")
        if best is None or value < best.eigenvalue_estimate:
            best = VQEResult(eigenvalue_estimate=value, optimal_theta=best_point["theta"], trace=trace)

    best.elapsed = time.perf_counter() - started
    best.restart_values = restart_values
    return best


def quantum_largest_eigenvalue(
    bpm: np.ndarray,
    ansatz_cfg: AnsatzConfig,
    optimizer_cfg: OptimizerConfig,
) -> Tuple[float, float]:
    """Largest eigenvalue of bpm as minus the VQE ground energy of -padded(bpm)"""
    matrix = np.asarray(bpm, dtype=float)
    if matrix.ndim == 2 and matrix.shape[0] > VQE_MAX_DIM:
        raise ConfigurationError(
            f"matrix dimension {matrix.shape[0]} exceeds the VQE cap of {VQE_MAX_DIM}; use the classical eigen variant"
        )
    hamiltonian, num_qubits = matrix_operator(matrix)
    result = run_vqe(hamiltonian, Ansatz(num_qubits, ansatz_cfg.depth), optimizer_cfg)
    return -result.eigenvalue_estimate, result.elapsed
