#!/usr/bin/env python3
# -*- coding: utf-8 -*-

import time
from dataclasses import replace
from typing import Tuple

import numpy as np
from loguru import logger

from .eigensolve import AnsatzConfig, OptimizerConfig, classical_largest_eigenvalue, quantum_largest_eigenvalue
from .swap_distance import DistanceMatrix, SwapTestConfig, classical_distance_matrix, quantum_distance_matrix
from .variant_base import DistanceTask, EigenTask, Variant


class ClassicalDistance:
    variant = Variant.CLASSICAL

    def distance_matrix(self, seg_a: np.ndarray, seg_b: np.ndarray, seed: int) -> DistanceMatrix:
        return classical_distance_matrix(seg_a, seg_b)


class QuantumDistance:
    variant = Variant.QUANTUM

    def __init__(self, swap: SwapTestConfig):
        self.swap = swap

    def distance_matrix(self, seg_a: np.ndarray, seg_b: np.ndarray, seed: int) -> DistanceMatrix:
        return quantum_distance_matrix(seg_a, seg_b, replace(self.swap, seed=seed))


class ClassicalEigen:
    variant = Variant.CLASSICAL

    def largest_eigenvalue(self, bpm: np.ndarray, seed: int) -> Tuple[float, float]:
        start = time.perf_counter()
        lev = classical_largest_eigenvalue(bpm)
        return lev, time.perf_counter() - start


class QuantumEigen:
    variant = Variant.QUANTUM

    def __init__(self, ansatz: AnsatzConfig, optimizer: OptimizerConfig):
        self.ansatz = ansatz
        self.optimizer = optimizer

    def largest_eigenvalue(self, bpm: np.ndarray, seed: int) -> Tuple[float, float]:
        return quantum_largest_eigenvalue(bpm, self.ansatz, replace(self.optimizer, seed=seed))


def get_distance_task(variant: Variant, swap: SwapTestConfig) -> DistanceTask:
    """
    Task 4 implementation for the requested variant.

    - "classical": squared Euclidean distances via scipy cdist
    - "quantum": one swap-test circuit per atom pair
    """
    variant = Variant(variant)
    logger.debug(f"Distance task variant: {variant.value}")
    if variant is Variant.QUANTUM:
        return QuantumDistance(swap)
    return ClassicalDistance()


def get_eigen_task(variant: Variant, ansatz: AnsatzConfig, optimizer: OptimizerConfig) -> EigenTask:
    """
    Task 5 implementation for the requested variant.

    - "classical": cyclic Jacobi
    - "quantum": VQE on the negated, padded matrix
    """
    variant = Variant(variant)
    logger.debug(f"Eigen task variant: {variant.value}")
    if variant is Variant.QUANTUM:
        return QuantumEigen(ansatz, optimizer)
    return ClassicalEigen()
