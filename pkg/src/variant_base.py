#!/usr/bin/env python3
# -*- coding: utf-8 -*-

from enum import Enum
from typing import Protocol, Tuple

import numpy as np

from .swap_distance import DistanceMatrix


class Variant(str, Enum):
    CLASSICAL = "classical"
    QUANTUM = "quantum"


class DistanceTask(Protocol):
    variant: Variant

    def distance_matrix(
        self,
        seg_a: np.ndarray,
        seg_b: np.ndarray,
        seed: int,
    ) -> DistanceMatrix:
        ...


class EigenTask(Protocol):
    variant: Variant

    def largest_eigenvalue(
        self,
        bpm: np.ndarray,
        seed: int,
    ) -> Tuple[float, float]:
        ...
