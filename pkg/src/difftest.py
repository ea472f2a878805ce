#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Differential testing of quantum variants against their classical oracles.

Unit level: random atom pairs (distance) and random block matrices (eigen).
End to end: the full collective-variable series, classical vs configured.
The hyperparameter sweep runs a unit test per grid cell on identical inputs
and keeps the cell with the smallest MSE.
"""

import itertools
import json
import time
from dataclasses import asdict, dataclass, field, replace
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from .eigensolve import (
    VQE_MAX_DIM,
    AnsatzConfig,
    OptimizerConfig,
    OptimizerKind,
    classical_largest_eigenvalue,
    quantum_largest_eigenvalue,
)
from .errors import ConfigurationError, DimensionError, InvariantViolation
from .pipeline import RunConfig, compute_cv_series, extract_bpm
from .simulator import ReadoutNoiseModel, derive_seed
from .swap_distance import SwapMode, SwapTestConfig, classical_distance_matrix, squared_distance
from .trajectory import gen_trajectory
from .variant_base import Variant

DEFAULT_DISTANCE_THRESHOLD = 1e-2
RELATIVE_EIGEN_TOLERANCE = 1e-2
MIN_THRESHOLD = 1e-12


class Verdict(str, Enum):
    PASS = "pass"
    FAIL = "fail"


@dataclass
class DiffReport:
    task: str
    trials: int
    mse: float
    threshold: float
    verdict: Verdict
    residuals: List[float] = field(default_factory=list)
    config: Dict[str, Any] = field(default_factory=dict)
    timings: Dict[str, float] = field(default_factory=dict)

    def recomputed_verdict(self) -> Verdict:
        value = float(np.mean(np.square(self.residuals))) if self.residuals else self.mse
        return Verdict.PASS if value <= self.threshold else Verdict.FAIL

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["verdict"] = self.verdict.value
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "DiffReport":
        data = dict(data)
        data["verdict"] = Verdict(data["verdict"])
        return cls(**data)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "DiffReport":
        return cls.from_dict(json.loads(text))


def mse(observed: Sequence[float], expected: Sequence[float]) -> float:
    o = np.asarray(observed, dtype=float).reshape(-1)
    e = np.asarray(expected, dtype=float).reshape(-1)
    if o.size == 0 or e.size == 0:
        raise DimensionError("MSE of empty input")
    if o.size != e.size:
        raise DimensionError(f"MSE of {o.size} observed against {e.size} expected values")
    return float(np.mean((o - e) ** 2))


def _report(
    task: str,
    observed: Sequence[float],
    expected: Sequence[float],
    threshold: float,
    config: Dict[str, Any],
    timings: Optional[Dict[str, float]] = None,
) -> DiffReport:
    if threshold <= 0:
        raise ConfigurationError(f"threshold must be positive, got {threshold}")
    value = mse(observed, expected)
    residuals = (np.asarray(observed, dtype=float) - np.asarray(expected, dtype=float)).tolist()
    verdict = Verdict.PASS if value <= threshold else Verdict.FAIL
    logger.info(f"{task}: MSE {value:.6g} vs threshold {threshold:.6g} over {len(residuals)} trial(s) -> {verdict.value}")
    return DiffReport(
        task=task,
        trials=len(residuals),
        mse=value,
        threshold=float(threshold),
        verdict=verdict,
        residuals=residuals,
        config=config,
        timings=timings or {},
    )


def default_eigen_threshold(expected: Sequence[float]) -> float:
    """(1% of the mean classical eigenvalue) squared"""
    return max((RELATIVE_EIGEN_TOLERANCE * float(np.mean(expected))) ** 2, MIN_THRESHOLD)


def _swap_snapshot(cfg: SwapTestConfig) -> Dict[str, Any]:
    return {
        "mode": cfg.mode.value,
        "shots": cfg.shots,
        "mitigate": cfg.mitigate,
        "noise": asdict(cfg.noise) if cfg.noise else None,
    }


def unit_test_distance(
    trials: int,
    cfg: SwapTestConfig,
    threshold: float = DEFAULT_DISTANCE_THRESHOLD,
    seed: int = 0,
) -> DiffReport:
    if trials < 1:
        raise ConfigurationError(f"trials must be >= 1, got {trials}")

    observed, expected = [], []
    for trial in range(trials):
        u, v = gen_trajectory(1, 2, derive_seed(seed, trial)).frames[0]
        trial_cfg = replace(cfg, seed=derive_seed(seed, trial, 1))
        observed.append(squared_distance(u, v, trial_cfg))
        expected.append(float(classical_distance_matrix([u], [v]).entries[0, 0]))

    snapshot = {"seed": seed, "swap": _swap_snapshot(cfg)}
    return _report("distance", observed, expected, threshold, snapshot)


def unit_test_eigen(
    trials: int,
    ansatz_cfg: AnsatzConfig,
    optimizer_cfg: OptimizerConfig,
    threshold: Optional[float] = None,
    seed: int = 0,
    segment_sizes: Tuple[int, int] = (2, 2),
) -> DiffReport:
    if trials < 1:
        raise ConfigurationError(f"trials must be >= 1, got {trials}")
    n1, n2 = segment_sizes
    if n1 < 1 or n2 < 1 or n1 + n2 > VQE_MAX_DIM:
        raise ConfigurationError(f"segment sizes {segment_sizes} do not fit the VQE cap of {VQE_MAX_DIM}")

    observed, expected = [], []
    for trial in range(trials):
        atoms = gen_trajectory(1, n1 + n2, derive_seed(seed, trial)).frames[0]
        bpm = extract_bpm(atoms[:n1], atoms[n1:], classical_distance_matrix)
        expected.append(classical_largest_eigenvalue(bpm))
        lev, _ = quantum_largest_eigenvalue(bpm, ansatz_cfg, replace(optimizer_cfg, seed=derive_seed(seed, trial, 2)))
        observed.append(lev)

    if threshold is None:
        threshold = default_eigen_threshold(expected)
    snapshot = {
        "seed": seed,
        "segment_sizes": list(segment_sizes),
        "depth": ansatz_cfg.depth,
        "optimizer": optimizer_cfg.kind.value,
        "restarts": optimizer_cfg.restarts,
        "max_iterations": optimizer_cfg.max_iterations,
    }
    return _report("eigen", observed, expected, threshold, snapshot)


@dataclass(frozen=True)
class SweepCell:
    index: int
    depth: int
    optimizer: OptimizerKind
    shots: int
    mitigate: bool

    def to_dict(self) -> Dict[str, Any]:
        return {
            "index": self.index,
            "depth": self.depth,
            "optimizer": self.optimizer.value,
            "shots": self.shots,
            "mitigate": self.mitigate,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SweepCell":
        return cls(
            index=data["index"],
            depth=data["depth"],
            optimizer=OptimizerKind(data["optimizer"]),
            shots=data["shots"],
            mitigate=data["mitigate"],
        )

    def label(self) -> str:
        return f"depth={self.depth} optimizer={self.optimizer.value} shots={self.shots} mitigate={'on' if self.mitigate else 'off'}"


@dataclass(frozen=True)
class SweepGrid:
    task: str
    depths: Tuple[int, ...] = (2,)
    optimizers: Tuple[OptimizerKind, ...] = (OptimizerKind.NELDER_MEAD,)
    shots: Tuple[int, ...] = (8192,)
    mitigation: Tuple[bool, ...] = (False,)
    trials: int = 10
    seed: int = 0
    threshold: Optional[float] = None
    noise: Optional[ReadoutNoiseModel] = None
    swap_mode: SwapMode = SwapMode.SAMPLED
    restarts: int = 5
    max_iterations: int = 500

    def __post_init__(self):
        if self.task not in ("distance", "eigen"):
            raise ConfigurationError(f"sweep task must be 'distance' or 'eigen', got {self.task!r}")
        object.__setattr__(self, "optimizers", tuple(OptimizerKind(o) for o in self.optimizers))
        object.__setattr__(self, "swap_mode", SwapMode(self.swap_mode))
        for name in ("depths", "optimizers", "shots", "mitigation"):
            if not getattr(self, name):
                raise ConfigurationError(f"sweep axis '{name}' is empty")
        if self.trials < 1:
            raise ConfigurationError(f"trials must be >= 1, got {self.trials}")

    @property
    def size(self) -> int:
        return len(self.depths) * len(self.optimizers) * len(self.shots) * len(self.mitigation)

    def cells(self) -> List[SweepCell]:
        product = itertools.product(self.depths, self.optimizers, self.shots, self.mitigation)
        return [
            SweepCell(index=i, depth=int(d), optimizer=o, shots=int(s), mitigate=bool(m))
            for i, (d, o, s, m) in enumerate(product)
        ]

    def snapshot(self) -> Dict[str, Any]:
        return {
            "task": self.task,
            "depths": list(self.depths),
            "optimizers": [o.value for o in self.optimizers],
            "shots": list(self.shots),
            "mitigation": list(self.mitigation),
            "trials": self.trials,
            "seed": self.seed,
            "threshold": self.threshold,
            "noise": asdict(self.noise) if self.noise else None,
            "swap_mode": self.swap_mode.value,
            "restarts": self.restarts,
            "max_iterations": self.max_iterations,
        }


@dataclass
class SweepResult:
    grid: Dict[str, Any]
    cells: List[SweepCell]
    reports: List[DiffReport]
    best_index: int
    ties: List[int] = field(default_factory=list)
    tie_break: str = "mse, then fewer shots, smaller depth, mitigation off"

    @property
    def best(self) -> Tuple[SweepCell, DiffReport]:
        return self.cells[self.best_index], self.reports[self.best_index]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "grid": self.grid,
            "cells": [
                {"cell": cell.to_dict(), "report": report.to_dict()}
                for cell, report in zip(self.cells, self.reports)
            ],
            "best_index": self.best_index,
            "ties": self.ties,
            "tie_break": self.tie_break,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SweepResult":
        return cls(
            grid=data["grid"],
            cells=[SweepCell.from_dict(entry["cell"]) for entry in data["cells"]],
            reports=[DiffReport.from_dict(entry["report"]) for entry in data["cells"]],
            best_index=data["best_index"],
            ties=list(data["ties"]),
            tie_break=data["tie_break"],
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "SweepResult":
        return cls.from_dict(json.loads(text))


def _run_cell(grid: SweepGrid, cell: SweepCell) -> DiffReport:
    if grid.task == "distance":
        cfg = SwapTestConfig(
            shots=cell.shots,
            seed=grid.seed,
            noise=grid.noise,
            mitigate=cell.mitigate,
            mode=grid.swap_mode,
        )
        threshold = DEFAULT_DISTANCE_THRESHOLD if grid.threshold is None else grid.threshold
        return unit_test_distance(grid.trials, cfg, threshold, grid.seed)

    optimizer = OptimizerConfig(
        kind=cell.optimizer,
        max_iterations=grid.max_iterations,
        seed=grid.seed,
        restarts=grid.restarts,
    )
    return unit_test_eigen(grid.trials, AnsatzConfig(cell.depth), optimizer, grid.threshold, grid.seed)


def sweep(grid: SweepGrid) -> SweepResult:
    """Run every cell on matched inputs and select the MSE-minimizing configuration"""
    cells = grid.cells()
    reports = []
    for cell in cells:
        logger.info(f"Sweep cell {cell.index + 1}/{len(cells)}: {cell.label()}")
        reports.append(_run_cell(grid, cell))

    def rank(i: int):
        cell = cells[i]
        return (reports[i].mse, cell.shots, cell.depth, cell.mitigate)

    best_index = min(range(len(cells)), key=rank)
    best_mse = reports[best_index].mse
    if any(report.mse < best_mse for report in reports):
        raise InvariantViolation("selected sweep cell is not MSE-minimal")
    ties = [i for i, report in enumerate(reports) if report.mse == best_mse]
    if len(ties) > 1:
        logger.info(f"Sweep tie between cells {ties}, kept cell {best_index}")

    logger.info(f"Best sweep cell: {cells[best_index].label()} (MSE {best_mse:.6g})")
    return SweepResult(grid=grid.snapshot(), cells=cells, reports=reports, best_index=best_index, ties=ties)


async def end_to_end_diff(config: RunConfig, threshold: Optional[float] = None) -> DiffReport:
    """Full CV series of the configured variants against the all-classical run"""
    started = time.perf_counter()
    oracle = await compute_cv_series(config.with_variants(Variant.CLASSICAL, Variant.CLASSICAL))
    oracle_elapsed = time.perf_counter() - started

    started = time.perf_counter()
    candidate = await compute_cv_series(config)
    candidate_elapsed = time.perf_counter() - started

    oracle_keys = [(r.frame, r.pair) for r in oracle.records]
    candidate_keys = [(r.frame, r.pair) for r in candidate.records]
    if oracle_keys != candidate_keys:
        raise InvariantViolation(
            f"series differ in shape: {len(oracle_keys)} classical vs {len(candidate_keys)} variant values"
        )

    expected = oracle.levs
    if threshold is None:
        threshold = default_eigen_threshold(expected)
    timings = {"classical_s": oracle_elapsed, "variant_s": candidate_elapsed} if config.timing else {}
    return _report("end_to_end", candidate.levs, expected, threshold, config.snapshot(), timings)


def render_report(report: DiffReport) -> str:
    rows = [
        ("task", report.task),
        ("trials", str(report.trials)),
        ("mse", f"{report.mse:.6g}"),
        ("threshold", f"{report.threshold:.6g}"),
        ("verdict", report.verdict.value),
    ]
    if report.residuals:
        rows.append(("max |residual|", f"{max(abs(r) for r in report.residuals):.6g}"))
    width = max(len(name) for name, _ in rows)
    return "\n".join(f"{name:<{width}}  {value}" for name, value in rows)


def render_sweep(result: SweepResult) -> str:
    header = ("cell", "depth", "optimizer", "shots", "mitigate", "mse", "verdict", "")
    rows = [header]
    for cell, report in zip(result.cells, result.reports):
        rows.append((
            str(cell.index),
            str(cell.depth),
            cell.optimizer.value,
            str(cell.shots),
            "on" if cell.mitigate else "off",
            f"{report.mse:.6g}",
            report.verdict.value,
            "*" if cell.index == result.best_index else "",
        ))
    widths = [max(len(row[c]) for row in rows) for c in range(len(header))]
    lines = ["  ".join(value.ljust(widths[c]) for c, value in enumerate(row)).rstrip() for row in rows]
    best_cell, best_report = result.best
    lines.append(f"best: {best_cell.label()} mse={best_report.mse:.6g}")
    return "\n".join(lines)
