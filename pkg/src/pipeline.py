#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
The five-task collective-variable workflow.

1 input -> 2 read trajectory -> 3 segment evolution/pairing -> 4 distances
(block matrix) -> 5 largest eigenvalue. Tasks 4 and 5 are quantum candidates
and dispatch to the classical or quantum variant chosen in the RunConfig.
"""

import asyncio
import csv
import io
import time
from dataclasses import asdict, dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Callable, Dict, FrozenSet, List, Mapping, Optional, Tuple, Union

import numpy as np
from loguru import logger

from .eigensolve import VQE_MAX_DIM, AnsatzConfig, OptimizerConfig, classical_largest_eigenvalue
from .errors import ConfigurationError, InvariantViolation, TaskFailure
from .simulator import derive_seed
from .swap_distance import DistanceMatrix, SwapTestConfig
from .trajectory import Trajectory, gen_trajectory, read_trajectory
from .variant_base import DistanceTask, EigenTask, Variant
from .variants import get_distance_task, get_eigen_task

TASKS: Tuple[Tuple[int, str], ...] = (
    (1, "input"),
    (2, "read_trajectory"),
    (3, "segment_evolution"),
    (4, "distance"),
    (5, "eigenvalue"),
)
TASK_NAMES = tuple(name for _, name in TASKS)

CSV_HEADER = ("frame", "pair", "lev", "variant_distance", "variant_eigen", "elapsed_s")


class TaskClass(str, Enum):
    CLASSIC = "classic"
    QUANTUM_CANDIDATE = "quantum_candidate"


@dataclass(frozen=True)
class SegmentSpec:
    index_groups: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        groups = tuple(tuple(int(i) for i in group) for group in self.index_groups)
        object.__setattr__(self, "index_groups", groups)
        if len(groups) < 2:
            raise ConfigurationError(f"at least two segment groups are needed, got {len(groups)}")
        seen = set()
        for number, group in enumerate(groups):
            if not group:
                raise ConfigurationError(f"segment group {number} is empty")
            if any(i < 0 for i in group):
                raise ConfigurationError(f"negative atom index in segment group {number}")
            overlap = seen.intersection(group)
            if overlap or len(set(group)) != len(group):
                raise ConfigurationError(f"segment group {number} repeats atom indices {sorted(overlap) or list(group)}")
            seen.update(group)

    @property
    def num_pairs(self) -> int:
        n = len(self.index_groups)
        return n * (n - 1) // 2

    def validate_for(self, num_atoms: int) -> None:
        for number, group in enumerate(self.index_groups):
            bad = [i for i in group if i >= num_atoms]
            if bad:
                raise ConfigurationError(
                    f"segment group {number} references atoms {bad}, trajectory has {num_atoms}"
                )


def _parse_range(text: str) -> List[int]:
    text = text.strip()
    try:
        if "-" in text:
            start, stop = (int(part) for part in text.split("-", 1))
            if stop < start:
                raise ConfigurationError(f"descending atom range {text!r}")
            return list(range(start, stop + 1))
        return [int(text)]
    except ValueError:
        raise ConfigurationError(f"malformed atom range {text!r}")


def parse_segment_spec(text: str) -> SegmentSpec:
    """
    "0-3;4-7" or "0-1,5;2-4": groups split on ';', ranges inside a group on ','.
    Without any ';' every comma-separated range is its own group ("0-3,4-7").
    """
    if not text or not text.strip():
        raise ConfigurationError("empty segment specification")
    if ";" in text:
        groups = []
        for chunk in text.split(";"):
            if not chunk.strip():
                raise ConfigurationError(f"empty segment group in {text!r}")
            groups.append(tuple(i for part in chunk.split(",") for i in _parse_range(part)))
    else:
        groups = [tuple(_parse_range(part)) for part in text.split(",")]
    return SegmentSpec(tuple(groups))


def _default_variants() -> Dict[str, Variant]:
    return {"distance": Variant.CLASSICAL, "eigenvalue": Variant.CLASSICAL}


@dataclass(frozen=True)
class RunConfig:
    """
    Everything a run needs. Without `trajectory` a synthetic trajectory of
    `frames` x `atoms` is generated from `seed`.
    """

    segments: SegmentSpec
    trajectory: Optional[Path] = None
    frames: int = 3
    atoms: int = 4
    variants: Mapping[str, Variant] = field(default_factory=_default_variants)
    swap: SwapTestConfig = SwapTestConfig()
    ansatz: AnsatzConfig = AnsatzConfig()
    optimizer: OptimizerConfig = OptimizerConfig()
    output: Optional[Path] = None
    seed: int = 0
    jobs: int = 1
    timing: bool = False

    def __post_init__(self):
        if self.seed < 0:
            raise ConfigurationError(f"seed must be non-negative, got {self.seed}")
        if self.jobs < 1:
            raise ConfigurationError(f"jobs must be >= 1, got {self.jobs}")
        variants = dict(_default_variants())
        for name, variant in dict(self.variants).items():
            try:
                variants[name] = Variant(variant)
            except ValueError:
                raise ConfigurationError(f"unknown variant {variant!r} for task {name!r}")
        object.__setattr__(self, "variants", variants)

    @property
    def distance_variant(self) -> Variant:
        return self.variants["distance"]

    @property
    def eigen_variant(self) -> Variant:
        return self.variants["eigenvalue"]

    def with_variants(self, distance: Variant, eigen: Variant) -> "RunConfig":
        return replace(self, variants={"distance": Variant(distance), "eigenvalue": Variant(eigen)})

    def snapshot(self) -> Dict[str, object]:
        """JSON-friendly view used in reports"""
        swap = asdict(self.swap)
        swap["mode"] = self.swap.mode.value
        optimizer = asdict(self.optimizer)
        optimizer["kind"] = self.optimizer.kind.value
        return {
            "segments": [list(group) for group in self.segments.index_groups],
            "trajectory": str(self.trajectory) if self.trajectory else None,
            "frames": self.frames,
            "atoms": self.atoms,
            "variants": {name: variant.value for name, variant in sorted(self.variants.items())},
            "swap": swap,
            "ansatz": asdict(self.ansatz),
            "optimizer": optimizer,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class TaskPlan:
    classification: Mapping[int, TaskClass]
    variants: Mapping[int, Variant]

    @property
    def candidates(self) -> FrozenSet[int]:
        """The set C of quantum candidates"""
        return frozenset(t for t, cls in self.classification.items() if cls is TaskClass.QUANTUM_CANDIDATE)

    @property
    def classic(self) -> FrozenSet[int]:
        """The set T of classic tasks"""
        return frozenset(t for t, cls in self.classification.items() if cls is TaskClass.CLASSIC)

    def describe(self) -> str:
        parts = []
        for number, name in TASKS:
            label = f"task{number}:{name}={self.classification[number].value}"
            if number in self.variants:
                label += f"->{self.variants[number].value}"
            parts.append(label)
        return ", ".join(parts)


def plan(config: RunConfig) -> TaskPlan:
    numbers = {name: number for number, name in TASKS}
    classification = {
        number: TaskClass.CLASSIC if number <= 3 else TaskClass.QUANTUM_CANDIDATE for number, _ in TASKS
    }

    for name, variant in config.variants.items():
        if name not in numbers:
            raise ConfigurationError(f"unknown task {name!r}; tasks are {', '.join(TASK_NAMES)}")
        number = numbers[name]
        if classification[number] is TaskClass.CLASSIC and variant is Variant.QUANTUM:
            raise ConfigurationError(
                f"task {number} ({name}) is a classic task and has no quantum variant"
            )

    variants = {
        number: config.variants.get(name, Variant.CLASSICAL)
        for name, number in numbers.items()
        if classification[number] is TaskClass.QUANTUM_CANDIDATE
    }
    task_plan = TaskPlan(classification=classification, variants=variants)
    logger.info(f"Task plan: {task_plan.describe()}")
    return task_plan


def pair_segments(frame: np.ndarray, spec: SegmentSpec) -> List[Tuple[np.ndarray, np.ndarray]]:
    """All unordered group pairs (i < j) in index order"""
    points = np.asarray(frame, dtype=float)
    spec.validate_for(points.shape[0])
    groups = spec.index_groups
    pairs = []
    for i in range(len(groups)):
        for j in range(i + 1, len(groups)):
            pairs.append((points[list(groups[i])], points[list(groups[j])]))
    return pairs


def extract_bpm(
    seg_a: np.ndarray,
    seg_b: np.ndarray,
    distance_function: Callable[[np.ndarray, np.ndarray], Union[DistanceMatrix, np.ndarray]],
) -> np.ndarray:
    result = distance_function(seg_a, seg_b)
    d = result.entries if isinstance(result, DistanceMatrix) else np.asarray(result, dtype=float)
    n1, n2 = len(seg_a), len(seg_b)
    if d.shape != (n1, n2):
        raise InvariantViolation(f"distance matrix has shape {d.shape}, expected {(n1, n2)}")
    z1 = np.zeros((n1, n1))
    z2 = np.zeros((n2, n2))
    return np.block([[z1, d], [d.T, z2]])


def check_bpm(bpm: np.ndarray, first_size: int) -> None:
    """Symmetric, zero diagonal blocks, zero trace"""
    if not np.array_equal(bpm, bpm.T):
        raise InvariantViolation("block distance matrix is not symmetric")
    if np.any(bpm[:first_size, :first_size]) or np.any(bpm[first_size:, first_size:]):
        raise InvariantViolation("block distance matrix has non-zero diagonal blocks")
    if np.trace(bpm) != 0.0:
        raise InvariantViolation(f"block distance matrix has trace {np.trace(bpm)}")


@dataclass(frozen=True)
class CVRecord:
    frame: int
    pair: int
    lev: float
    variant_distance: Variant
    variant_eigen: Variant
    elapsed_s: float = 0.0


@dataclass
class CollectiveVariableSeries:
    records: List[CVRecord] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    @property
    def levs(self) -> List[float]:
        return [r.lev for r in self.records]

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for r in self.records:
            writer.writerow([
                r.frame,
                r.pair,
                f"{r.lev:.12g}",
                r.variant_distance.value,
                r.variant_eigen.value,
                f"{r.elapsed_s:.12g}",
            ])
        return buffer.getvalue()

    def write_csv(self, path: Union[str, Path]) -> None:
        Path(path).write_text(self.to_csv(), encoding="utf-8")
        logger.info(f"Wrote {len(self.records)} collective-variable rows to {path}")


def load_trajectory(config: RunConfig) -> Trajectory:
    if config.trajectory is not None:
        return read_trajectory(config.trajectory)
    logger.info(f"Generating synthetic trajectory: {config.frames} frame(s), {config.atoms} atoms, seed {config.seed}")
    return gen_trajectory(config.frames, config.atoms, config.seed)


def _evaluate_unit(
    frame_index: int,
    pair_index: int,
    seg_a: np.ndarray,
    seg_b: np.ndarray,
    distance_task: DistanceTask,
    eigen_task: EigenTask,
    config: RunConfig,
) -> CVRecord:
    started = time.perf_counter()
    distance_seed = derive_seed(config.seed, frame_index, pair_index, 4)
    eigen_seed = derive_seed(config.seed, frame_index, pair_index, 5)

    bpm = extract_bpm(seg_a, seg_b, lambda a, b: distance_task.distance_matrix(a, b, distance_seed))
    check_bpm(bpm, len(seg_a))
    oracle = classical_largest_eigenvalue(bpm)
    if oracle < -1e-9:
        raise InvariantViolation(f"largest eigenvalue {oracle} of a trace-zero matrix is negative")

    lev, _ = eigen_task.largest_eigenvalue(bpm, eigen_seed)
    elapsed = time.perf_counter() - started
    logger.debug(f"frame {frame_index} pair {pair_index}: lev={lev:.10g} in {elapsed:.3f}s")
    return CVRecord(
        frame=frame_index,
        pair=pair_index,
        lev=float(lev),
        variant_distance=distance_task.variant,
        variant_eigen=eigen_task.variant,
        elapsed_s=elapsed if config.timing else 0.0,
    )


async def compute_cv_series(config: RunConfig) -> CollectiveVariableSeries:
    plan(config)
    trajectory = load_trajectory(config)
    config.segments.validate_for(trajectory.num_atoms)

    if config.eigen_variant is Variant.QUANTUM:
        groups = config.segments.index_groups
        largest = max(len(groups[i]) + len(groups[j]) for i in range(len(groups)) for j in range(i + 1, len(groups)))
        if largest > VQE_MAX_DIM:
            raise ConfigurationError(
                f"segment pairs span {largest} atoms, the VQE cap is {VQE_MAX_DIM}; use the classical eigen variant"
            )

    distance_task = get_distance_task(config.distance_variant, config.swap)
    eigen_task = get_eigen_task(config.eigen_variant, config.ansatz, config.optimizer)
    semaphore = asyncio.Semaphore(config.jobs)

    async def run_unit(frame_index: int, pair_index: int, seg_a: np.ndarray, seg_b: np.ndarray) -> CVRecord:
        async with semaphore:
            try:
                return await asyncio.to_thread(
                    _evaluate_unit, frame_index, pair_index, seg_a, seg_b, distance_task, eigen_task, config
                )
            except Exception as e:
                logger.error(f"Unit failed at frame {frame_index}, pair {pair_index}: {e}")
                raise TaskFailure(frame_index, pair_index, e) from e

    started = time.perf_counter()
    units = []
    for frame_index, frame in enumerate(trajectory.frames):
        for pair_index, (seg_a, seg_b) in enumerate(pair_segments(frame, config.segments)):
            units.append(run_unit(frame_index, pair_index, seg_a, seg_b))

    records = await asyncio.gather(*units)
    records = sorted(records, key=lambda r: (r.frame, r.pair))
    logger.info(
        f"Computed {len(records)} collective variable(s) "
        f"(distance={config.distance_variant.value}, eigen={config.eigen_variant.value}, jobs={config.jobs}) "
        f"in {time.perf_counter() - started:.2f}s"
    )
    return CollectiveVariableSeries(records=list(records))
