# flake8: noqa
# pylint: disable=redefined-outer-name
# type: ignore

from dataclasses import replace

import numpy as np
import pytest

from src.eigensolve import AnsatzConfig, OptimizerConfig
from src.errors import ConfigurationError, InvariantViolation, TaskFailure
from src.pipeline import (
    CSV_HEADER,
    CollectiveVariableSeries,
    CVRecord,
    RunConfig,
    SegmentSpec,
    TaskClass,
    check_bpm,
    compute_cv_series,
    extract_bpm,
    pair_segments,
    parse_segment_spec,
    plan,
)
from src.swap_distance import SwapMode, SwapTestConfig, classical_distance_matrix, quantum_distance_matrix
from src import pipeline
from src.trajectory import Trajectory, gen_trajectory, write_trajectory
from src.variant_base import Variant

EXACT = SwapTestConfig(mode=SwapMode.EXACT)


@pytest.fixture
def two_pairs():
    return SegmentSpec(((0, 1), (2, 3)))


def test_parse_segment_spec():
    assert parse_segment_spec("0-3;4-7").index_groups == ((0, 1, 2, 3), (4, 5, 6, 7))
    assert parse_segment_spec("0-1,5;2-4").index_groups == ((0, 1, 5), (2, 3, 4))
    assert parse_segment_spec("0-3,4-7").index_groups == ((0, 1, 2, 3), (4, 5, 6, 7))
    assert parse_segment_spec("0,1,2").index_groups == ((0,), (1,), (2,))

    for bad in ("", "0-3", "0-1;", "3-1;4", "a-b;1", "0-2;2-3"):
        with pytest.raises(ConfigurationError):
            parse_segment_spec(bad)


def test_segment_spec_pairs():
    assert SegmentSpec(((0,), (1,))).num_pairs == 1
    assert SegmentSpec(((0,), (1,), (2,), (3,))).num_pairs == 6
    with pytest.raises(ConfigurationError):
        SegmentSpec(((0,), ()))
    with pytest.raises(ConfigurationError):
        SegmentSpec(((0, 1), (1, 2))).validate_for(10)
    with pytest.raises(ConfigurationError):
        SegmentSpec(((0,), (5,))).validate_for(3)


def test_pair_segments():
    frame = np.arange(15, dtype=float).reshape(5, 3)
    pairs = pair_segments(frame, SegmentSpec(((0, 1), (2, 3, 4))))
    assert len(pairs) == 1
    seg_a, seg_b = pairs[0]
    assert seg_a.shape == (2, 3) and seg_b.shape == (3, 3)
    assert np.array_equal(seg_b[0], frame[2])

    pairs = pair_segments(frame, SegmentSpec(((0,), (1,), (2,), (3,))))
    assert len(pairs) == 6


def test_extract_bpm():
    bpm = extract_bpm(np.array([[0.0, 0.0, 0.0]]), np.array([[3.0, 4.0, 0.0]]), classical_distance_matrix)
    assert np.allclose(bpm, [[0, 25], [25, 0]])

    rng = np.random.default_rng(5)
    a, b = rng.random((2, 3)), rng.random((2, 3))
    bpm = extract_bpm(a, b, classical_distance_matrix)
    assert bpm.shape == (4, 4)
    assert not bpm[:2, :2].any() and not bpm[2:, 2:].any()
    check_bpm(bpm, 2)

    quantum = extract_bpm(a, b, lambda x, y: quantum_distance_matrix(x, y, EXACT))
    assert np.allclose(quantum, bpm, atol=1e-9)

    with pytest.raises(InvariantViolation):
        extract_bpm(a, b, lambda x, y: np.zeros((3, 3)))


def test_check_bpm_rejects_broken_matrices():
    with pytest.raises(InvariantViolation):
        check_bpm(np.array([[0.0, 1.0], [2.0, 0.0]]), 1)
    with pytest.raises(InvariantViolation):
        check_bpm(np.array([[1.0, 1.0], [1.0, 0.0]]), 1)


def test_plan_classification(two_pairs):
    task_plan = plan(RunConfig(segments=two_pairs))
    assert task_plan.candidates == {4, 5}
    assert task_plan.classic == {1, 2, 3}
    assert task_plan.classification[4] is TaskClass.QUANTUM_CANDIDATE
    assert task_plan.variants == {4: Variant.CLASSICAL, 5: Variant.CLASSICAL}

    quantum = plan(RunConfig(segments=two_pairs, variants={"distance": "quantum"}))
    assert quantum.candidates == {4, 5}
    assert quantum.variants[4] is Variant.QUANTUM

    with pytest.raises(ConfigurationError):
        plan(RunConfig(segments=two_pairs, variants={"read_trajectory": "quantum"}))
    with pytest.raises(ConfigurationError):
        plan(RunConfig(segments=two_pairs, variants={"fourier": "classical"}))
    with pytest.raises(ConfigurationError):
        RunConfig(segments=two_pairs, variants={"distance": "analog"})


@pytest.mark.asyncio
async def test_all_classical_series(two_pairs):
    series = await compute_cv_series(RunConfig(segments=two_pairs, frames=2, atoms=4, seed=3))
    assert len(series) == 2
    assert [(r.frame, r.pair) for r in series.records] == [(0, 0), (1, 0)]
    assert all(lev >= 0 for lev in series.levs)
    assert all(r.elapsed_s == 0.0 for r in series.records)


@pytest.mark.asyncio
async def test_all_quantum_series_matches_classical(two_pairs):
    config = RunConfig(
        segments=two_pairs,
        frames=2,
        atoms=4,
        seed=3,
        swap=EXACT,
        ansatz=AnsatzConfig(2),
        optimizer=OptimizerConfig(restarts=5),
    )
    classical = await compute_cv_series(config)
    quantum = await compute_cv_series(config.with_variants(Variant.QUANTUM, Variant.QUANTUM))
    for c, q in zip(classical.records, quantum.records):
        assert q.variant_distance is Variant.QUANTUM and q.variant_eigen is Variant.QUANTUM
        assert abs(q.lev - c.lev) / c.lev <= 1e-2
        assert q.lev <= c.lev + 1e-9


@pytest.mark.asyncio
async def test_exact_quantum_distance_keeps_lev_column(two_pairs):
    config = RunConfig(segments=two_pairs, frames=3, atoms=4, seed=8, swap=EXACT)
    classical = await compute_cv_series(config)
    quantum = await compute_cv_series(config.with_variants(Variant.QUANTUM, Variant.CLASSICAL))
    assert np.allclose(quantum.levs, classical.levs, rtol=0, atol=1e-9)


@pytest.mark.asyncio
async def test_csv_is_identical_across_job_counts(tmp_path):
    segments = parse_segment_spec("0-1;2-3;4-5")
    base = RunConfig(
        segments=segments,
        frames=3,
        atoms=6,
        seed=11,
        variants={"distance": "quantum"},
        swap=SwapTestConfig(shots=256),
    )
    serial = await compute_cv_series(base)
    parallel = await compute_cv_series(replace(base, jobs=4))
    again = await compute_cv_series(base)
    assert serial.to_csv() == parallel.to_csv() == again.to_csv()
    assert len(serial) == 3 * 3

    path = tmp_path / "cv.csv"
    serial.write_csv(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == ",".join(CSV_HEADER)
    assert lines[1].startswith("0,0,")
    assert lines[1].endswith(",quantum,classical,0")


@pytest.mark.asyncio
async def test_series_from_trajectory_file(tmp_path, two_pairs):
    path = tmp_path / "t.xyz"
    write_trajectory(gen_trajectory(2, 4, seed=1), path)
    from_file = await compute_cv_series(RunConfig(segments=two_pairs, trajectory=path, seed=1))
    synthetic = await compute_cv_series(RunConfig(segments=two_pairs, frames=2, atoms=4, seed=1))
    assert from_file.levs == synthetic.levs


@pytest.mark.asyncio
async def test_timing_is_opt_in(two_pairs):
    series = await compute_cv_series(RunConfig(segments=two_pairs, frames=1, atoms=4, timing=True))
    assert series.records[0].elapsed_s > 0


@pytest.mark.asyncio
async def test_configuration_errors(tmp_path):
    with pytest.raises(ConfigurationError):
        await compute_cv_series(RunConfig(segments=SegmentSpec(((0,), (9,))), atoms=4))
    with pytest.raises(ConfigurationError):
        await compute_cv_series(RunConfig(segments=SegmentSpec(((0,), (1,))), trajectory=tmp_path / "nope.xyz"))
    with pytest.raises(ConfigurationError):
        await compute_cv_series(
            RunConfig(
                segments=parse_segment_spec("0-8;9-17"),
                atoms=18,
                variants={"eigenvalue": "quantum"},
            )
        )


@pytest.mark.asyncio
async def test_unit_failures_carry_their_location(monkeypatch):
    # atoms at the origin cannot be amplitude-encoded
    monkeypatch.setattr(pipeline, "load_trajectory", lambda _: Trajectory(frames=[np.zeros((2, 3))]))
    config = RunConfig(
        segments=SegmentSpec(((0,), (1,))),
        variants={"distance": "quantum"},
        swap=EXACT,
    )
    with pytest.raises(TaskFailure) as error:
        await compute_cv_series(config)
    assert (error.value.frame, error.value.pair) == (0, 0)
    assert "zero-norm" in str(error.value)


def test_csv_formatting():
    series = CollectiveVariableSeries([CVRecord(0, 0, 1 / 3, Variant.CLASSICAL, Variant.QUANTUM)])
    assert series.to_csv() == (
        "frame,pair,lev,variant_distance,variant_eigen,elapsed_s\n"
        "0,0,0.333333333333,classical,quantum,0\n"
    )
