#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Command-line entry point.

Every flag value is read as text, then merged in the order built-in defaults <
environment settings < --config file < command line, and only then converted.
That way a config file and the command line go through the same validation.

Exit codes: 0 success or pass, 1 verdict fail, 2 usage or configuration error,
3 runtime error.
"""

import argparse
import asyncio
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

from loguru import logger

from .config import get_settings, load_config_file, setup_logging
from .difftest import (
    SweepGrid,
    Verdict,
    end_to_end_diff,
    render_report,
    render_sweep,
    sweep,
    unit_test_distance,
    unit_test_eigen,
)
from .eigensolve import AnsatzConfig, OptimizerConfig, OptimizerKind
from .errors import ConfigurationError, EncodingError, TaskFailure, TrajectoryParseError
from .pipeline import RunConfig, compute_cv_series, parse_segment_spec
from .simulator import ReadoutNoiseModel
from .swap_distance import (
    SwapMode,
    SwapTestConfig,
    build_swap_test_circuit,
    classical_distance_matrix,
    distance_from_p0,
    estimate_p0,
)
from .encoding import encode_pair
from .trajectory import gen_trajectory, write_trajectory
from .variant_base import Variant

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_RUNTIME = 3

USAGE_ERRORS = (ConfigurationError, EncodingError, TrajectoryParseError)


def _integer(minimum: int) -> Callable[[str, str], int]:
    def convert(key: str, text: str) -> int:
        try:
            value = int(text)
        except ValueError:
            raise ConfigurationError(f"{key} must be an integer, got {text!r}")
        if value < minimum:
            raise ConfigurationError(f"{key} must be >= {minimum}, got {value}")
        return value
    return convert


def _positive_float(key: str, text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ConfigurationError(f"{key} must be a number, got {text!r}")
    if not value > 0:
        raise ConfigurationError(f"{key} must be positive, got {value}")
    return value


def _probability(key: str, text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ConfigurationError(f"{key} must be a number, got {text!r}")
    if not 0.0 <= value < 0.5:
        raise ConfigurationError(f"{key} must lie in [0, 0.5), got {value}")
    return value


_SWITCH = {"on": True, "true": True, "yes": True, "1": True, "off": False, "false": False, "no": False, "0": False}


def _switch(key: str, text: str) -> bool:
    value = _SWITCH.get(text.strip().lower())
    if value is None:
        raise ConfigurationError(f"{key} must be on or off, got {text!r}")
    return value


def _choice(enum_type) -> Callable[[str, str], Any]:
    def convert(key: str, text: str):
        try:
            return enum_type(text.strip())
        except ValueError:
            allowed = ", ".join(member.value for member in enum_type)
            raise ConfigurationError(f"{key} must be one of {allowed}, got {text!r}")
    return convert


def _text(key: str, text: str) -> str:
    return text


def _vector(key: str, text: str) -> List[float]:
    try:
        values = [float(part) for part in text.split(",")]
    except ValueError:
        raise ConfigurationError(f"{key} must be comma-separated numbers, got {text!r}")
    return values


def _axis(item: Callable[[str, str], Any]) -> Callable[[str, str], List[Any]]:
    def convert(key: str, text: str) -> List[Any]:
        parts = [part.strip() for part in text.split(",") if part.strip()]
        if not parts:
            raise ConfigurationError(f"sweep axis {key} is empty")
        return [item(key, part) for part in parts]
    return convert


@dataclass(frozen=True)
class Option:
    flags: Sequence[str]
    key: str
    help: str
    convert: Callable[[str, str], Any]
    default: Optional[str] = None


SEED = Option(["--seed"], "seed", "base seed (env HYBRIDMD_SEED)", _integer(0))
JOBS = Option(["--jobs"], "jobs", "concurrent pipeline workers (env HYBRIDMD_JOBS)", _integer(1))
SHOTS = Option(["--shots"], "shots", "swap-test shots", _integer(1), "8192")
SWAP_MODE = Option(["--swap-mode"], "swap_mode", "swap-test evaluation: exact or sampled", _choice(SwapMode), "sampled")
NOISE = Option(["--noise"], "noise", "readout flip probability p01 = p10", _probability, "0")
MITIGATE = Option(["--mitigate"], "mitigate", "readout error mitigation: on or off", _switch, "off")
DEPTH = Option(["--depth"], "depth", "ansatz depth", _integer(0), "2")
OPTIMIZER = Option(["--optimizer"], "optimizer", "nelder_mead or spsa", _choice(OptimizerKind), "nelder_mead")
RESTARTS = Option(["--restarts"], "restarts", "VQE restarts", _integer(1), "5")
MAX_ITERATIONS = Option(["--max-iterations"], "max_iterations", "optimizer iteration budget", _integer(1), "500")
TRIALS = Option(["--trials"], "trials", "random trials", _integer(1), "10")
THRESHOLD = Option(["--threshold"], "threshold", "MSE threshold (default depends on the test)", _positive_float)

RUN_OPTIONS = [
    Option(["--traj"], "traj", "trajectory file (synthetic when omitted)", _text),
    Option(["--frames"], "frames", "synthetic trajectory frames", _integer(1), "3"),
    Option(["--atoms"], "atoms", "synthetic trajectory atoms", _integer(1), "4"),
    Option(["--segments"], "segments", "atom groups, e.g. 0-3,4-7 or 0-1,5;2-4", _text),
    Option(["--distance"], "distance", "task 4 variant: classical or quantum", _choice(Variant), "classical"),
    Option(["--eigen"], "eigen", "task 5 variant: classical or quantum", _choice(Variant), "classical"),
    SWAP_MODE, SHOTS, NOISE, MITIGATE, DEPTH, OPTIMIZER, RESTARTS, MAX_ITERATIONS,
    Option(["--timing"], "timing", "record wall time in elapsed_s: on or off", _switch, "off"),
    SEED, JOBS,
]

COMMANDS: Dict[str, Dict[str, Any]] = {
    "run": {
        "help": "compute the collective-variable series and write it as CSV",
        "options": RUN_OPTIONS + [Option(["-o", "--output"], "output", "CSV output path", _text, "cv_series.csv")],
    },
    "difftest": {
        "help": "differential test of a quantum variant against its classical oracle",
        "targets": ("distance", "eigen", "e2e"),
        "options": RUN_OPTIONS + [TRIALS, THRESHOLD, Option(["-o", "--output"], "output", "JSON report path", _text)],
    },
    "sweep": {
        "help": "hyperparameter sweep selecting the MSE-minimizing configuration",
        "targets": ("distance", "eigen"),
        "options": [
            Option(["--depths"], "depths", "comma-separated ansatz depths", _axis(_integer(0)), "2"),
            Option(["--optimizers"], "optimizers", "comma-separated optimizers", _axis(_choice(OptimizerKind)), "nelder_mead"),
            Option(["--shots"], "shots", "comma-separated shot counts", _axis(_integer(1)), "8192"),
            Option(["--mitigate"], "mitigate", "comma-separated mitigation switches (off,on)", _axis(_switch), "off"),
            NOISE, SWAP_MODE, TRIALS, THRESHOLD, RESTARTS, MAX_ITERATIONS, SEED,
            Option(["-o", "--output"], "output", "JSON sweep result path", _text),
        ],
    },
    "gen-traj": {
        "help": "write a synthetic trajectory",
        "options": [
            Option(["--frames"], "frames", "frames", _integer(1), "3"),
            Option(["--atoms"], "atoms", "atoms per frame", _integer(1), "8"),
            SEED,
            Option(["-o", "--output"], "output", "trajectory output path", _text, "trajectory.xyz"),
        ],
    },
    "swap-demo": {
        "help": "swap-test distance of one atom pair, with the classical value",
        "options": [
            Option(["--u"], "u", "first atom, comma-separated coordinates", _vector),
            Option(["--v"], "v", "second atom, comma-separated coordinates", _vector),
            Option(["--mode"], "mode", "exact or sampled", _choice(SwapMode), "sampled"),
            SHOTS, NOISE, MITIGATE, SEED,
        ],
    },
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hybridmd", description="Hybrid quantum-classical collective variables")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name, command in COMMANDS.items():
        sub = subparsers.add_parser(name, help=command["help"], description=command["help"])
        if "targets" in command:
            sub.add_argument("target", choices=command["targets"])
        sub.add_argument("--config", help="flat key=value file; keys are listed after each flag")
        for option in command["options"]:
            default = f", default {option.default}" if option.default is not None else ""
            sub.add_argument(
                *option.flags,
                dest=option.key,
                default=None,
                metavar=option.key.upper(),
                help=f"{option.help}{default} [config key: {option.key}]",
            )
    return parser


def resolve_options(command: str, args: argparse.Namespace, settings: Dict[str, Any]) -> Dict[str, Any]:
    options: List[Option] = COMMANDS[command]["options"]
    raw: Dict[str, Optional[str]] = {option.key: option.default for option in options}
    if "seed" in raw:
        raw["seed"] = str(settings["seed"])
    if "jobs" in raw:
        raw["jobs"] = str(settings["jobs"])

    if args.config:
        raw.update(load_config_file(args.config, raw.keys()))
    for option in options:
        value = getattr(args, option.key)
        if value is not None:
            raw[option.key] = value

    resolved: Dict[str, Any] = {}
    for option in options:
        text = raw[option.key]
        resolved[option.key] = None if text is None else option.convert(option.key, text)
    return resolved


def _noise(options: Dict[str, Any]) -> Optional[ReadoutNoiseModel]:
    p = options["noise"]
    return ReadoutNoiseModel(p01=p, p10=p) if p else None


def _swap_config(options: Dict[str, Any], mode_key: str = "swap_mode") -> SwapTestConfig:
    return SwapTestConfig(
        shots=options["shots"],
        seed=options["seed"],
        noise=_noise(options),
        mitigate=options["mitigate"],
        mode=options[mode_key],
    )


def _optimizer_config(options: Dict[str, Any]) -> OptimizerConfig:
    return OptimizerConfig(
        kind=options["optimizer"],
        max_iterations=options["max_iterations"],
        seed=options["seed"],
        restarts=options["restarts"],
    )


def _run_config(options: Dict[str, Any]) -> RunConfig:
    if not options["segments"]:
        raise ConfigurationError("--segments is required (e.g. --segments 0-1,2-3)")
    return RunConfig(
        segments=parse_segment_spec(options["segments"]),
        trajectory=Path(options["traj"]) if options["traj"] else None,
        frames=options["frames"],
        atoms=options["atoms"],
        variants={"distance": options["distance"], "eigenvalue": options["eigen"]},
        swap=_swap_config(options),
        ansatz=AnsatzConfig(options["depth"]),
        optimizer=_optimizer_config(options),
        output=Path(options["output"]) if options.get("output") else None,
        seed=options["seed"],
        jobs=options["jobs"],
        timing=options["timing"],
    )


def _write_json(text: str, path: Optional[str]) -> None:
    if path:
        Path(path).write_text(text + "\n", encoding="utf-8")
        logger.info(f"Wrote {path}")


def cmd_run(args: argparse.Namespace, options: Dict[str, Any]) -> int:
    config = _run_config(options)
    started = time.perf_counter()
    series = asyncio.run(compute_cv_series(config))
    series.write_csv(config.output)
    frames = len({r.frame for r in series.records})
    pairs = len({r.pair for r in series.records})
    print(
        f"frames={frames} pairs={pairs} distance={config.distance_variant.value} "
        f"eigen={config.eigen_variant.value} wall_time={time.perf_counter() - started:.3f}s output={config.output}"
    )
    return EXIT_OK


def cmd_difftest(args: argparse.Namespace, options: Dict[str, Any]) -> int:
    if args.target == "distance":
        threshold = options["threshold"] or 1e-2
        report = unit_test_distance(options["trials"], _swap_config(options), threshold, options["seed"])
    elif args.target == "eigen":
        report = unit_test_eigen(
            options["trials"],
            AnsatzConfig(options["depth"]),
            _optimizer_config(options),
            options["threshold"],
            options["seed"],
        )
    else:
        config = _run_config({**options, "output": None})
        report = asyncio.run(end_to_end_diff(config, options["threshold"]))

    print(render_report(report))
    _write_json(report.to_json(), options["output"])
    return EXIT_OK if report.verdict is Verdict.PASS else EXIT_FAIL


def cmd_sweep(args: argparse.Namespace, options: Dict[str, Any]) -> int:
    grid = SweepGrid(
        task=args.target,
        depths=tuple(options["depths"]),
        optimizers=tuple(options["optimizers"]),
        shots=tuple(options["shots"]),
        mitigation=tuple(options["mitigate"]),
        trials=options["trials"],
        seed=options["seed"],
        threshold=options["threshold"],
        noise=_noise(options),
        swap_mode=options["swap_mode"],
        restarts=options["restarts"],
        max_iterations=options["max_iterations"],
    )
    result = sweep(grid)
    print(render_sweep(result))
    _write_json(result.to_json(), options["output"])
    return EXIT_OK


def cmd_gen_traj(args: argparse.Namespace, options: Dict[str, Any]) -> int:
    trajectory = gen_trajectory(options["frames"], options["atoms"], options["seed"])
    write_trajectory(trajectory, options["output"])
    print(f"frames={trajectory.num_frames} atoms={trajectory.num_atoms} output={options['output']}")
    return EXIT_OK


def cmd_swap_demo(args: argparse.Namespace, options: Dict[str, Any]) -> int:
    u, v = options["u"], options["v"]
    if u is None or v is None:
        raise ConfigurationError("--u and --v are both required")
    if len(u) != len(v):
        raise ConfigurationError(f"--u has {len(u)} coordinates, --v has {len(v)}")

    cfg = _swap_config(options, mode_key="mode")
    pair = encode_pair(u, v)
    p0 = estimate_p0(build_swap_test_circuit(pair), cfg)
    d2 = distance_from_p0(p0, pair.norm_factor)
    classical = float(classical_distance_matrix([u], [v]).entries[0, 0])

    rows = [
        ("P0", p0),
        ("Z", pair.norm_factor),
        ("D2", d2),
        ("D", d2 ** 0.5),
        ("D2_classical", classical),
    ]
    for name, value in rows:
        print(f"{name} = {value:.12g}")
    return EXIT_OK


HANDLERS = {
    "run": cmd_run,
    "difftest": cmd_difftest,
    "sweep": cmd_sweep,
    "gen-traj": cmd_gen_traj,
    "swap-demo": cmd_swap_demo,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    try:
        settings = get_settings()
        setup_logging(settings["log_level"])
        options = resolve_options(args.command, args, settings)
        return HANDLERS[args.command](args, options)
    except USAGE_ERRORS as e:
        logger.error(f"{args.command}: {e}")
        return EXIT_USAGE
    except TaskFailure as e:
        logger.error(f"{args.command}: {e}")
        return EXIT_USAGE if isinstance(e.cause, USAGE_ERRORS) else EXIT_RUNTIME
    except Exception as e:
        logger.exception(f"{args.command} failed: {e}")
        return EXIT_RUNTIME
