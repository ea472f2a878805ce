"""
Multi-frame XYZ-like trajectory files.

Each frame is an atom-count line, a free comment line, then one line per atom
with three decimal coordinates. A leading element symbol on atom lines is
accepted and ignored; the writer never emits one.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Union

import numpy as np
from loguru import logger

from .errors import ConfigurationError, TrajectoryParseError


@dataclass
class Trajectory:
    frames: List[np.ndarray]
    comments: List[str] = field(default_factory=list)

    def __post_init__(self):
        if not self.frames:
            raise ConfigurationError("trajectory needs at least one frame")
        self.frames = [np.asarray(frame, dtype=float) for frame in self.frames]
        shape = self.frames[0].shape
        if len(shape) != 2 or shape[0] == 0 or shape[1] != 3:
            raise ConfigurationError(f"frames must be (atoms, 3) arrays, got {shape}")
        for index, frame in enumerate(self.frames):
            if frame.shape != shape:
                raise ConfigurationError(f"frame {index} has shape {frame.shape}, expected {shape}")
        if not self.comments:
            self.comments = [f"frame {i}" for i in range(len(self.frames))]
        if len(self.comments) != len(self.frames):
            raise ConfigurationError("one comment per frame is required")

    @property
    def num_frames(self) -> int:
        return len(self.frames)

    @property
    def num_atoms(self) -> int:
        return self.frames[0].shape[0]


def _is_number(token: str) -> bool:
    try:
        float(token)
    except ValueError:
        return False
    return True


def _parse_coordinates(text: str, line_number: int) -> List[float]:
    tokens = text.split()
    if len(tokens) == 4:
        if _is_number(tokens[0]):
            raise TrajectoryParseError(f"expected three coordinates, got {text.strip()!r}", line_number)
        # element symbol
        tokens = tokens[1:]
    if len(tokens) != 3:
        raise TrajectoryParseError(f"expected three coordinates, got {text.strip()!r}", line_number)
    try:
        values = [float(token) for token in tokens]
    except ValueError:
        raise TrajectoryParseError(f"non-numeric coordinate in {text.strip()!r}", line_number)
    if not all(np.isfinite(values)):
        raise TrajectoryParseError(f"non-finite coordinate in {text.strip()!r}", line_number)
    return values


def read_trajectory(path: Union[str, Path]) -> Trajectory:
    path = Path(path)
    if not path.is_file():
        logger.error(f"Trajectory file not found: {path}")
        raise ConfigurationError(f"trajectory file not found: {path}")

    lines = path.read_text(encoding="utf-8").splitlines()
    frames: List[np.ndarray] = []
    comments: List[str] = []
    i = 0

    while i < len(lines):
        if not lines[i].strip():
            if all(not rest.strip() for rest in lines[i:]):
                break
            raise TrajectoryParseError("blank line where a frame header was expected", i + 1)

        frame_index = len(frames)
        try:
            count = int(lines[i].strip())
        except ValueError:
            raise TrajectoryParseError(f"malformed header of frame {frame_index}: {lines[i].strip()!r}", i + 1)
        if count <= 0:
            raise TrajectoryParseError(f"frame {frame_index} declares {count} atoms", i + 1)
        if frames and count != frames[0].shape[0]:
            raise TrajectoryParseError(
                f"frame {frame_index} has {count} atoms, frame 0 has {frames[0].shape[0]}", i + 1
            )
        if i + 1 >= len(lines):
            raise TrajectoryParseError(f"frame {frame_index} is missing its comment line", i + 2)

        comments.append(lines[i + 1])
        first_atom = i + 2
        if first_atom + count > len(lines):
            raise TrajectoryParseError(
                f"frame {frame_index} ends after {len(lines) - first_atom} of {count} atoms", len(lines)
            )
        frames.append(
            np.array([_parse_coordinates(lines[j], j + 1) for j in range(first_atom, first_atom + count)])
        )
        i = first_atom + count

    if not frames:
        raise TrajectoryParseError("no frames found", 1)

    logger.info(f"Read {len(frames)} frame(s) of {frames[0].shape[0]} atoms from {path}")
    return Trajectory(frames=frames, comments=comments)


def write_trajectory(trajectory: Trajectory, path: Union[str, Path]) -> None:
    path = Path(path)
    out = []
    for frame, comment in zip(trajectory.frames, trajectory.comments):
        out.append(str(frame.shape[0]))
        out.append(comment)
        # repr() is the shortest text that parses back to the same float
        out.extend(" ".join(repr(float(c)) for c in atom) for atom in frame)
    path.write_text("\n".join(out) + "\n", encoding="utf-8")
    logger.info(f"Wrote {trajectory.num_frames} frame(s) to {path}")


def gen_trajectory(num_frames: int, num_atoms: int, seed: int) -> Trajectory:
    """Uniform coordinates in [0, 1)^3, deterministic per seed"""
    if num_frames <= 0 or num_atoms <= 0:
        raise ConfigurationError(f"frames and atoms must be positive, got {num_frames} and {num_atoms}")
    rng = np.random.default_rng(seed)
    frames = [rng.random((num_atoms, 3)) for _ in range(num_frames)]
    return Trajectory(frames=frames, comments=[f"frame {i} seed {seed}" for i in range(num_frames)])
