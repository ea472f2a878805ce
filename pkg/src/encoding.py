"""Amplitude encoding of atom coordinates and operator preparation for the eigensolver."""

from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from .errors import DimensionError, EncodingError, NumericError


@dataclass(frozen=True, eq=False)
class EncodedPair:
    """
    Register states for the distance swap test.

    phi = (|u| |0> - |v| |1>) / sqrt(Z) on one qubit.
    psi = (|0> x u_hat + |1> x v_hat) / sqrt(2) on 1 + k qubits, the leading
    qubit selecting the atom, the trailing k qubits holding its padded
    coordinates.
    """

    phi: np.ndarray
    psi: np.ndarray
    norm_factor: float
    pad_exponent: int

    @property
    def psi_qubits(self) -> int:
        return 1 + self.pad_exponent


def _as_vector(values: Sequence[float]) -> np.ndarray:
    vector = np.asarray(values, dtype=float).reshape(-1)
    if vector.size == 0:
        raise EncodingError("cannot encode an empty vector")
    if not np.all(np.isfinite(vector)):
        raise EncodingError(f"non-finite coordinate in {vector.tolist()}")
    return vector


def pad_to_power_of_two(v: Sequence[float]) -> Tuple[np.ndarray, int]:
    vector = _as_vector(v)
    k = (vector.size - 1).bit_length()
    padded = np.zeros(2 ** k)
    padded[: vector.size] = vector
    return padded, k


def encode_pair(u: Sequence[float], v: Sequence[float]) -> EncodedPair:
    u_vec, v_vec = _as_vector(u), _as_vector(v)
    if u_vec.size != v_vec.size:
        raise DimensionError(f"atoms have different dimensions: {u_vec.size} and {v_vec.size}")

    norm_u, norm_v = float(np.linalg.norm(u_vec)), float(np.linalg.norm(v_vec))
    if norm_u == 0.0 or norm_v == 0.0:
        raise EncodingError("zero-norm coordinate vector cannot be amplitude-encoded")

    z = norm_u ** 2 + norm_v ** 2
    phi = np.array([norm_u, -norm_v]) / np.sqrt(z)

    u_pad, k = pad_to_power_of_two(u_vec / norm_u)
    v_pad, _ = pad_to_power_of_two(v_vec / norm_v)
    psi = np.concatenate([u_pad, v_pad]) / np.sqrt(2)

    return EncodedPair(phi=phi, psi=psi, norm_factor=z, pad_exponent=k)


def matrix_operator(bpm: np.ndarray) -> Tuple[np.ndarray, int]:
    """
    Zero-pad a symmetric matrix to a power-of-two dimension and negate it.

    The smallest eigenvalue of the result is minus the largest eigenvalue of
    the input whenever that eigenvalue is non-negative.
    """
    matrix = np.asarray(bpm, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.shape[0] == 0:
        raise DimensionError(f"expected a non-empty square matrix, got shape {matrix.shape}")
    if not np.allclose(matrix, matrix.T, rtol=0, atol=1e-10):
        raise NumericError("matrix is not symmetric")

    dim = matrix.shape[0]
    num_qubits = max(1, (dim - 1).bit_length())
    padded = np.zeros((2 ** num_qubits, 2 ** num_qubits))
    padded[:dim, :dim] = matrix
    return -padded, num_qubits
