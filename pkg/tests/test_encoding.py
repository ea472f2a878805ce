import math

import numpy as np
import pytest

from src.encoding import encode_pair, matrix_operator, pad_to_power_of_two
from src.errors import DimensionError, EncodingError, NumericError


def test_pad_to_power_of_two():
    padded, k = pad_to_power_of_two([5])
    assert padded.tolist() == [5] and k == 0

    padded, k = pad_to_power_of_two([1, 2, 3])
    assert padded.tolist() == [1, 2, 3, 0] and k == 2

    padded, k = pad_to_power_of_two([1, 2, 3, 4])
    assert padded.tolist() == [1, 2, 3, 4] and k == 2

    with pytest.raises(EncodingError):
        pad_to_power_of_two([])


def test_encode_pair_phi():
    pair = encode_pair([3, 0], [0, 4])
    assert pair.norm_factor == pytest.approx(25)
    assert np.allclose(pair.phi, [0.6, -0.8])
    assert np.linalg.norm(pair.phi) == pytest.approx(1, abs=1e-10)


def test_encode_identical_atoms():
    pair = encode_pair([1, 0], [1, 0])
    s = 1 / math.sqrt(2)
    assert np.allclose(pair.phi, [s, -s])
    assert np.allclose(pair.psi, [s, 0, s, 0])
    assert pair.pad_exponent == 1
    assert pair.psi_qubits == 2


def test_encode_rejects_bad_atoms():
    with pytest.raises(EncodingError):
        encode_pair([0, 0], [1, 0])
    with pytest.raises(EncodingError):
        encode_pair([1, float("nan")], [1, 0])
    with pytest.raises(DimensionError):
        encode_pair([1, 0], [1, 0, 0])


def test_encoded_states_are_unit_norm():
    rng = np.random.default_rng(11)
    for _ in range(1000):
        dim = int(rng.integers(1, 6))
        u, v = rng.random(dim) + 1e-3, rng.random(dim) + 1e-3
        pair = encode_pair(u, v)
        assert abs(np.linalg.norm(pair.phi) - 1) < 1e-10
        assert abs(np.linalg.norm(pair.psi) - 1) < 1e-10
        assert pair.norm_factor > 0
        assert pair.psi.size == 2 ** pair.psi_qubits >= 2 * dim


def test_phi_is_scale_invariant():
    rng = np.random.default_rng(12)
    u, v = rng.random(3), rng.random(3)
    base = encode_pair(u, v)
    for c in (0.01, 2.5, 1e3):
        scaled = encode_pair(c * u, c * v)
        assert np.allclose(scaled.phi, base.phi, atol=1e-10)
        assert np.allclose(scaled.psi, base.psi, atol=1e-10)


def test_matrix_operator():
    h, q = matrix_operator(np.eye(4))
    assert h.shape == (4, 4) and q == 2

    bpm = np.array([[0, 1, 2], [1, 0, 3], [2, 3, 0]], dtype=float)
    h, q = matrix_operator(bpm)
    assert h.shape == (4, 4) and q == 2
    assert np.allclose(h[:3, :3], -bpm)
    assert not h[3].any() and not h[:, 3].any()

    h, q = matrix_operator(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert q == 1
    assert np.allclose(h, [[0, -1], [-1, 0]])
    assert np.linalg.eigvalsh(h)[0] == pytest.approx(-1)

    _, q = matrix_operator(np.array([[2.0]]))
    assert q == 1

    with pytest.raises(NumericError):
        matrix_operator(np.array([[0.0, 1.0], [2.0, 0.0]]))
    with pytest.raises(DimensionError):
        matrix_operator(np.zeros((2, 3)))
