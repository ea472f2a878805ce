# flake8: noqa
# pylint: disable=redefined-outer-name
# type: ignore

import math

import numpy as np
import pytest

from src.eigensolve import (
    Ansatz,
    AnsatzConfig,
    OptimizerConfig,
    OptimizerKind,
    ansatz_state,
    classical_largest_eigenvalue,
    jacobi_eigenvalues,
    quantum_largest_eigenvalue,
    run_vqe,
    vqe_cost,
)
from src.encoding import matrix_operator
from src.errors import ConfigurationError, DimensionError, NumericError
from src.optimizers import nelder_mead, spsa
from src.pipeline import extract_bpm
from src.swap_distance import classical_distance_matrix


def power_deflation_eigenvalues(matrix, iterations=2000):
    """Independent oracle: shifted power iteration, Rayleigh refinement, deflation"""
    a = np.asarray(matrix, dtype=float)
    n = a.shape[0]
    shift = np.linalg.norm(a) + 1.0
    b = a + shift * np.eye(n)
    rng = np.random.default_rng(0)
    values = []
    for _ in range(n):
        v = rng.normal(size=n)
        v /= np.linalg.norm(v)
        for _ in range(iterations):
            w = b @ v
            v = w / np.linalg.norm(w)
        mu = v @ b @ v
        for _ in range(5):
            try:
                x = np.linalg.solve(b - mu * np.eye(n), v)
            except np.linalg.LinAlgError:
                break
            norm = np.linalg.norm(x)
            if not np.isfinite(norm) or norm == 0:
                break
            v = x / norm
            mu = v @ b @ v
        values.append(mu)
        b = b - mu * np.outer(v, v)
    return np.sort(np.array(values) - shift)


def random_symmetric(rng, n):
    a = rng.normal(size=(n, n))
    return (a + a.T) / 2


def random_bpm(rng, n1=2, n2=2):
    atoms = rng.random((n1 + n2, 3))
    return extract_bpm(atoms[:n1], atoms[n1:], classical_distance_matrix)


@pytest.fixture
def rng():
    return np.random.default_rng(2024)


def test_jacobi_small_examples():
    assert classical_largest_eigenvalue(np.array([[0.0, 1.0], [1.0, 0.0]])) == pytest.approx(1)
    assert classical_largest_eigenvalue(np.diag([2.0, 5.0, 3.0])) == pytest.approx(5)
    assert jacobi_eigenvalues(np.array([[4.0]])).tolist() == [4.0]


def test_jacobi_matches_power_iteration_oracle(rng):
    for _ in range(100):
        n = int(rng.integers(1, 9))
        a = random_symmetric(rng, n)
        values = jacobi_eigenvalues(a)
        assert np.all(np.diff(values) >= 0)
        assert np.allclose(values, power_deflation_eigenvalues(a), rtol=0, atol=1e-8)
        assert abs(values.sum() - np.trace(a)) < 1e-9


def test_jacobi_matches_lapack_on_larger_matrices(rng):
    a = random_symmetric(rng, 40)
    assert np.allclose(jacobi_eigenvalues(a), np.linalg.eigvalsh(a), atol=1e-9)


def test_jacobi_preconditions():
    with pytest.raises(NumericError):
        jacobi_eigenvalues(np.array([[0.0, 1.0], [2.0, 0.0]]))
    with pytest.raises(DimensionError):
        jacobi_eigenvalues(np.zeros((2, 3)))
    with pytest.raises(ConfigurationError):
        jacobi_eigenvalues(np.eye(65))


def test_bpm_largest_eigenvalue_is_non_negative(rng):
    for _ in range(20):
        assert classical_largest_eigenvalue(random_bpm(rng, 2, 3)) >= 0


def test_ansatz_shape():
    assert Ansatz(2, 2).num_parameters == 6
    assert Ansatz(3, 0).num_parameters == 3
    assert len(Ansatz(2, 1).circuit(np.zeros(4)).gates) == 2 + 1 + 2
    with pytest.raises(ConfigurationError):
        Ansatz(2, 2).circuit(np.zeros(5))
    with pytest.raises(ConfigurationError):
        Ansatz(0, 1)
    with pytest.raises(ConfigurationError):
        AnsatzConfig(-1)


def test_ansatz_states(rng):
    zero = ansatz_state(Ansatz(2, 1), np.zeros(4))
    assert np.allclose(zero.amplitudes, [1, 0, 0, 0])

    flipped = ansatz_state(Ansatz(1, 0), [math.pi])
    assert np.allclose(np.abs(flipped.amplitudes), [0, 1])

    ansatz = Ansatz(3, 2)
    for _ in range(20):
        state = ansatz_state(ansatz, rng.uniform(0, 2 * math.pi, ansatz.num_parameters))
        assert abs(np.linalg.norm(state.amplitudes) - 1) < 1e-10


def test_vqe_cost(rng):
    assert vqe_cost(Ansatz(1, 0), [0.0], np.diag([-5.0, 3.0])) == pytest.approx(-5)

    ansatz = Ansatz(2, 2)
    for _ in range(50):
        theta = rng.uniform(0, 2 * math.pi, ansatz.num_parameters)
        h = random_symmetric(rng, 4)
        psi = ansatz_state(ansatz, theta).amplitudes
        assert abs(vqe_cost(ansatz, theta, h) - (psi.conj() @ h @ psi).real) < 1e-10


def test_variational_lower_bound(rng):
    for _ in range(1000):
        n = int(rng.integers(1, 4))
        ansatz = Ansatz(n, int(rng.integers(0, 3)))
        theta = rng.uniform(0, 2 * math.pi, ansatz.num_parameters)
        h = random_symmetric(rng, 2 ** n)
        assert vqe_cost(ansatz, theta, h) >= np.linalg.eigvalsh(h)[0] - 1e-9


def test_run_vqe_known_ground_states():
    result = run_vqe(np.diag([-1.0, 0.0]), Ansatz(1, 1), OptimizerConfig())
    assert result.eigenvalue_estimate == pytest.approx(-1, abs=1e-4)

    result = run_vqe(-np.array([[0.0, 1.0], [1.0, 0.0]]), Ansatz(1, 1), OptimizerConfig())
    assert result.eigenvalue_estimate == pytest.approx(-1, abs=1e-4)


def test_run_vqe_bookkeeping():
    h = np.diag([-1.0, 0.0])
    result = run_vqe(h, Ansatz(1, 1), OptimizerConfig(restarts=3, seed=5))
    assert len(result.restart_values) == 3
    assert result.eigenvalue_estimate == min(result.restart_values)
    assert result.eigenvalue_estimate == min(result.trace)
    assert result.optimal_theta.shape == (2,)
    assert vqe_cost(Ansatz(1, 1), result.optimal_theta, h) == pytest.approx(result.eigenvalue_estimate)
    assert result.elapsed > 0

    again = run_vqe(h, Ansatz(1, 1), OptimizerConfig(restarts=3, seed=5))
    assert again.restart_values == result.restart_values


def test_more_restarts_never_raise_the_best_cost(rng):
    h, num_qubits = matrix_operator(random_bpm(rng))
    ansatz = Ansatz(num_qubits, 1)
    costs = [
        run_vqe(h, ansatz, OptimizerConfig(restarts=k, seed=9, max_iterations=200)).eigenvalue_estimate
        for k in range(1, 6)
    ]
    assert all(later <= earlier for earlier, later in zip(costs, costs[1:]))


def test_largest_eigenvalue_is_negated_ground_energy(rng):
    bpm = random_bpm(rng, 2, 3)
    optimizer = OptimizerConfig(restarts=2, seed=4)
    lev, _ = quantum_largest_eigenvalue(bpm, AnsatzConfig(1), optimizer)
    h, num_qubits = matrix_operator(bpm)
    ground = run_vqe(h, Ansatz(num_qubits, 1), optimizer)
    assert lev == -ground.eigenvalue_estimate


def test_negated_operator_spectrum(rng):
    for n in range(1, 10):
        bpm = random_bpm(rng, 1 + n // 2, 1 + (n + 1) // 2)
        h, _ = matrix_operator(bpm)
        assert np.linalg.eigvalsh(h)[0] == pytest.approx(-classical_largest_eigenvalue(bpm), abs=1e-9)

        # padding adds zero eigenvalues, so a negative spectrum bottoms out at 0
        a = random_symmetric(rng, n)
        h, _ = matrix_operator(a)
        lam_max = classical_largest_eigenvalue(a)
        expected = -lam_max if lam_max >= 0 or h.shape[0] == n else 0.0
        assert np.linalg.eigvalsh(h)[0] == pytest.approx(expected, abs=1e-9)


def test_run_vqe_spsa():
    result = run_vqe(np.diag([-1.0, 0.0]), Ansatz(1, 0), OptimizerConfig(kind=OptimizerKind.SPSA))
    assert result.eigenvalue_estimate == pytest.approx(-1, abs=1e-3)
    assert result.eigenvalue_estimate >= -1 - 1e-9


def test_run_vqe_validation():
    with pytest.raises(DimensionError):
        run_vqe(np.eye(4), Ansatz(1, 1), OptimizerConfig())
    with pytest.raises(ConfigurationError):
        run_vqe(np.eye(2), Ansatz(1, 1), OptimizerConfig(), initial_theta=[0.0])
    with pytest.raises(ConfigurationError):
        OptimizerConfig(restarts=0)
    with pytest.raises(ConfigurationError):
        OptimizerConfig(max_iterations=0)


def test_quantum_largest_eigenvalue_small_cases():
    lev, elapsed = quantum_largest_eigenvalue(np.array([[0.0, 2.0], [2.0, 0.0]]), AnsatzConfig(), OptimizerConfig())
    assert lev == pytest.approx(2, abs=1e-3)
    assert elapsed >= 0

    lev, _ = quantum_largest_eigenvalue(np.zeros((4, 4)), AnsatzConfig(), OptimizerConfig())
    assert lev == pytest.approx(0, abs=1e-6)

    with pytest.raises(ConfigurationError):
        quantum_largest_eigenvalue(np.zeros((17, 17)), AnsatzConfig(), OptimizerConfig())


def test_quantum_largest_eigenvalue_on_block_matrices(rng):
    bpm = random_bpm(rng)
    lev, _ = quantum_largest_eigenvalue(bpm, AnsatzConfig(2), OptimizerConfig(seed=1))
    classical = classical_largest_eigenvalue(bpm)
    assert abs(lev - classical) / classical <= 1e-2

    # 2 + 3 atoms pads to 8 dimensions
    bpm = random_bpm(rng, 2, 3)
    lev, _ = quantum_largest_eigenvalue(bpm, AnsatzConfig(2), OptimizerConfig(seed=2))
    assert lev <= classical_largest_eigenvalue(bpm) + 1e-9


def test_vqe_acceptance_on_random_block_matrices(rng):
    within = 0
    for trial in range(50):
        bpm = random_bpm(rng)
        classical = classical_largest_eigenvalue(bpm)
        lev, _ = quantum_largest_eigenvalue(bpm, AnsatzConfig(2), OptimizerConfig(seed=trial))
        assert lev <= classical + 1e-9
        if abs(lev - classical) / classical <= 1e-2:
            within += 1
    assert within >= 48


def test_nelder_mead_on_quadratic():
    outcome = nelder_mead(lambda x: float(np.sum((x - 1.5) ** 2)), np.zeros(3), 2000, 1e-10)
    assert np.allclose(outcome.x, 1.5, atol=1e-4)
    assert outcome.nfev > 0


def test_spsa_on_quadratic():
    outcome = spsa(
        lambda x: float(np.sum((x - 0.5) ** 2)),
        np.zeros(2),
        max_iterations=1000,
        tolerance=1e-12,
        rng=np.random.default_rng(3),
    )
    assert outcome.fun < 1e-3
    assert outcome.nit <= 1000
