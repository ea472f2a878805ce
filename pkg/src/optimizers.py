"""Derivative-free minimizers used by the variational eigensolver."""

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import minimize


@dataclass
class OptimizeOutcome:
    x: np.ndarray
    fun: float
    nfev: int
    nit: int


def nelder_mead(
    objective: Callable[[np.ndarray], float],
    x0: np.ndarray,
    max_iterations: int,
    tolerance: float,
    simplex_step: float = 0.5,
) -> OptimizeOutcome:
    x0 = np.asarray(x0, dtype=float)
    # angle-sized initial simplex; scipy's default (5% of x0) is too small for rotations
    simplex = np.vstack([x0, x0 + simplex_step * np.eye(x0.size)])
    result = minimize(
        objective,
        x0,
        method="Nelder-Mead",
        options={
            "maxiter": max_iterations,
            "xatol": tolerance,
            "fatol": tolerance,
            "adaptive": x0.size > 4,
            "initial_simplex": simplex,
        },
    )
    return OptimizeOutcome(x=np.asarray(result.x), fun=float(result.fun), nfev=int(result.nfev), nit=int(result.nit))


def spsa(
    objective: Callable[[np.ndarray], float],
    x0: np.ndarray,
    max_iterations: int,
    tolerance: float,
    rng: np.random.Generator,
    learning_rate: float = 0.6,
    perturbation: float = 0.2,
    alpha: float = 0.602,
    gamma: float = 0.101,
) -> OptimizeOutcome:
    """
    Simultaneous perturbation stochastic approximation with the standard
    power-law gain schedules. Stops early once a step shrinks below tolerance.
    """
    x = np.array(x0, dtype=float)
    stability = 0.1 * max_iterations
    best_x, best_f = x.copy(), float(objective(x))
    nfev = 1
    nit = 0

    for k in range(max_iterations):
        nit = k + 1
        a_k = learning_rate / (k + 1 + stability) ** alpha
        c_k = perturbation / (k + 1) ** gamma
        delta = rng.choice([-1.0, 1.0], size=x.size)

        f_plus = float(objective(x + c_k * delta))
        f_minus = float(objective(x - c_k * delta))
        # 1 / delta_i == delta_i for Rademacher perturbations
        step = a_k * (f_plus - f_minus) / (2.0 * c_k) * delta
        x = x - step

        value = float(objective(x))
        nfev += 3
        if value < best_f:
            best_x, best_f = x.copy(), value
        if np.linalg.norm(step) < tolerance:
            break

    return OptimizeOutcome(x=best_x, fun=best_f, nfev=nfev, nit=nit)
