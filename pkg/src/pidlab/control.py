"""Robustness, stability and rank checks for the controlled dynamics.

Matrix norms written ``||.||_inf`` are the induced infinity norm (largest
absolute row sum), the norm the steady-state perturbation bound is stated in.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .dynamics import b_matrix, p_steady_state
from .errors import InvalidInputError, NumericalFailure
from .kernel import as_matrix, as_square, eigenvalues

RANK_RTOL = 1e-10


def inf_norm(a):
    return float(np.max(np.sum(np.abs(a), axis=1)))


def numerical_rank(a, rtol=RANK_RTOL):
    s = np.linalg.svd(np.atleast_2d(a), compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > rtol * s[0]))


@dataclass(frozen=True)
class RobustnessReport:
    epsilon_bar: float
    beta: float
    measured_gap: float
    bound: float
    satisfied: bool


@dataclass(frozen=True)
class StabilityReport:
    spectral_abscissa: float
    is_stable: bool
    eigenvalue_count: int
    within_range: bool = None


class InverseNormCheck(NamedTuple):
    norm: float
    bound: float
    satisfied: bool


class RankCheck(NamedTuple):
    rank_f: int
    rank_steady: int
    equal: bool


def perturbation_gap(kernel, gains, v0, epsilon):
    """Steady-state shift of P-control when V0 and F = beta V0 are both perturbed."""
    v0 = as_matrix(v0, "v0")
    epsilon = as_matrix(epsilon, "epsilon")
    if epsilon.shape != v0.shape:
        raise InvalidInputError(f"epsilon {epsilon.shape} and v0 {v0.shape} disagree")
    beta = gains.beta
    clean = p_steady_state(kernel, gains.lambda_p, beta * v0)
    noisy = p_steady_state(kernel, gains.lambda_p, beta * (v0 + epsilon))
    eps_bar = inf_norm(epsilon)
    gap = inf_norm(noisy - clean)
    bound = beta * eps_bar
    return RobustnessReport(eps_bar, beta, gap, bound, gap <= bound + 1e-9)


def inverse_inf_norm_bound_check(kernel, lambda_p):
    """||B^-1||_inf against the diagonal-dominance bound 1 / lambda_p."""
    if not lambda_p > 0:
        raise InvalidInputError("lambda_p must be positive")
    try:
        inv = np.linalg.inv(b_matrix(kernel, lambda_p))
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"B is numerically singular: {exc}") from exc
    norm = inf_norm(inv)
    bound = 1.0 / lambda_p
    return InverseNormCheck(norm, bound, norm <= bound + 1e-12)


def spectral_abscissa_check(a, expected_range=None):
    spectrum = eigenvalues(as_square(a, "a"))
    within = None
    if expected_range is not None:
        low, high = expected_range
        re = spectrum.eigenvalues.real
        within = bool(np.all(re >= low - 1e-8) and np.all(re <= high + 1e-8))
    abscissa = spectrum.spectral_abscissa
    return StabilityReport(abscissa, abscissa < 0, len(spectrum), within)


def steady_state_rank_check(kernel, lambda_p, f):
    f = as_matrix(f, "f")
    steady = p_steady_state(kernel, lambda_p, f)
    rank_f = numerical_rank(f)
    rank_steady = numerical_rank(steady)
    return RankCheck(rank_f, rank_steady, rank_f == rank_steady)
