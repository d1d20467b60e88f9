"""Nonlocal energies on tokens, their gradients, and Bregman / PI updates."""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, NumericalFailure
from .kernel import as_matrix, kernel_array


@dataclass(frozen=True)
class SymmetricProximity:
    """Nonnegative pairwise proximity k(i, j); need not be symmetric or stochastic."""

    k_weights: np.ndarray

    def __post_init__(self):
        k = as_matrix(self.k_weights, "k_weights")
        if k.shape[0] != k.shape[1]:
            raise InvalidInputError("k_weights must be square")
        if np.any(k < 0):
            raise InvalidInputError("k_weights must be nonnegative")
        k = k.copy()
        k.setflags(write=False)
        object.__setattr__(self, "k_weights", k)

    @property
    def n_tokens(self):
        return self.k_weights.shape[0]

    @property
    def symmetrized(self):
        """k(i, j) + k(j, i), the kernel of the induced gradient flow."""
        return self.k_weights + self.k_weights.T


@dataclass(frozen=True)
class BregmanState:
    iterate: np.ndarray
    accumulated_error: np.ndarray
    iteration: int = 0

    @classmethod
    def start(cls, v0):
        v0 = as_matrix(v0, "v0")
        return cls(v0, np.zeros_like(v0), 0)


def _check(prox, v):
    v = as_matrix(v, "v")
    if v.shape[0] != prox.n_tokens:
        raise InvalidInputError(f"v has {v.shape[0]} tokens, proximity has {prox.n_tokens}")
    return v


def _check_pair(v, f):
    f = as_matrix(f, "f")
    if f.shape != v.shape:
        raise InvalidInputError(f"f {f.shape} and v {v.shape} disagree")
    return f


def nonlocal_energy_J(prox, v):
    v = _check(prox, v)
    diff = v[:, None, :] - v[None, :, :]
    return 0.5 * float(np.sum(np.sum(diff * diff, axis=2) * prox.k_weights))


def grad_J(prox, v):
    v = _check(prox, v)
    # pairwise form keeps the gradient exactly zero on constant states
    diff = v[:, None, :] - v[None, :, :]
    return np.sum(prox.symmetrized[:, :, None] * diff, axis=1)


def nonlocal_flow_rhs(prox, v):
    """sum_j (v_j - v_i)(k(i, j) + k(j, i)), written as an explicit pairwise sum."""
    v = _check(prox, v)
    diff = v[None, :, :] - v[:, None, :]
    return np.einsum("ij,ijc->ic", prox.symmetrized, diff)


def regularized_energy_E(prox, v, f, lam):
    v = _check(prox, v)
    f = _check_pair(v, f)
    if lam < 0:
        raise InvalidInputError("lambda must be nonnegative")
    return nonlocal_energy_J(prox, v) + 0.5 * lam * float(np.sum((v - f) ** 2))


def grad_E(prox, v, f, lam):
    v = _check(prox, v)
    f = _check_pair(v, f)
    if lam < 0:
        raise InvalidInputError("lambda must be nonnegative")
    return grad_J(prox, v) + lam * (v - f)


def regularized_flow_rhs(prox, v, f, lam):
    """Right side of the gradient flow of E, assembled term by term."""
    return nonlocal_flow_rhs(prox, v) + lam * (_check_pair(v, f) - v)


def finite_difference_gradient(scalar_fn, v, h=1e-5):
    """Central differences of ``scalar_fn`` with respect to every entry of ``v``."""
    if not h > 0:
        raise InvalidInputError("h must be positive")
    v = as_matrix(v, "v")
    grad = np.empty_like(v)
    probe = v.copy()
    for idx in np.ndindex(v.shape):
        orig = probe[idx]
        probe[idx] = orig + h
        up = scalar_fn(probe)
        probe[idx] = orig - h
        down = scalar_fn(probe)
        probe[idx] = orig
        if not (np.isfinite(up) and np.isfinite(down)):
            raise NumericalFailure(f"non-finite evaluation at entry {idx}")
        grad[idx] = (up - down) / (2.0 * h)
    return grad


def bregman_step(prox, state, f, lam):
    """One explicit gradient step on the Bregman subproblem.

    v+ = v - grad_J(v) + lam (f - v) + lam * e_a, then e_a += f - v+.
    """
    if not lam > 0:
        raise InvalidInputError("lambda must be positive")
    v = _check(prox, state.iterate)
    f = _check_pair(v, f)
    if state.accumulated_error.shape != v.shape:
        raise InvalidInputError("accumulated_error and iterate disagree")
    nxt = v - grad_J(prox, v) + lam * (f - v) + lam * state.accumulated_error
    return BregmanState(nxt, state.accumulated_error + (f - nxt), state.iteration + 1)


def pi_euler_step(kernel, v, f, lambda_p, lambda_i, error_history_sum):
    """Unit-step Euler update of the PI-controlled flow for any nonnegative kernel."""
    k = kernel_array(kernel)
    v = as_matrix(v, "v")
    f = _check_pair(v, f)
    s = _check_pair(v, error_history_sum)
    if k.shape[0] != v.shape[0]:
        raise InvalidInputError(f"kernel {k.shape} and v {v.shape} disagree")
    diffusion = np.einsum("ij,ijc->ic", k, v[None, :, :] - v[:, None, :])
    return v + diffusion + lambda_p * (f - v) + lambda_i * s
