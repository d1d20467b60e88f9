"""Time evolution of the token state under autonomous, P, PD and PID dynamics.

All four modes are affine linear systems ``X' = A X + c`` with a frozen
(time-invariant) kernel, so a single fixed-step integrator covers them:

=============  =====================================  ==============================
mode           A                                      c
=============  =====================================  ==============================
autonomous     K - I                                  0
p_control      B = K - (lp + 1) I                     lp F
pd_control     B / (1 + ld)                           lp F / (1 + ld)
pid_control    companion matrix M (2N x 2N)           [0; li F / (1 + ld)]
=============  =====================================  ==============================

For PID the state is the stacked ``[V; V']`` and only the ``V`` block is
reported.
"""

from dataclasses import dataclass
from enum import Enum
import math

import numpy as np

from . import _backend
from .errors import DivergenceError, InvalidInputError, NumericalFailure
from .kernel import as_matrix, kernel_array, left_perron_vector, matrix_exponential

BLOWUP = 1e12


class Mode(str, Enum):
    AUTONOMOUS = "autonomous"
    P_CONTROL = "p_control"
    PD_CONTROL = "pd_control"
    PID_CONTROL = "pid_control"


@dataclass(frozen=True)
class PIDGains:
    lambda_p: float = 0.0
    lambda_i: float = 0.0
    lambda_d: float = 0.0
    beta: float = 1.0

    def __post_init__(self):
        for name in ("lambda_p", "lambda_i", "lambda_d", "beta"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise InvalidInputError(f"{name} must be finite")
            object.__setattr__(self, name, value)
        if min(self.lambda_p, self.lambda_i, self.lambda_d) < 0:
            raise InvalidInputError("gains must be nonnegative")
        if not 0.0 < self.beta <= 1.0:
            raise InvalidInputError("beta must lie in (0, 1]")


@dataclass(frozen=True)
class SSMConfig:
    kernel: object
    gains: PIDGains = PIDGains()
    reference: np.ndarray = None
    mode: Mode = Mode.AUTONOMOUS

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        if self.mode is not Mode.AUTONOMOUS:
            n = kernel_array(self.kernel).shape[0]
            if self.reference is None:
                raise InvalidInputError(f"{self.mode.value} needs a reference matrix F")
            ref = as_matrix(self.reference, "reference")
            if ref.shape[0] != n:
                raise InvalidInputError(f"reference has {ref.shape[0]} rows, kernel has {n}")
            object.__setattr__(self, "reference", ref)


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    mode: Mode

    def __post_init__(self):
        if len(self.times) != len(self.states):
            raise InvalidInputError("times and states differ in length")

    def __len__(self):
        return len(self.times)

    @property
    def final(self):
        return self.states[-1]

    def at(self, t, atol=1e-9):
        """State recorded at time ``t``."""
        idx = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[idx] - t) > atol:
            raise KeyError(f"no sample at t={t}")
        return self.states[idx]


def b_matrix(kernel, lambda_p):
    k = kernel_array(kernel)
    return k - (lambda_p + 1.0) * np.eye(k.shape[0])


def pid_companion_system(kernel, gains, f, v0):
    """Companion matrix of the doubled PID system and its stacked initial state."""
    k = kernel_array(kernel)
    n = k.shape[0]
    f = as_matrix(f, "f")
    v0 = as_matrix(v0, "v0")
    if f.shape[0] != n or v0.shape[0] != n or f.shape != v0.shape:
        raise InvalidInputError(f"kernel {k.shape}, f {f.shape} and v0 {v0.shape} disagree")
    damp = 1.0 + gains.lambda_d
    b = b_matrix(k, gains.lambda_p)
    m = np.zeros((2 * n, 2 * n))
    m[:n, n:] = np.eye(n)
    m[n:, :n] = -(gains.lambda_i / damp) * np.eye(n)
    m[n:, n:] = b / damp
    dv0 = (b @ v0 + gains.lambda_p * f) / damp
    return m, np.vstack([v0, dv0])


def _affine_system(config, v0):
    """(A, c, x0, diffusion, shift) with A = diffusion - shift * I except for PID."""
    k = kernel_array(config.kernel)
    n = k.shape[0]
    g = config.gains
    if config.mode is Mode.AUTONOMOUS:
        return k - np.eye(n), np.zeros_like(v0), v0, k, 1.0
    f = config.reference
    if f.shape != v0.shape:
        raise InvalidInputError(f"reference {f.shape} and v0 {v0.shape} disagree")
    if config.mode is Mode.P_CONTROL:
        return b_matrix(k, g.lambda_p), g.lambda_p * f, v0, k, g.lambda_p + 1.0
    damp = 1.0 + g.lambda_d
    if config.mode is Mode.PD_CONTROL:
        return b_matrix(k, g.lambda_p) / damp, g.lambda_p * f / damp, v0, k / damp, (g.lambda_p + 1.0) / damp
    m, x0 = pid_companion_system(k, g, f, v0)
    c = np.vstack([np.zeros_like(f), (g.lambda_i / damp) * f])
    return m, c, x0, m, 0.0


def integrate_ssm(config, v0, t_end, dt, method="rk4", record_every=1):
    """Fixed-step integration of the configured dynamics from ``v0``.

    States are recorded every ``record_every`` steps (and always at
    ``t_end``); ``t_end`` must be an integer multiple of ``dt``.
    """
    v0 = as_matrix(v0, "v0")
    n = kernel_array(config.kernel).shape[0]
    if v0.shape[0] != n:
        raise InvalidInputError(f"v0 has {v0.shape[0]} rows, kernel has {n}")
    if not (dt > 0 and math.isfinite(dt)) or not t_end >= dt:
        raise InvalidInputError("need dt > 0 and t_end >= dt")
    n_steps = int(round(t_end / dt))
    if abs(n_steps * dt - t_end) > 1e-9 * max(1.0, t_end):
        raise InvalidInputError(f"t_end={t_end} is not a multiple of dt={dt}")
    if record_every < 1:
        raise InvalidInputError("record_every must be >= 1")

    a, c, x0, diffusion, shift = _affine_system(config, v0)
    if method == "rk4":
        records, fail = _backend.rk4_affine(
            np.ascontiguousarray(a), np.ascontiguousarray(c), np.ascontiguousarray(x0),
            float(dt), n_steps, int(record_every), BLOWUP,
        )
    elif method == "euler":
        records, fail = _euler(a, c, x0, diffusion, shift, dt, n_steps, record_every)
    else:
        raise InvalidInputError(f"unknown method {method!r}")
    if fail >= 0:
        raise DivergenceError(f"state diverged at t={fail * dt:g}", time=fail * dt)

    steps = np.arange(0, n_steps + 1, record_every)
    if steps[-1] != n_steps:
        steps = np.append(steps, n_steps)
    return Trajectory(steps * dt, np.asarray(records)[:, :n, :], config.mode)


def _euler(a, c, x0, diffusion, shift, dt, n_steps, record_every):
    # split update (1 - dt*shift) x + dt (diffusion x + c): with dt = 1 and shift = 1
    # the autonomous step is exactly K @ x
    records = [x0.copy()]
    x = x0.copy()
    keep = 1.0 - dt * shift
    for step in range(1, n_steps + 1):
        x = keep * x + dt * (diffusion @ x + c)
        if not np.all(np.isfinite(x)) or np.max(np.abs(x)) > BLOWUP:
            return np.array(records), step
        if step % record_every == 0 or step == n_steps:
            records.append(x)
    return np.array(records), -1


def autonomous_steady_state(kernel, v0):
    """Rank-one limit of the autonomous flow: every row equals pi^T V0."""
    v0 = as_matrix(v0, "v0")
    pi = left_perron_vector(kernel)
    if pi.shape[0] != v0.shape[0]:
        raise InvalidInputError("kernel and v0 disagree in token count")
    return np.tile(pi @ v0, (v0.shape[0], 1))


def _solve(b, rhs):
    try:
        return np.linalg.solve(b, rhs)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"B is numerically singular: {exc}") from exc


def p_steady_state(kernel, lambda_p, f):
    """-lambda_p * B^{-1} F, the common P/PD-control limit."""
    if not lambda_p > 0:
        raise InvalidInputError("lambda_p must be positive")
    f = as_matrix(f, "f")
    b = b_matrix(kernel, lambda_p)
    if b.shape[0] != f.shape[0]:
        raise InvalidInputError("kernel and f disagree in token count")
    return -lambda_p * _solve(b, f)


def _controlled_solution(kernel, gains, f, v0, t, time_scale):
    v0 = as_matrix(v0, "v0")
    steady = p_steady_state(kernel, gains.lambda_p, f)
    if v0.shape != steady.shape:
        raise InvalidInputError(f"v0 {v0.shape} and f {steady.shape} disagree")
    if t == math.inf:
        return steady
    b = b_matrix(kernel, gains.lambda_p)
    return matrix_exponential(b, t * time_scale) @ (v0 - steady) + steady


def p_control_solution(kernel, gains, f, v0, t):
    """Closed-form P-control state at time ``t`` (``math.inf`` for the limit).

    V(t) = exp(B t)(V0 + lp B^-1 F) - lp B^-1 F with B = K - (lp + 1) I.
    """
    return _controlled_solution(kernel, gains, f, v0, t, 1.0)


def pd_control_solution(kernel, gains, f, v0, t):
    """Closed-form PD-control state; the derivative gain only slows time by 1 + ld."""
    return _controlled_solution(kernel, gains, f, v0, t, 1.0 / (1.0 + gains.lambda_d))


def p_control_rhs(kernel, v, f, lambda_p):
    """Right side sum_j (v_j - v_i) K_ij + lp (f_i - v_i) for any nonnegative K."""
    k = kernel_array(kernel)
    return k @ v - k.sum(axis=1, keepdims=True) * v + lambda_p * (f - v)
