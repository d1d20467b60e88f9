"""Dense small-matrix numerics: softmax kernels, matrix exponential, spectra.

Everything here works on plain ``numpy`` arrays of ``float64``.  The few
value types (:class:`QueryKeyPair`, :class:`StochasticKernel`,
:class:`Spectrum`) validate on construction and hold read-only arrays.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from . import _backend
from .errors import InvalidInputError, NumericalFailure

ROW_SUM_TOL = 1e-12


def as_matrix(a, name="matrix"):
    """Return ``a`` as a finite 2-D float64 array or raise InvalidInputError."""
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise InvalidInputError(f"{name} must be a non-empty 2-D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} has non-finite entries")
    return arr


def as_square(a, name="matrix"):
    arr = as_matrix(a, name)
    if arr.shape[0] != arr.shape[1]:
        raise InvalidInputError(f"{name} must be square, got shape {arr.shape}")
    return arr


def _frozen(arr):
    arr = np.array(arr, dtype=np.float64)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class QueryKeyPair:
    queries: np.ndarray
    keys: np.ndarray
    scale: float = None

    def __post_init__(self):
        q = as_matrix(self.queries, "queries")
        k = as_matrix(self.keys, "keys")
        if q.shape != k.shape:
            raise InvalidInputError(f"queries {q.shape} and keys {k.shape} differ in shape")
        scale = 1.0 / math.sqrt(q.shape[1]) if self.scale is None else float(self.scale)
        if not (scale > 0 and math.isfinite(scale)):
            raise InvalidInputError("scale must be positive and finite")
        object.__setattr__(self, "queries", _frozen(q))
        object.__setattr__(self, "keys", _frozen(k))
        object.__setattr__(self, "scale", scale)

    @property
    def n_tokens(self):
        return self.queries.shape[0]


@dataclass(frozen=True)
class StochasticKernel:
    """Strictly positive N x N matrix whose rows each sum to one."""

    weights: np.ndarray

    def __post_init__(self):
        w = as_square(self.weights, "kernel weights")
        if np.any(w <= 0):
            raise InvalidInputError("kernel entries must be strictly positive")
        if np.max(np.abs(w.sum(axis=1) - 1.0)) >= ROW_SUM_TOL:
            raise InvalidInputError("kernel rows must sum to 1 within 1e-12")
        object.__setattr__(self, "weights", _frozen(w))

    @property
    def n_tokens(self):
        return self.weights.shape[0]


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: np.ndarray
    spectral_abscissa: float = field(init=False)

    def __post_init__(self):
        ev = np.asarray(self.eigenvalues, dtype=np.complex128).copy()
        ev.setflags(write=False)
        object.__setattr__(self, "eigenvalues", ev)
        object.__setattr__(self, "spectral_abscissa", float(np.max(ev.real)))

    def __len__(self):
        return len(self.eigenvalues)


def kernel_array(kernel):
    """Accept a StochasticKernel or any finite square matrix."""
    if isinstance(kernel, StochasticKernel):
        return kernel.weights
    return as_square(kernel, "kernel")


def softmax_rows(scores):
    """Row-wise softmax with max subtraction; entries may underflow to 0."""
    scores = scores - scores.max(axis=1, keepdims=True)
    w = np.exp(scores)
    w /= w.sum(axis=1, keepdims=True)
    return w


def build_softmax_kernel(qk):
    return StochasticKernel(softmax_rows((qk.queries @ qk.keys.T) * qk.scale))


def random_query_key(rng, n_tokens, d_qk):
    """Standard-normal queries and keys, the default draw for random kernels."""
    return QueryKeyPair(rng.standard_normal((n_tokens, d_qk)), rng.standard_normal((n_tokens, d_qk)))


def random_kernel(rng, n_tokens, d_qk=2):
    return build_softmax_kernel(random_query_key(rng, n_tokens, d_qk))


def softmax_attention_step(kernel, v):
    k = kernel_array(kernel)
    v = as_matrix(v, "values")
    if k.shape[1] != v.shape[0]:
        raise InvalidInputError(f"kernel is {k.shape} but values have {v.shape[0]} tokens")
    return k @ v


# Taylor degree paired with scaling to 1-norm <= 1/2: truncation error < 2**-19 / 19!  (~1e-23)
_EXPM_DEGREE = 18
_EXPM_THETA = 0.5


def matrix_exponential(a, t=1.0):
    """exp(a * t) by scaling and squaring of a truncated Taylor series."""
    a = as_square(a, "a")
    t = float(t)
    if not math.isfinite(t):
        raise InvalidInputError("t must be finite")
    n = a.shape[0]
    at = a * t
    norm = np.linalg.norm(at, 1)
    squarings = 0
    if norm > _EXPM_THETA:
        squarings = int(math.ceil(math.log2(norm / _EXPM_THETA)))
    scaled = at / 2.0**squarings
    eye = np.eye(n)
    result = eye.copy()
    for k in range(_EXPM_DEGREE, 0, -1):
        result = eye + (scaled @ result) / k
    for _ in range(squarings):
        result = result @ result
    return result


def left_perron_vector(kernel, tol=1e-12, max_iter=100_000):
    """Positive left eigenvector of a stochastic kernel for eigenvalue 1, summing to 1.

    Power iteration on K^T from the uniform vector.
    """
    k = kernel_array(kernel)
    pi, iterations, change = _backend.perron_power(np.ascontiguousarray(k.T), tol, max_iter)
    pi = np.asarray(pi)
    residual = float(np.max(np.abs(pi @ k - pi)))
    if change >= tol or residual >= 1e-10 or np.any(pi <= 0):
        raise NumericalFailure(
            f"power iteration did not converge after {iterations} iterations "
            f"(step change {change:.3e}, residual {residual:.3e})",
            residual=residual,
        )
    return pi


def hessenberg(a):
    """Upper Hessenberg form of ``a`` by Householder reflections (similarity)."""
    h = as_square(a, "a").copy()
    n = h.shape[0]
    for k in range(n - 2):
        x = h[k + 1:, k]
        alpha = np.linalg.norm(x)
        if alpha == 0.0:
            continue
        u = x.copy()
        u[0] += math.copysign(alpha, x[0])
        u /= np.linalg.norm(u)
        h[k + 1:, k:] -= 2.0 * np.outer(u, u @ h[k + 1:, k:])
        h[:, k + 1:] -= 2.0 * np.outer(h[:, k + 1:] @ u, u)
        h[k + 2:, k] = 0.0
    return h


def _wilkinson_shift(a, b, c, d):
    # eigenvalue of [[a, b], [c, d]] closest to d
    half_tr = 0.5 * (a + d)
    disc = np.sqrt(half_tr * half_tr - (a * d - b * c))
    mu1, mu2 = half_tr + disc, half_tr - disc
    return mu1 if abs(mu1 - d) <= abs(mu2 - d) else mu2


def eigenvalues(a, max_sweeps=None):
    """All eigenvalues with multiplicity: Hessenberg reduction + shifted QR.

    Single-shift QR with Wilkinson shifts in complex arithmetic, deflating
    from the bottom of the active block.  Raises NumericalFailure when the
    total number of QR sweeps exceeds ``100 * n``.
    """
    h = hessenberg(a).astype(np.complex128)
    n = h.shape[0]
    cap = 100 * n if max_sweeps is None else max_sweeps
    eps = np.finfo(float).eps
    found = []
    hi = n - 1
    sweeps = 0
    stalled = 0
    while hi >= 0:
        if hi == 0:
            found.append(h[0, 0])
            break
        lo = hi
        while lo > 0:
            scale = abs(h[lo - 1, lo - 1]) + abs(h[lo, lo])
            if scale == 0.0:
                scale = np.linalg.norm(h[: hi + 1, : hi + 1], 1)
            if abs(h[lo, lo - 1]) <= eps * scale:
                h[lo, lo - 1] = 0.0
                break
            lo -= 1
        if lo == hi:
            found.append(h[hi, hi])
            hi -= 1
            stalled = 0
            continue
        if sweeps >= cap:
            raise NumericalFailure(
                f"QR iteration exceeded {cap} sweeps with {hi + 1} eigenvalues unresolved",
                residual=float(abs(h[hi, hi - 1])),
            )
        sweeps += 1
        stalled += 1
        if stalled % 11 == 10:
            # exceptional shift to break cycles
            mu = h[hi, hi] + 0.75 * abs(h[hi, hi - 1]) * (1 + 1j)
        else:
            mu = _wilkinson_shift(h[hi - 1, hi - 1], h[hi - 1, hi], h[hi, hi - 1], h[hi, hi])
        _qr_sweep(h, lo, hi, mu)
    return Spectrum(np.array(found[::-1]))


def _qr_sweep(h, lo, hi, mu):
    # H - mu I = QR, H <- RQ + mu I on the active block, Givens rotations
    idx = range(lo, hi + 1)
    for i in idx:
        h[i, i] -= mu
    rotations = []
    for k in range(lo, hi):
        x, y = h[k, k], h[k + 1, k]
        r = math.hypot(abs(x), abs(y))
        if r == 0.0:
            c, s = 1.0, 0.0
        else:
            c, s = x / r, y / r
        rotations.append((c, s))
        rows = h[k : k + 2, k : hi + 1]
        top = np.conj(c) * rows[0] + np.conj(s) * rows[1]
        bot = -s * rows[0] + c * rows[1]
        rows[0], rows[1] = top, bot
    for k, (c, s) in zip(range(lo, hi), rotations):
        cols = h[lo : min(k + 3, hi + 1), k : k + 2]
        left = cols[:, 0] * c + cols[:, 1] * s
        right = -cols[:, 0] * np.conj(s) + cols[:, 1] * np.conj(c)
        cols[:, 0], cols[:, 1] = left, right
    for i in idx:
        h[i, i] += mu
