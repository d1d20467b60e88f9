"""PID-controlled attention layers stacked into a toy forward model.

The stack has no residuals, normalisation or MLPs.  The first layer
projects the input to values with ``w_v``; after that the hidden state is
used as values directly and every layer draws its own query/key maps.

Indexing: the state handed to layer ``m`` (1-based) is ``v^m``; layer 1
sees ``v^1 = v^0``.  Its error is ``e^m = f - v^m`` with ``f = beta v^0``,
and ``e^0 = f - v^0``.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .errors import InvalidInputError
from .kernel import as_matrix, softmax_rows


@dataclass(frozen=True)
class LayerWeights:
    w_q: np.ndarray
    w_k: np.ndarray
    w_v: np.ndarray = None

    def __post_init__(self):
        w_q = as_matrix(self.w_q, "w_q")
        w_k = as_matrix(self.w_k, "w_k")
        if w_q.shape != w_k.shape:
            raise InvalidInputError(f"w_q {w_q.shape} and w_k {w_k.shape} differ")
        object.__setattr__(self, "w_q", w_q)
        object.__setattr__(self, "w_k", w_k)
        if self.w_v is not None:
            object.__setattr__(self, "w_v", as_matrix(self.w_v, "w_v"))

    def attention(self, v):
        """Softmax attention matrix of hidden state ``v``.

        Returned as a plain array: deep PID stacks can push scores far enough
        apart that some weights underflow to exactly zero.
        """
        q = v @ self.w_q.T
        k = v @ self.w_k.T
        return softmax_rows((q @ k.T) / math.sqrt(q.shape[1]))


def init_layer_weights(rng, depth, dim, d_qk=None, d_x=None):
    """Independent zero-mean normal weights with variance 1 / (fan-in)."""
    d_qk = dim if d_qk is None else d_qk
    d_x = dim if d_x is None else d_x
    layers = []
    for layer in range(depth):
        w_q = rng.normal(0.0, 1.0 / math.sqrt(dim), (d_qk, dim))
        w_k = rng.normal(0.0, 1.0 / math.sqrt(dim), (d_qk, dim))
        w_v = rng.normal(0.0, 1.0 / math.sqrt(d_x), (dim, d_x)) if layer == 0 else None
        layers.append(LayerWeights(w_q, w_k, w_v))
    return layers


@dataclass(frozen=True)
class NetworkState:
    v_current: np.ndarray
    v_reference: np.ndarray
    error_sum: np.ndarray
    error_prev: np.ndarray
    layer_index: int = 0

    @classmethod
    def initial(cls, v0, beta):
        v0 = as_matrix(v0, "v0")
        f = beta * v0
        return cls(v0, f, np.zeros_like(v0), f - v0, 0)


@dataclass
class LayerTrace:
    per_layer_states: list = field(default_factory=list)
    per_layer_cosine: list = field(default_factory=list)
    per_layer_stable_rank: list = field(default_factory=list)

    def record(self, v):
        self.per_layer_states.append(v)
        self.per_layer_cosine.append(mean_pairwise_cosine(v))
        self.per_layer_stable_rank.append(stable_rank(v))

    @property
    def depth(self):
        return len(self.per_layer_states) - 1


def pid_attention_layer(state, weights, gains):
    v = state.v_current
    if weights.w_q.shape[1] != v.shape[1]:
        raise InvalidInputError(f"w_q expects dim {weights.w_q.shape[1]}, state has {v.shape[1]}")
    err = state.v_reference - v
    err_sum = state.error_sum + err
    u = (
        weights.attention(v) @ v
        + gains.lambda_p * err
        + gains.lambda_i * err_sum
        + gains.lambda_d * (err - state.error_prev)
    )
    return NetworkState(u, state.v_reference, err_sum, err, state.layer_index + 1)


def forward_stack(inputs, weights, gains, depth=None):
    depth = len(weights) if depth is None else depth
    if depth < 1 or len(weights) != depth:
        raise InvalidInputError(f"need depth >= 1 and one LayerWeights per layer, got {len(weights)} for {depth}")
    if weights[0].w_v is None:
        raise InvalidInputError("first layer needs a value projection w_v")
    x = as_matrix(inputs, "inputs")
    v0 = x @ weights[0].w_v.T
    state = NetworkState.initial(v0, gains.beta)
    trace = LayerTrace()
    trace.record(v0)
    for layer in weights:
        state = pid_attention_layer(state, layer, gains)
        trace.record(state.v_current)
    return trace


def mean_pairwise_cosine(v):
    v = as_matrix(v, "v")
    n = v.shape[0]
    if n < 2:
        raise InvalidInputError("need at least two tokens")
    norms = np.linalg.norm(v, axis=1)
    if np.any(norms == 0):
        raise InvalidInputError("zero-norm token row")
    unit = v / norms[:, None]
    total = unit.sum(axis=0)
    # sum over all ordered pairs i != j = |sum_i u_i|^2 - sum_i |u_i|^2
    return float((total @ total - np.sum(unit * unit)) / (n * (n - 1)))


def stable_rank(v):
    v = as_matrix(v, "v")
    s = np.linalg.svd(v, compute_uv=False)
    if s[0] == 0.0:
        raise InvalidInputError("stable rank of the zero matrix is undefined")
    return float(np.sum(s**2) / s[0] ** 2)
