"""Small feedforward networks in numpy: forward pass, backprop, Adam.

Layers are ``h_l = act(h_{l-1} @ A_l.T + b_l)`` with the activation applied
to every layer except the last, which is affine. Inputs are either a single
vector of length ``N_0`` or a batch of shape ``(n, N_0)``.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import expit

from .market import philox_generator

ACTIVATIONS = ("tanh", "sigmoid", "swish")


def _act(name, z, with_grad=False):
    """Activation value, and its derivative when ``with_grad``."""
    if name == "tanh":
        h = np.tanh(z)
        return (h, 1.0 - h * h) if with_grad else h
    s = expit(z)
    if name == "sigmoid":
        return (s, s * (1.0 - s)) if with_grad else s
    if name == "swish":
        h = z * s
        return (h, s + h * (1.0 - s)) if with_grad else h
    raise ValueError(f"unknown activation {name!r}")


@dataclass
class NetworkParams:
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    activation: str = "swish"

    def __post_init__(self):
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")
        if len(self.weights) != len(self.biases) or not self.weights:
            raise ValueError("need one bias per weight matrix and at least one layer")
        for l, (A, b) in enumerate(zip(self.weights, self.biases)):
            if A.ndim != 2 or b.shape != (A.shape[0],):
                raise ValueError(f"layer {l}: weight {A.shape} and bias {b.shape} do not match")
            if l and A.shape[1] != self.weights[l - 1].shape[0]:
                raise ValueError(f"layer {l} expects {A.shape[1]} inputs, previous layer gives {self.weights[l - 1].shape[0]}")

    @property
    def layer_dims(self) -> list[int]:
        return [self.weights[0].shape[1]] + [A.shape[0] for A in self.weights]

    def arrays(self) -> list[np.ndarray]:
        """Weights and biases interleaved: ``[A_1, b_1, A_2, b_2, ...]``."""
        out = []
        for A, b in zip(self.weights, self.biases):
            out += [A, b]
        return out

    def with_arrays(self, arrays) -> "NetworkParams":
        return NetworkParams(list(arrays[0::2]), list(arrays[1::2]), self.activation)

    def copy(self) -> "NetworkParams":
        return self.with_arrays([a.copy() for a in self.arrays()])

    @property
    def n_params(self) -> int:
        return sum(a.size for a in self.arrays())


def init_truncated_normal(dims, seed: int, activation: str = "swish") -> NetworkParams:
    """Weights from a standard normal truncated at two standard deviations.

    Draws beyond ``|z| > 2`` are discarded and redrawn; the accepted values
    are scaled by ``1 / sqrt(fan_in)``. Biases start at zero.
    """
    dims = [int(d) for d in dims]
    if len(dims) < 2 or min(dims) < 1:
        raise ValueError(f"invalid layer dims {dims}")
    gen = philox_generator(seed, 0)
    weights, biases = [], []
    for n_in, n_out in zip(dims[:-1], dims[1:]):
        z = gen.standard_normal((n_out, n_in))
        bad = np.abs(z) > 2.0
        while bad.any():
            z[bad] = gen.standard_normal(int(bad.sum()))
            bad = np.abs(z) > 2.0
        weights.append(z / np.sqrt(n_in))
        biases.append(np.zeros(n_out))
    return NetworkParams(weights, biases, activation)


def zeros_like(params: NetworkParams) -> NetworkParams:
    return params.with_arrays([np.zeros_like(a) for a in params.arrays()])


def _as_batch(params, x):
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    xb = x[None, :] if single else x
    if xb.ndim != 2 or xb.shape[1] != params.weights[0].shape[1]:
        raise ValueError(f"input shape {x.shape} does not match network input size {params.weights[0].shape[1]}")
    return xb, single


def _forward_cache(params: NetworkParams, xb: np.ndarray):
    # cache: layer inputs and activation derivatives of the hidden layers
    dact, post = [], [xb]
    h = xb
    L = len(params.weights)
    for l, (A, b) in enumerate(zip(params.weights, params.biases)):
        z = h @ A.T + b
        if l < L - 1:
            h, dz = _act(params.activation, z, with_grad=True)
            dact.append(dz)
        else:
            h = z
        post.append(h)
    return dact, post


def forward(params: NetworkParams, x) -> np.ndarray:
    xb, single = _as_batch(params, x)
    h = xb
    L = len(params.weights)
    for l, (A, b) in enumerate(zip(params.weights, params.biases)):
        h = h @ A.T + b
        if l < L - 1:
            h = _act(params.activation, h)
    out = h
    return out[0] if single else out


def forward_with_cache(params: NetworkParams, x):
    """Forward pass keeping intermediates for :func:`backward_from_cache`."""
    xb, _ = _as_batch(params, x)
    cache = _forward_cache(params, xb)
    return cache[1][-1], cache


def backward_from_cache(params: NetworkParams, cache, upstream: np.ndarray):
    dact, post = cache
    g = upstream
    L = len(params.weights)
    grad_w, grad_b = [None] * L, [None] * L
    for l in range(L - 1, -1, -1):
        if l < L - 1:
            g = g * dact[l]
        grad_w[l] = g.T @ post[l]
        grad_b[l] = g.sum(axis=0)
        g = g @ params.weights[l]
    return NetworkParams(grad_w, grad_b, params.activation), g


def backward(params: NetworkParams, x, upstream_grad):
    """Gradient of ``sum(upstream_grad * forward(params, x))``.

    Returns ``(grads, grad_x)`` where ``grads`` is a :class:`NetworkParams`
    holding parameter gradients (summed over a batch) and ``grad_x`` has the
    shape of ``x``.
    """
    xb, single = _as_batch(params, x)
    up = np.asarray(upstream_grad, dtype=float)
    up = up[None, :] if single else up
    if up.shape != (xb.shape[0], params.weights[-1].shape[0]):
        raise ValueError(f"upstream gradient shape {np.shape(upstream_grad)} does not match the output")
    grads, gx = backward_from_cache(params, _forward_cache(params, xb), up)
    return grads, (gx[0] if single else gx)


def truncate(y, C: float):
    """Clamp componentwise to ``[-C, C]``."""
    if not C > 0:
        raise ValueError(f"truncation bound must be positive, got {C}")
    return np.clip(y, -C, C)


def truncate_grad(y, C: float):
    # subgradient 1 on the closed interval, 0 outside
    return (np.abs(y) <= C).astype(float)


@dataclass
class AdamState:
    m: list[np.ndarray]
    v: list[np.ndarray]
    t: int = 0
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


def adam_init(params: list[np.ndarray], lr: float = 1e-3) -> AdamState:
    return AdamState([np.zeros_like(p) for p in params], [np.zeros_like(p) for p in params], 0, lr)


def adam_step(state: AdamState, params: list[np.ndarray], grads: list[np.ndarray]):
    """One bias-corrected Adam update. Inputs are left untouched."""
    if len(params) != len(grads) or len(params) != len(state.m):
        raise ValueError("params, grads and optimizer state must have the same structure")
    t = state.t + 1
    b1, b2 = state.beta1, state.beta2
    m_new, v_new, p_new = [], [], []
    for p, g, m, v in zip(params, grads, state.m, state.v):
        if p.shape != g.shape:
            raise ValueError(f"gradient shape {g.shape} does not match parameter {p.shape}")
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * g * g
        m_hat = m / (1 - b1**t)
        v_hat = v / (1 - b2**t)
        p_new.append(p - state.lr * m_hat / (np.sqrt(v_hat) + state.eps))
        m_new.append(m)
        v_new.append(v)
    new_state = AdamState(m_new, v_new, t, state.lr, state.beta1, state.beta2, state.eps)
    return new_state, p_new


# --- checkpoint format -----------------------------------------------------
# little-endian: b"SHNN", u32 version, u32 activation index, u32 n_dims,
# u32 dims[n_dims], then per layer A (row-major f64) followed by b (f64).

MAGIC = b"SHNN"
VERSION = 1


def params_to_bytes(params: NetworkParams) -> bytes:
    dims = params.layer_dims
    head = MAGIC + struct.pack("<III", VERSION, ACTIVATIONS.index(params.activation), len(dims))
    head += struct.pack(f"<{len(dims)}I", *dims)
    body = b"".join(np.ascontiguousarray(a, dtype="<f8").tobytes() for a in params.arrays())
    return head + body


def params_from_bytes(buf: bytes, offset: int = 0):
    """Parse one network; returns ``(params, next_offset)``."""
    if buf[offset : offset + 4] != MAGIC:
        raise ValueError("not a network checkpoint (bad magic)")
    version, act, n = struct.unpack_from("<III", buf, offset + 4)
    if version != VERSION:
        raise ValueError(f"unsupported checkpoint version {version}")
    pos = offset + 16
    dims = struct.unpack_from(f"<{n}I", buf, pos)
    pos += 4 * n
    arrays = []
    for n_in, n_out in zip(dims[:-1], dims[1:]):
        for shape in ((n_out, n_in), (n_out,)):
            size = int(np.prod(shape))
            arrays.append(np.frombuffer(buf, dtype="<f8", count=size, offset=pos).reshape(shape).astype(float))
            pos += 8 * size
    return NetworkParams(arrays[0::2], arrays[1::2], ACTIVATIONS[act]), pos


def save_params(path, params: NetworkParams):
    Path(path).write_bytes(params_to_bytes(params))


def load_params(path) -> NetworkParams:
    return params_from_bytes(Path(path).read_bytes())[0]
