"""Numeric core shared by both translation models.

Layers are plain functions over numpy arrays. Every forward returns its output
and a cache tuple; the matching backward consumes the cache and the upstream
gradient. Shapes are batch-first: sequences are ``[batch, time, features]``.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import IndexOutOfRange, NonFiniteError, ShapeMismatch


def check_finite(name, arr):
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError(f"non-finite values in {name}")
    return arr


def glorot_uniform(rng, fan_in, fan_out, dtype=np.float32):
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out)).astype(dtype)


def sigmoid(x):
    # split by sign so exp never overflows
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


# ---------------------------------------------------------------------------
# parameter records


@dataclass
class GruParams:
    W_z: np.ndarray
    W_r: np.ndarray
    W_h: np.ndarray
    U_z: np.ndarray
    U_r: np.ndarray
    U_h: np.ndarray
    b_z: np.ndarray
    b_r: np.ndarray
    b_h: np.ndarray

    NAMES = ("W_z", "W_r", "W_h", "U_z", "U_r", "U_h", "b_z", "b_r", "b_h")

    @classmethod
    def init(cls, input_dim, hidden, rng, dtype=np.float32, update_bias=1.0):
        """Glorot-uniform kernels, zero biases except the update gate.

        ``update_bias`` starts the update gate open so early training is driven
        by the current input rather than by the untrained recurrent state.
        """
        kw = {}
        for gate in "zrh":
            kw[f"W_{gate}"] = glorot_uniform(rng, input_dim, hidden, dtype)
        for gate in "zrh":
            kw[f"U_{gate}"] = glorot_uniform(rng, hidden, hidden, dtype)
        for gate in "zrh":
            kw[f"b_{gate}"] = np.zeros(hidden, dtype=dtype)
        kw["b_z"] += update_bias
        return cls(**kw)

    @property
    def input_dim(self):
        return self.W_z.shape[0]

    @property
    def hidden(self):
        return self.W_z.shape[1]

    def named(self):
        return [(n, getattr(self, n)) for n in self.NAMES]

    @property
    def count(self):
        return sum(a.size for _, a in self.named())


@dataclass
class EmbeddingParams:
    table: np.ndarray

    NAMES = ("table",)

    @classmethod
    def init(cls, vocab_size, embed_dim, rng, dtype=np.float32):
        # unit-variance rows; Glorot scaling over a vocabulary-sized fan-in
        # leaves the vectors too small to separate words early in training
        return cls(rng.standard_normal((vocab_size, embed_dim)).astype(dtype))

    def named(self):
        return [("table", self.table)]

    @property
    def count(self):
        return self.table.size


@dataclass
class DenseParams:
    W: np.ndarray
    b: np.ndarray

    NAMES = ("W", "b")

    @classmethod
    def init(cls, n_in, n_out, rng, dtype=np.float32):
        return cls(glorot_uniform(rng, n_in, n_out, dtype), np.zeros(n_out, dtype=dtype))

    def named(self):
        return [("W", self.W), ("b", self.b)]

    @property
    def count(self):
        return self.W.size + self.b.size


def gru_param_count(input_dim, hidden):
    return 3 * ((input_dim + hidden) * hidden + hidden)


# ---------------------------------------------------------------------------
# GRU


def gru_forward(x, params, h0=None):
    """Run a GRU over ``x`` of shape ``[batch, T, input_dim]``.

    Returns the hidden sequence ``[batch, T, hidden]`` and a cache for
    :func:`gru_backward`. The reset gate multiplies the previous state before
    the recurrent candidate kernel, with a single bias per gate.
    """
    x = np.asarray(x)
    if x.ndim != 3 or x.shape[2] != params.input_dim:
        raise ShapeMismatch(f"GRU expects [batch, T, {params.input_dim}], got {x.shape}")
    B, T, _ = x.shape
    n = params.hidden
    dtype = params.W_z.dtype
    x = x.astype(dtype, copy=False)
    if h0 is None:
        h0 = np.zeros((B, n), dtype=dtype)
    elif h0.shape != (B, n):
        raise ShapeMismatch(f"h0 must be {(B, n)}, got {h0.shape}")

    # input projections for every timestep at once
    xz = x @ params.W_z + params.b_z
    xr = x @ params.W_r + params.b_r
    xh = x @ params.W_h + params.b_h

    H = np.empty((B, T, n), dtype=dtype)
    Z = np.empty_like(H)
    R = np.empty_like(H)
    HC = np.empty_like(H)
    h = h0
    for t in range(T):
        z = sigmoid(xz[:, t] + h @ params.U_z)
        r = sigmoid(xr[:, t] + h @ params.U_r)
        hc = np.tanh(xh[:, t] + (r * h) @ params.U_h)
        h = (1 - z) * h + z * hc
        Z[:, t], R[:, t], HC[:, t], H[:, t] = z, r, hc, h
    return H, (x, h0, H, Z, R, HC, params)


def gru_backward(cache, dH):
    """Backpropagate ``dH`` (``[batch, T, hidden]``) through the GRU.

    Returns ``(grads, dx, dh0)`` where ``grads`` is a :class:`GruParams` of
    gradients.
    """
    x, h0, H, Z, R, HC, p = cache
    if dH.shape != H.shape:
        raise ShapeMismatch(f"upstream gradient {dH.shape} does not match {H.shape}")
    B, T, n = H.shape
    dAz = np.empty_like(H)
    dAr = np.empty_like(H)
    dAh = np.empty_like(H)
    dU = {g: np.zeros_like(p.U_z) for g in "zrh"}
    dh_next = np.zeros_like(h0)
    for t in reversed(range(T)):
        h_prev = H[:, t - 1] if t > 0 else h0
        z, r, hc = Z[:, t], R[:, t], HC[:, t]
        dh = dH[:, t] + dh_next
        da_h = dh * z * (1 - hc * hc)
        da_z = dh * (hc - h_prev) * z * (1 - z)
        d_rh = da_h @ p.U_h.T
        da_r = d_rh * h_prev * r * (1 - r)
        dU["h"] += (r * h_prev).T @ da_h
        dU["z"] += h_prev.T @ da_z
        dU["r"] += h_prev.T @ da_r
        dh_next = dh * (1 - z) + d_rh * r + da_z @ p.U_z.T + da_r @ p.U_r.T
        dAz[:, t], dAr[:, t], dAh[:, t] = da_z, da_r, da_h

    xf = x.reshape(B * T, -1)
    flat = {"z": dAz.reshape(B * T, n), "r": dAr.reshape(B * T, n), "h": dAh.reshape(B * T, n)}
    grads = GruParams(
        W_z=xf.T @ flat["z"], W_r=xf.T @ flat["r"], W_h=xf.T @ flat["h"],
        U_z=dU["z"], U_r=dU["r"], U_h=dU["h"],
        b_z=flat["z"].sum(0), b_r=flat["r"].sum(0), b_h=flat["h"].sum(0),
    )
    dx = dAz @ p.W_z.T + dAr @ p.W_r.T + dAh @ p.W_h.T
    return grads, dx, dh_next


# ---------------------------------------------------------------------------
# embedding


def embedding_forward(ids, params):
    ids = np.asarray(ids)
    V = params.table.shape[0]
    if ids.size and (ids.min() < 0 or ids.max() >= V):
        raise IndexOutOfRange(f"ids must lie in [0, {V}), got range [{ids.min()}, {ids.max()}]")
    return params.table[ids], (ids, params.table.shape)


def embedding_backward(cache, grad):
    ids, shape = cache
    d_table = np.zeros(shape, dtype=grad.dtype)
    np.add.at(d_table, ids.reshape(-1), grad.reshape(-1, shape[1]))
    return EmbeddingParams(d_table)


# ---------------------------------------------------------------------------
# dense + softmax


def softmax(logits, axis=-1):
    shifted = logits - logits.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=axis, keepdims=True)


def dense_forward(h, params):
    if h.shape[-1] != params.W.shape[0]:
        raise ShapeMismatch(f"dense expects last dim {params.W.shape[0]}, got {h.shape}")
    return h @ params.W + params.b, (h, params)


def dense_backward(cache, dlogits):
    h, params = cache
    if dlogits.shape[-1] != params.W.shape[1]:
        raise ShapeMismatch("dense upstream gradient has wrong width")
    hf = h.reshape(-1, h.shape[-1])
    gf = dlogits.reshape(-1, dlogits.shape[-1])
    grads = DenseParams(hf.T @ gf, gf.sum(0))
    return grads, dlogits @ params.W.T


def dense_softmax_forward(h, params):
    """Time-distributed affine map followed by a softmax over the last axis."""
    logits, cache = dense_forward(h, params)
    return softmax(logits), cache


def dense_softmax_backward(cache, dlogits):
    """Backward of :func:`dense_softmax_forward` given the gradient on logits.

    The softmax Jacobian is folded into :func:`sparse_ce_loss`, which already
    returns the gradient with respect to logits.
    """
    return dense_backward(cache, dlogits)


def sparse_ce_loss(probs, targets):
    """Mean negative log-likelihood of integer targets.

    Returns ``(loss, dlogits)`` where ``dlogits`` is the gradient of the mean
    loss with respect to the pre-softmax logits.
    """
    targets = np.asarray(targets)
    if probs.shape[:-1] != targets.shape:
        raise ShapeMismatch(f"probs {probs.shape} incompatible with targets {targets.shape}")
    V = probs.shape[-1]
    if targets.size and (targets.min() < 0 or targets.max() >= V):
        raise IndexOutOfRange(f"target ids must lie in [0, {V})")
    flat = probs.reshape(-1, V)
    t = targets.reshape(-1)
    count = t.size
    picked = flat[np.arange(count), t]
    tiny = np.finfo(probs.dtype).tiny
    loss = float(-np.log(np.maximum(picked, tiny)).mean())
    grad = flat.copy()
    grad[np.arange(count), t] -= 1
    grad /= count
    return loss, grad.reshape(probs.shape)


# ---------------------------------------------------------------------------
# optimizer


@dataclass
class AdamState:
    lr: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    t: int = 0
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)


def adam_step(params, grads, state):
    """Apply one bias-corrected Adam update in place.

    ``params`` and ``grads`` are dicts of equally shaped arrays keyed by
    parameter name. Returns ``(params, state)``.
    """
    if params.keys() != grads.keys():
        raise ShapeMismatch("gradient names do not match parameter names")
    state.t += 1
    b1, b2 = state.beta1, state.beta2
    c1 = 1 - b1 ** state.t
    c2 = 1 - b2 ** state.t
    for name, p in params.items():
        g = grads[name]
        if g.shape != p.shape:
            raise ShapeMismatch(f"{name}: gradient {g.shape} vs parameter {p.shape}")
        m = state.m.get(name)
        if m is None:
            m = state.m[name] = np.zeros_like(p)
            state.v[name] = np.zeros_like(p)
        v = state.v[name]
        m *= b1
        m += (1 - b1) * g
        v *= b2
        v += (1 - b2) * (g * g)
        p -= (state.lr * (m / c1) / (np.sqrt(v / c2) + state.epsilon)).astype(p.dtype, copy=False)
    return params, state


# ---------------------------------------------------------------------------
# bookkeeping


def param_count(model):
    """Total number of trainable scalars; ``None`` or an empty model gives 0."""
    if model is None:
        return 0
    params = model.params if hasattr(model, "params") else model
    return int(sum(np.asarray(a).size for a in params.values()))


def relative_error(analytic, numeric, floor=1e-6):
    analytic = np.asarray(analytic, dtype=np.float64)
    numeric = np.asarray(numeric, dtype=np.float64)
    return np.abs(analytic - numeric) / np.maximum(np.abs(analytic) + np.abs(numeric), floor)


def grad_check(model, sample, epsilon=1e-5, max_checks=10_000, seed=0):
    """Max relative error between analytic and central-difference gradients.

    ``model`` must expose ``params`` (name -> array, perturbed in place),
    ``loss(x, y)`` and ``loss_and_grads(x, y)``. Above ``max_checks`` scalars a seeded subsample
    of coordinates is checked. Use a 64-bit model; 32-bit finite differences
    are too noisy to be meaningful.
    """
    x, y = sample
    _, grads = model.loss_and_grads(x, y)[:2]
    coords = [(name, i) for name, a in model.params.items() for i in range(a.size)]
    if len(coords) > max_checks:
        rng = np.random.default_rng(seed)
        pick = rng.choice(len(coords), size=max_checks, replace=False)
        coords = [coords[i] for i in sorted(pick)]
    worst = 0.0
    for name, i in coords:
        flat = model.params[name].reshape(-1)
        old = flat[i]
        flat[i] = old + epsilon
        lp = model.loss(x, y)
        flat[i] = old - epsilon
        lm = model.loss(x, y)
        flat[i] = old
        numeric = (lp - lm) / (2 * epsilon)
        analytic = grads[name].reshape(-1)[i]
        worst = max(worst, float(relative_error(analytic, numeric)))
    return worst
