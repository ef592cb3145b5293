"""Dense float64 tensors with reverse-mode differentiation.

The engine covers exactly the operations the fall-detection network
needs: matmul, elementwise add/multiply, relu, temporal convolutions
(depthwise and dense), pointwise 1x1 convolution, max pooling over
frames/joints, global average pooling, layer normalization, dropout,
channel concatenation, softmax, and cross-entropy.

Every op runs eagerly on numpy arrays. While a :class:`GradTape` is
active, ops whose inputs require gradients append a record; the
backward pass replays the records in exact reverse execution order and
accumulates analytic gradients. With no tape active, ops are plain
forward computations (evaluation mode).
"""
from __future__ import annotations

from typing import Callable, Sequence

import numpy as np


class ShapeError(ValueError):
    """Raised when an op receives incompatible tensor shapes."""


class Tensor:
    """Dense multi-dimensional array of 64-bit reals.

    ``requires_grad`` marks trainable leaves; it propagates to op
    outputs so the tape only tracks the differentiable subgraph.
    """

    __slots__ = ("data", "requires_grad", "name")

    def __init__(self, data, requires_grad: bool = False, name: str | None = None):
        self.data = np.asarray(data, dtype=np.float64)
        self.requires_grad = requires_grad
        self.name = name

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        return float(self.data)

    def __repr__(self) -> str:
        tag = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}{tag}, requires_grad={self.requires_grad})"


def parameter(data, name: str | None = None) -> Tensor:
    """A trainable leaf tensor."""
    return Tensor(data, requires_grad=True, name=name)


# Backward fn: upstream gradient -> one gradient (or None) per input.
BackwardFn = Callable[[np.ndarray], tuple]

_TAPE_STACK: list["GradTape"] = []


class GradTape:
    """Records differentiable ops in execution order.

    Use as a context manager around the forward pass, then call
    :meth:`gradients` with the scalar loss. The backward walk visits
    records strictly in reverse execution order, so gradients for a
    tensor are fully accumulated before its producing op runs.
    """

    def __init__(self) -> None:
        self._ops: list[tuple[Tensor, tuple[Tensor, ...], BackwardFn]] = []

    def __enter__(self) -> "GradTape":
        _TAPE_STACK.append(self)
        return self

    def __exit__(self, *exc) -> None:
        popped = _TAPE_STACK.pop()
        assert popped is self

    def __len__(self) -> int:
        return len(self._ops)

    def record(self, out: Tensor, inputs: tuple[Tensor, ...], backward: BackwardFn) -> None:
        self._ops.append((out, inputs, backward))

    def gradients(self, loss: Tensor, params: Sequence[Tensor]) -> list[np.ndarray]:
        """Reverse-mode gradients of ``loss`` with respect to ``params``.

        Parameters that do not influence the loss get exactly-zero
        gradients. ``loss`` must be a scalar produced under this tape.
        """
        if loss.data.shape != ():
            raise ValueError(f"backward: loss must be scalar, got shape {loss.shape}")
        accum: dict[int, np.ndarray] = {id(loss): np.ones((), dtype=np.float64)}
        for out, inputs, backward in reversed(self._ops):
            g = accum.pop(id(out), None)
            if g is None:
                continue
            for tensor, grad in zip(inputs, backward(g)):
                if grad is None:
                    continue
                prev = accum.get(id(tensor))
                accum[id(tensor)] = grad if prev is None else prev + grad
        return [
            np.array(accum[id(p)]) if id(p) in accum else np.zeros_like(p.data)
            for p in params
        ]


def _tape() -> GradTape | None:
    return _TAPE_STACK[-1] if _TAPE_STACK else None


def _make(data: np.ndarray, inputs: tuple[Tensor, ...], backward: BackwardFn) -> Tensor:
    out = Tensor(data, requires_grad=any(t.requires_grad for t in inputs))
    tape = _tape()
    if tape is not None and out.requires_grad:
        tape.record(out, inputs, backward)
    return out


# ---------------------------------------------------------------------------
# elementwise and linear ops


def add(a: Tensor, b: Tensor) -> Tensor:
    if a.shape != b.shape:
        raise ShapeError(f"add: shapes differ, {a.shape} vs {b.shape}")

    def backward(g):
        return (g if a.requires_grad else None, g if b.requires_grad else None)

    return _make(a.data + b.data, (a, b), backward)


def mul(a: Tensor, b: Tensor) -> Tensor:
    if a.shape != b.shape:
        raise ShapeError(f"mul: shapes differ, {a.shape} vs {b.shape}")

    def backward(g):
        return (
            g * b.data if a.requires_grad else None,
            g * a.data if b.requires_grad else None,
        )

    return _make(a.data * b.data, (a, b), backward)


def scale(x: Tensor, factor) -> Tensor:
    """Multiply by a non-trainable scalar or array constant."""
    factor = np.asarray(factor, dtype=np.float64)
    data = x.data * factor
    if data.shape != x.shape:
        raise ShapeError(f"scale: factor shape {factor.shape} does not fit {x.shape}")

    def backward(g):
        return (g * factor,)

    return _make(data, (x,), backward)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul: incompatible shapes {a.shape} and {b.shape}")

    def backward(g):
        return (
            g @ b.data.T if a.requires_grad else None,
            a.data.T @ g if b.requires_grad else None,
        )

    return _make(a.data @ b.data, (a, b), backward)


def bias_add(x: Tensor, b: Tensor) -> Tensor:
    """Add a per-channel bias along axis 1 of a 2-D or 4-D tensor."""
    if b.ndim != 1 or x.ndim < 2 or b.shape[0] != x.shape[1]:
        raise ShapeError(f"bias_add: bias {b.shape} does not match axis 1 of {x.shape}")
    view = b.data.reshape((1, -1) + (1,) * (x.ndim - 2))
    reduce_axes = tuple(i for i in range(x.ndim) if i != 1)

    def backward(g):
        return (
            g if x.requires_grad else None,
            g.sum(axis=reduce_axes) if b.requires_grad else None,
        )

    return _make(x.data + view, (x, b), backward)


def relu(x: Tensor) -> Tensor:
    mask = x.data > 0

    def backward(g):
        return (g * mask,)

    return _make(np.where(mask, x.data, 0.0), (x,), backward)


def sum_all(x: Tensor) -> Tensor:
    def backward(g):
        return (np.full(x.shape, float(g)),)

    return _make(np.asarray(x.data.sum()), (x,), backward)


# ---------------------------------------------------------------------------
# convolutions on [N, C, T, V] tensors


def _check_nctv(name: str, x: Tensor) -> None:
    if x.ndim != 4:
        raise ShapeError(f"{name}: expected a [N,C,T,V] tensor, got shape {x.shape}")


def _shift_frames(x: np.ndarray, s: int) -> np.ndarray:
    """shifted[..., t, :] = x[..., t + s, :]; out-of-range frames are zero."""
    if s == 0:
        return x
    out = np.zeros_like(x)
    if s > 0:
        out[:, :, :-s, :] = x[:, :, s:, :]
    else:
        out[:, :, -s:, :] = x[:, :, :s, :]
    return out


def depthwise_tconv(x: Tensor, kernel: Tensor) -> Tensor:
    """Per-channel temporal convolution, kernel [C, k_t], zero 'same' padding.

    Never mixes channels or joints; k_t must be odd so T is preserved.
    """
    _check_nctv("depthwise_tconv", x)
    if kernel.ndim != 2 or kernel.shape[0] != x.shape[1]:
        raise ShapeError(
            f"depthwise_tconv: kernel {kernel.shape} does not match input {x.shape}"
        )
    k_t = kernel.shape[1]
    if k_t % 2 != 1:
        raise ShapeError(f"depthwise_tconv: kernel width {k_t} must be odd")
    r = k_t // 2
    taps = kernel.data[:, :, None, None]  # [C, k_t, 1, 1] broadcast view
    out = np.zeros_like(x.data)
    for i in range(k_t):
        out += taps[:, i] * _shift_frames(x.data, i - r)

    def backward(g):
        dx = None
        if x.requires_grad:
            dx = np.zeros_like(x.data)
            for i in range(k_t):
                dx += taps[:, i] * _shift_frames(g, r - i)
        dk = None
        if kernel.requires_grad:
            dk = np.empty_like(kernel.data)
            for i in range(k_t):
                dk[:, i] = (g * _shift_frames(x.data, i - r)).sum(axis=(0, 2, 3))
        return (dx, dk)

    return _make(out, (x, kernel), backward)


def dense_tconv(x: Tensor, kernel: Tensor) -> Tensor:
    """Full temporal convolution, kernel [C_out, C_in, k_t], zero 'same' padding."""
    _check_nctv("dense_tconv", x)
    if kernel.ndim != 3 or kernel.shape[1] != x.shape[1]:
        raise ShapeError(
            f"dense_tconv: kernel {kernel.shape} does not match input {x.shape}"
        )
    c_out, c_in, k_t = kernel.shape
    if k_t % 2 != 1:
        raise ShapeError(f"dense_tconv: kernel width {k_t} must be odd")
    r = k_t // 2
    n, _, t, v = x.shape
    out = np.zeros((n, c_out, t, v))
    for i in range(k_t):
        shifted = _shift_frames(x.data, i - r)
        out += np.tensordot(kernel.data[:, :, i], shifted, axes=([1], [1])).transpose(
            1, 0, 2, 3
        )

    def backward(g):
        dx = None
        if x.requires_grad:
            dx = np.zeros_like(x.data)
            for i in range(k_t):
                back = np.tensordot(kernel.data[:, :, i], g, axes=([0], [1]))
                dx += _shift_frames(back.transpose(1, 0, 2, 3), r - i)
        dk = None
        if kernel.requires_grad:
            dk = np.empty_like(kernel.data)
            for i in range(k_t):
                shifted = _shift_frames(x.data, i - r)
                dk[:, :, i] = np.tensordot(g, shifted, axes=([0, 2, 3], [0, 2, 3]))
        return (dx, dk)

    return _make(out, (x, kernel), backward)


def _channels_last(x: np.ndarray) -> np.ndarray:
    n, c, t, v = x.shape
    return x.transpose(0, 2, 3, 1).reshape(n * t * v, c)


def _channels_first(m: np.ndarray, like: tuple[int, ...]) -> np.ndarray:
    n, _, t, v = like
    return m.reshape(n, t, v, -1).transpose(0, 3, 1, 2)


def pointwise_conv(x: Tensor, weight: Tensor) -> Tensor:
    """1x1 convolution: mixes channels, never frames or joints. weight [C_in, C_out]."""
    _check_nctv("pointwise_conv", x)
    if weight.ndim != 2 or weight.shape[0] != x.shape[1]:
        raise ShapeError(
            f"pointwise_conv: weight {weight.shape} does not match input {x.shape}"
        )
    flat = _channels_last(x.data)
    out = _channels_first(flat @ weight.data, x.shape)

    def backward(g):
        g_flat = _channels_last(g)
        dx = None
        if x.requires_grad:
            dx = _channels_first(g_flat @ weight.data.T, x.shape)
        dw = flat.T @ g_flat if weight.requires_grad else None
        return (dx, dw)

    return _make(out, (x, weight), backward)


def spatial_aggregate(x: Tensor, adj: Tensor) -> Tensor:
    """Per-frame neighbor aggregation: out[..., i] = sum_j adj[i, j] * x[..., j]."""
    _check_nctv("spatial_aggregate", x)
    v = x.shape[3]
    if adj.shape != (v, v):
        raise ShapeError(
            f"spatial_aggregate: adjacency {adj.shape} does not match joints of {x.shape}"
        )
    flat = x.data.reshape(-1, v)
    out = (flat @ adj.data.T).reshape(x.shape)

    def backward(g):
        g_flat = g.reshape(-1, v)
        dx = (g_flat @ adj.data).reshape(x.shape) if x.requires_grad else None
        dadj = g_flat.T @ flat if adj.requires_grad else None
        return (dx, dadj)

    return _make(out, (x, adj), backward)


# ---------------------------------------------------------------------------
# pooling


def _max_pool_axis(x: Tensor, axis: int, opname: str) -> Tensor:
    _check_nctv(opname, x)
    idx = x.data.argmax(axis=axis)
    peak = np.take_along_axis(x.data, np.expand_dims(idx, axis), axis=axis)
    out = np.broadcast_to(peak, x.shape).copy()

    def backward(g):
        total = g.sum(axis=axis, keepdims=True)
        dx = np.zeros_like(x.data)
        np.put_along_axis(dx, np.expand_dims(idx, axis), total, axis=axis)
        return (dx,)

    return _make(out, (x,), backward)


def max_pool_frames(x: Tensor) -> Tensor:
    """Max over the frame axis, broadcast back over T (emphasizes peak frames)."""
    return _max_pool_axis(x, 2, "max_pool_frames")


def max_pool_joints(x: Tensor) -> Tensor:
    """Max over the joint axis, broadcast back over V (emphasizes active joints)."""
    return _max_pool_axis(x, 3, "max_pool_joints")


def global_avg_pool(x: Tensor) -> Tensor:
    """[N, C, T, V] -> [N, C] by averaging every (frame, joint) position."""
    _check_nctv("global_avg_pool", x)
    n, c, t, v = x.shape

    def backward(g):
        return (np.broadcast_to(g[:, :, None, None] / (t * v), x.shape).copy(),)

    return _make(x.data.mean(axis=(2, 3)), (x,), backward)


# ---------------------------------------------------------------------------
# normalization, dropout, fusion, classification


LAYER_NORM_EPS = 1e-12


def layer_norm(x: Tensor, gamma: Tensor, beta: Tensor) -> Tensor:
    """Normalize over the channel axis (axis 1) per remaining position."""
    if x.ndim < 2:
        raise ShapeError(f"layer_norm: need at least 2 dims, got shape {x.shape}")
    c = x.shape[1]
    if gamma.shape != (c,) or beta.shape != (c,):
        raise ShapeError(
            f"layer_norm: gamma {gamma.shape} / beta {beta.shape} do not match "
            f"channel count of {x.shape}"
        )
    pshape = (1, c) + (1,) * (x.ndim - 2)
    mu = x.data.mean(axis=1, keepdims=True)
    centered = x.data - mu
    var = (centered * centered).mean(axis=1, keepdims=True)
    inv_std = 1.0 / np.sqrt(var + LAYER_NORM_EPS)
    xhat = centered * inv_std
    out = gamma.data.reshape(pshape) * xhat + beta.data.reshape(pshape)
    reduce_axes = tuple(i for i in range(x.ndim) if i != 1)

    def backward(g):
        dx = None
        if x.requires_grad:
            dxhat = g * gamma.data.reshape(pshape)
            m1 = dxhat.mean(axis=1, keepdims=True)
            m2 = (dxhat * xhat).mean(axis=1, keepdims=True)
            dx = inv_std * (dxhat - m1 - xhat * m2)
        dgamma = (g * xhat).sum(axis=reduce_axes) if gamma.requires_grad else None
        dbeta = g.sum(axis=reduce_axes) if beta.requires_grad else None
        return (dx, dgamma, dbeta)

    return _make(out, (x, gamma, beta), backward)


def dropout(x: Tensor, rate: float, rng: np.random.Generator | None = None,
            active: bool = True) -> Tensor:
    """Inverted dropout: scales by the keep probability at train time so
    evaluation mode is the identity."""
    if not 0.0 <= rate < 1.0:
        raise ValueError(f"dropout: rate must be in [0, 1), got {rate}")
    if not active or rate == 0.0:
        return x
    if rng is None:
        raise ValueError("dropout: active dropout needs an explicit rng for determinism")
    keep = (rng.random(x.shape) >= rate) / (1.0 - rate)

    def backward(g):
        return (g * keep,)

    return _make(x.data * keep, (x,), backward)


def concat_channels(tensors: Sequence[Tensor]) -> Tensor:
    """Concatenate along axis 1; all other axes must agree."""
    if not tensors:
        raise ShapeError("concat_channels: nothing to concatenate")
    base = tensors[0].shape
    for t in tensors[1:]:
        if t.ndim != len(base) or t.shape[0] != base[0] or t.shape[2:] != base[2:]:
            raise ShapeError(
                f"concat_channels: shape {t.shape} incompatible with {base}"
            )
    widths = [t.shape[1] for t in tensors]
    offsets = np.cumsum([0] + widths)

    def backward(g):
        return tuple(
            g[:, offsets[i]:offsets[i + 1]] if t.requires_grad else None
            for i, t in enumerate(tensors)
        )

    return _make(np.concatenate([t.data for t in tensors], axis=1), tuple(tensors), backward)


def softmax(x: Tensor) -> Tensor:
    """Row-wise softmax of a [N, K] tensor; outputs are positive and sum to 1."""
    if x.ndim != 2:
        raise ShapeError(f"softmax: expected [N,K], got shape {x.shape}")
    shifted = x.data - x.data.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    p = e / e.sum(axis=1, keepdims=True)

    def backward(g):
        return (p * (g - (g * p).sum(axis=1, keepdims=True)),)

    return _make(p, (x,), backward)


def cross_entropy(probs: Tensor, labels: np.ndarray) -> Tensor:
    """Mean negative log-likelihood of integer ``labels`` under ``probs`` [N, K]."""
    if probs.ndim != 2:
        raise ShapeError(f"cross_entropy: expected [N,K] probabilities, got {probs.shape}")
    labels = np.asarray(labels)
    n = probs.shape[0]
    if labels.shape != (n,):
        raise ShapeError(
            f"cross_entropy: labels shape {labels.shape} does not match batch {n}"
        )
    picked = probs.data[np.arange(n), labels]
    loss = np.asarray(-np.log(picked).mean())

    def backward(g):
        dp = np.zeros_like(probs.data)
        dp[np.arange(n), labels] = -float(g) / (n * picked)
        return (dp,)

    return _make(loss, (probs,), backward)


# ---------------------------------------------------------------------------
# finite-difference verification


def grad_check(f: Callable[[], Tensor], params: Sequence[Tensor],
               eps: float = 1e-5) -> float:
    """Max relative error of tape gradients against central differences.

    ``f`` must rebuild the scalar loss from the current parameter values
    on every call, with dropout and masking disabled so the function is
    smooth at the evaluation point. The numeric side perturbs one
    coordinate at a time: (f(p+eps) - f(p-eps)) / (2 eps).
    """
    if not 1e-7 <= eps <= 1e-3:
        raise ValueError(f"grad_check: eps {eps} outside [1e-7, 1e-3]")
    with GradTape() as tape:
        loss = f()
    if loss.data.shape != ():
        raise ValueError(f"grad_check: f must return a scalar, got shape {loss.shape}")
    analytic = tape.gradients(loss, params)

    worst = 0.0
    for p, grad in zip(params, analytic):
        flat = p.data.reshape(-1)
        gflat = grad.reshape(-1)
        for i in range(flat.size):
            kept = flat[i]
            flat[i] = kept + eps
            hi = f().item()
            flat[i] = kept - eps
            lo = f().item()
            flat[i] = kept
            numeric = (hi - lo) / (2.0 * eps)
            err = abs(gflat[i] - numeric) / max(1.0, abs(numeric))
            if err > worst:
                worst = err
    return worst
