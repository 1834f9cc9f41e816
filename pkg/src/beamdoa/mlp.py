"""SwiGLU regressor with hand-written backward pass and Adam.

Network (default ``ln_placement="branch"``)::

    gate = LN_gate(silu(x @ W))
    lin  = LN_lin(x @ V)
    h    = dropout(gate * lin)
    y    = h @ W2

With ``ln_placement="input"`` a single layer norm is applied to ``x`` and
the branches are ``silu(xn @ W)`` and ``xn @ V``. No biases anywhere.

Parameters live in a plain dict of float64 arrays so the optimizer,
gradient checks and serialization can treat them uniformly.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import InvalidArgumentError, InvalidStateError, NumericFaultError

LN_EPS = 1e-5
WEIGHT_NAMES = ("w", "v", "w2")
PLACEMENTS = ("branch", "input")
INPUT_NORMS = ("minmax", "peak")


@dataclass(frozen=True)
class TrainHyper:
    batch_size: int = 256
    total_iters: int = 3750
    lr_start: float = 0.1
    lr_end: float = 0.01
    l2_coeff: float = 1e-5
    dropout_rate: float = 0.7
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    hidden_dim: int = 384
    ln_placement: str = "branch"
    input_norm: str = "minmax"

    def __post_init__(self):
        if self.input_norm not in INPUT_NORMS:
            raise InvalidArgumentError(f"input_norm must be one of {INPUT_NORMS}")
        if not (0.0 <= self.dropout_rate < 1.0):
            raise InvalidArgumentError(f"dropout_rate must be in [0, 1), got {self.dropout_rate}")
        if not (self.lr_start >= self.lr_end > 0):
            raise InvalidArgumentError(f"need lr_start >= lr_end > 0, got {self.lr_start}, {self.lr_end}")
        if self.batch_size < 1 or self.total_iters < 0 or self.hidden_dim < 1:
            raise InvalidArgumentError("batch_size and hidden_dim must be >= 1, total_iters >= 0")
        if self.l2_coeff < 0:
            raise InvalidArgumentError(f"l2_coeff must be >= 0, got {self.l2_coeff}")
        if not (0 <= self.adam_beta1 < 1 and 0 <= self.adam_beta2 < 1 and self.adam_eps > 0):
            raise InvalidArgumentError("Adam betas must be in [0, 1) and eps > 0")
        if self.ln_placement not in PLACEMENTS:
            raise InvalidArgumentError(f"ln_placement must be one of {PLACEMENTS}")


@dataclass
class MlpModel:
    input_dim: int
    hidden_dim: int
    params: dict[str, np.ndarray]
    ln_placement: str = "branch"
    input_norm: str = "minmax"
    # bumped on every in-place update so stale forward caches can be detected
    version: int = 0

    def __post_init__(self):
        if self.ln_placement not in PLACEMENTS:
            raise InvalidArgumentError(f"ln_placement must be one of {PLACEMENTS}")
        if self.input_norm not in INPUT_NORMS:
            raise InvalidArgumentError(f"input_norm must be one of {INPUT_NORMS}")
        expected = param_shapes(self.input_dim, self.hidden_dim, self.ln_placement)
        if set(self.params) != set(expected):
            raise InvalidArgumentError(f"parameter names {sorted(self.params)} != {sorted(expected)}")
        for name, shape in expected.items():
            arr = np.asarray(self.params[name], dtype=float)
            if arr.shape != shape:
                raise InvalidArgumentError(f"{name} has shape {arr.shape}, expected {shape}")
            if not np.all(np.isfinite(arr)):
                raise InvalidArgumentError(f"{name} has non-finite entries")
            self.params[name] = arr

    def copy(self) -> "MlpModel":
        return MlpModel(self.input_dim, self.hidden_dim,
                        {k: v.copy() for k, v in self.params.items()}, self.ln_placement, self.input_norm)


def param_shapes(input_dim: int, hidden_dim: int, placement: str = "branch") -> dict[str, tuple]:
    shapes = {"w": (input_dim, hidden_dim), "v": (input_dim, hidden_dim), "w2": (hidden_dim, 1)}
    if placement == "branch":
        for branch in ("gate", "lin"):
            shapes[f"ln_{branch}_scale"] = (hidden_dim,)
            shapes[f"ln_{branch}_shift"] = (hidden_dim,)
    else:
        shapes["ln_in_scale"] = (input_dim,)
        shapes["ln_in_shift"] = (input_dim,)
    return shapes


def init_model(input_dim: int, hidden_dim: int = 384, seed=0, ln_placement: str = "branch",
               input_norm: str = "minmax") -> MlpModel:
    """Glorot-uniform weights, unit layer-norm scales, zero shifts."""
    if input_dim < 2 and ln_placement == "input":
        raise InvalidArgumentError("input layer norm needs input_dim >= 2")
    if hidden_dim < 2 and ln_placement == "branch":
        raise InvalidArgumentError("branch layer norm needs hidden_dim >= 2")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    params = {}
    for name, shape in param_shapes(input_dim, hidden_dim, ln_placement).items():
        if name in WEIGHT_NAMES:
            limit = np.sqrt(6.0 / (shape[0] + shape[1]))
            params[name] = rng.uniform(-limit, limit, size=shape)
        elif name.endswith("_scale"):
            params[name] = np.ones(shape)
        else:
            params[name] = np.zeros(shape)
    return MlpModel(input_dim, hidden_dim, params, ln_placement, input_norm)


def sigmoid(x):
    x = np.asarray(x, dtype=float)
    # split by sign to avoid overflow in exp
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def silu(x):
    """``x * sigmoid(x)``."""
    x = np.asarray(x, dtype=float)
    return x * sigmoid(x)


def silu_grad(x):
    s = sigmoid(x)
    return s * (1.0 + x * (1.0 - s))


def _ln_core(x):
    mu = x.mean(axis=-1, keepdims=True)
    var = x.var(axis=-1, keepdims=True)
    inv_std = 1.0 / np.sqrt(var + LN_EPS)
    return (x - mu) * inv_std, inv_std


def layer_norm(x, scale, shift):
    """Normalize over the last axis to zero mean / unit variance, then scale and shift."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] < 2:
        raise InvalidArgumentError("layer norm needs at least 2 features")
    xhat, _ = _ln_core(x)
    return xhat * scale + shift


def _ln_backward(dy, xhat, inv_std, scale):
    dscale = np.sum(dy * xhat, axis=0)
    dshift = np.sum(dy, axis=0)
    dxhat = dy * scale
    dx = inv_std * (dxhat - dxhat.mean(axis=-1, keepdims=True)
                    - xhat * np.mean(dxhat * xhat, axis=-1, keepdims=True))
    return dx, dscale, dshift


@dataclass
class ForwardCache:
    model_id: int
    version: int
    x: np.ndarray
    values: dict = field(default_factory=dict)


def _as_batch(model: MlpModel, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != model.input_dim:
        raise InvalidArgumentError(f"input has shape {x.shape}, model expects (*, {model.input_dim})")
    return x


def forward(model: MlpModel, x, mode: str = "eval", rng: np.random.Generator | None = None,
            dropout_rate: float = 0.0):
    """Run the network on a batch (or a single vector) of inputs.

    Returns ``(pred, cache)`` with ``pred`` of shape ``(n,)``. In ``"train"``
    mode, inverted dropout at ``dropout_rate`` is applied to the gated hidden
    layer using ``rng``; ``"eval"`` never touches randomness.
    """
    if mode not in ("train", "eval"):
        raise InvalidArgumentError(f"mode must be 'train' or 'eval', got {mode!r}")
    if not (0.0 <= dropout_rate < 1.0):
        raise InvalidArgumentError(f"dropout_rate must be in [0, 1), got {dropout_rate}")
    x = _as_batch(model, x)
    p = model.params
    c = {}
    if model.ln_placement == "input":
        xhat, inv_std = _ln_core(x)
        c["in_hat"], c["in_inv"] = xhat, inv_std
        z = xhat * p["ln_in_scale"] + p["ln_in_shift"]
    else:
        z = x
    c["z"] = z
    a = z @ p["w"]
    gate = silu(a)
    lin = z @ p["v"]
    c["a"] = a
    if model.ln_placement == "branch":
        c["gate_hat"], c["gate_inv"] = _ln_core(gate)
        c["lin_hat"], c["lin_inv"] = _ln_core(lin)
        gate = c["gate_hat"] * p["ln_gate_scale"] + p["ln_gate_shift"]
        lin = c["lin_hat"] * p["ln_lin_scale"] + p["ln_lin_shift"]
    c["gate"], c["lin"] = gate, lin
    h = gate * lin
    if mode == "train" and dropout_rate > 0:
        if rng is None:
            raise InvalidArgumentError("train mode with dropout needs an rng")
        mask = (rng.random(h.shape) >= dropout_rate) / (1.0 - dropout_rate)
        h = h * mask
        c["mask"] = mask
    c["h"] = h
    pred = (h @ p["w2"])[:, 0]
    return pred, ForwardCache(id(model), model.version, x, c)


def mse_loss(pred, target) -> float:
    pred = np.asarray(pred, dtype=float)
    target = np.asarray(target, dtype=float)
    if pred.shape != target.shape or pred.size == 0:
        raise InvalidArgumentError(f"need equal non-empty shapes, got {pred.shape} vs {target.shape}")
    return float(np.mean((pred - target) ** 2))


def mse_grad(pred, target) -> np.ndarray:
    pred = np.asarray(pred, dtype=float)
    return 2.0 * (pred - np.asarray(target, dtype=float)) / pred.size


def l2_penalty(model: MlpModel, l2_coeff: float) -> float:
    """``0.5 * l2_coeff * sum ||weight||^2`` over W, V, W2 (layer-norm affines excluded)."""
    return 0.5 * l2_coeff * sum(float(np.sum(model.params[k] ** 2)) for k in WEIGHT_NAMES)


def backward(model: MlpModel, cache: ForwardCache, dpred, l2_coeff: float = 0.0) -> dict[str, np.ndarray]:
    """Gradients of ``loss + l2_penalty`` given ``dpred = d loss / d pred``."""
    if cache.model_id != id(model) or cache.version != model.version:
        raise InvalidStateError("forward cache does not belong to the current model state")
    p = model.params
    c = cache.values
    dpred = np.asarray(dpred, dtype=float).reshape(-1, 1)
    if dpred.shape[0] != cache.x.shape[0]:
        raise InvalidArgumentError("loss gradient does not match the cached batch size")
    g = {}
    g["w2"] = c["h"].T @ dpred
    dh = dpred @ p["w2"].T
    if "mask" in c:
        dh = dh * c["mask"]
    dgate = dh * c["lin"]
    dlin = dh * c["gate"]
    if model.ln_placement == "branch":
        dgate, g["ln_gate_scale"], g["ln_gate_shift"] = _ln_backward(
            dgate, c["gate_hat"], c["gate_inv"], p["ln_gate_scale"])
        dlin, g["ln_lin_scale"], g["ln_lin_shift"] = _ln_backward(
            dlin, c["lin_hat"], c["lin_inv"], p["ln_lin_scale"])
    da = dgate * silu_grad(c["a"])
    z = c["z"]
    g["w"] = z.T @ da
    g["v"] = z.T @ dlin
    if model.ln_placement == "input":
        dz = da @ p["w"].T + dlin @ p["v"].T
        _, g["ln_in_scale"], g["ln_in_shift"] = _ln_backward(dz, c["in_hat"], c["in_inv"], p["ln_in_scale"])
    if l2_coeff:
        for k in WEIGHT_NAMES:
            g[k] = g[k] + l2_coeff * p[k]
    return g


@dataclass
class OptimizerState:
    m: dict[str, np.ndarray]
    v: dict[str, np.ndarray]
    step: int = 0

    @classmethod
    def zeros_like(cls, params: Mapping[str, np.ndarray]) -> "OptimizerState":
        return cls({k: np.zeros_like(a) for k, a in params.items()},
                   {k: np.zeros_like(a) for k, a in params.items()})


def adam_step(model, grads: Mapping[str, np.ndarray], state: OptimizerState, lr: float,
              beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
    """One bias-corrected Adam update, in place.

    ``model`` is an :class:`MlpModel` or a bare dict of parameter arrays.
    Returns ``(model, state)``.
    """
    params = model.params if isinstance(model, MlpModel) else model
    for k, gk in grads.items():
        if not np.all(np.isfinite(gk)):
            raise NumericFaultError(f"non-finite gradient for {k!r}")
    state.step += 1
    t = state.step
    bc1 = 1.0 - beta1**t
    bc2 = 1.0 - beta2**t
    for k, gk in grads.items():
        if params[k].shape != np.shape(gk):
            raise InvalidArgumentError(f"gradient for {k!r} has shape {np.shape(gk)}, expected {params[k].shape}")
        m = state.m[k]
        v = state.v[k]
        m *= beta1
        m += (1.0 - beta1) * gk
        v *= beta2
        v += (1.0 - beta2) * np.square(gk)
        params[k] -= lr * (m / bc1) / (np.sqrt(v / bc2) + eps)
    if isinstance(model, MlpModel):
        model.version += 1
    return model, state


def lr_schedule(iteration: int, hyper: TrainHyper) -> float:
    """Linear decay from ``lr_start`` at 0 to ``lr_end`` at ``total_iters``."""
    if iteration < 0 or iteration > hyper.total_iters:
        warnings.warn(f"iteration {iteration} outside [0, {hyper.total_iters}], clamping", stacklevel=2)
        iteration = min(max(iteration, 0), hyper.total_iters)
    if hyper.total_iters == 0:
        return hyper.lr_start
    frac = iteration / hyper.total_iters
    return hyper.lr_start + (hyper.lr_end - hyper.lr_start) * frac


def normalize_profile(x, method: str = "minmax") -> np.ndarray:
    """Rescale each row so its maximum is 1.

    ``"peak"`` divides by the maximum; ``"minmax"`` also maps the minimum to
    0, which strips the receiver noise floor common to all beams. Rows with
    no spread are returned as zeros.
    """
    x = np.asarray(x, dtype=float)
    peak = x.max(axis=-1, keepdims=True)
    if method == "peak":
        return np.divide(x, peak, out=np.zeros_like(x), where=peak > 0)
    if method != "minmax":
        raise InvalidArgumentError(f"unknown input normalization {method!r}")
    low = x.min(axis=-1, keepdims=True)
    span = peak - low
    return np.divide(x - low, span, out=np.zeros_like(x), where=span > 0)


ANGLE_SCALE = 90.0


class MlpEstimator:
    """Callable wrapper: raw profile -> angle in degrees via an eval-mode forward."""

    name = "mlp"

    def __init__(self, model: MlpModel):
        self.model = model

    def __call__(self, profile) -> float:
        values = np.asarray(getattr(profile, "values", profile), dtype=float)
        pred, _ = forward(self.model, normalize_profile(values, self.model.input_norm))
        out = float(pred[0]) * ANGLE_SCALE
        if not np.isfinite(out):
            raise NumericFaultError("non-finite prediction")
        return out
