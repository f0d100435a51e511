"""Multi-layer perceptron with ReLU hidden layers, logistic output and Adam."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from ..errors import InputError, TrainingError


@dataclass(frozen=True)
class MLPConfig:
    hidden_sizes: tuple = (200, 20)
    learning_rate: float = 1e-5
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    batch_size: int = 32
    max_epochs: int = 200
    patience: int = 10
    seed: int = 0
    activation: str = "relu"

    def __post_init__(self):
        object.__setattr__(self, "hidden_sizes", tuple(int(h) for h in self.hidden_sizes))
        if self.learning_rate <= 0:
            raise InputError("learning_rate must be positive")
        if any(h < 1 for h in self.hidden_sizes):
            raise InputError("hidden layer sizes must be positive")
        if self.batch_size < 1 or self.max_epochs < 0 or self.patience < 1:
            raise InputError("batch_size, patience must be >= 1 and max_epochs >= 0")
        if self.activation != "relu":
            raise InputError("only the relu activation is supported")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["hidden_sizes"] = list(self.hidden_sizes)
        return d


def init_params(n_in: int, hidden_sizes, rng) -> list[np.ndarray]:
    """He-normal weights, zero biases: ``[W1, b1, ..., W_out, b_out]``."""
    sizes = [n_in, *hidden_sizes, 1]
    params = []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        params.append(rng.normal(0.0, math.sqrt(2.0 / fan_in), size=(fan_in, fan_out)))
        params.append(np.zeros(fan_out))
    return params


def forward_logits(params, X) -> np.ndarray:
    a = X
    n_layers = len(params) // 2
    for k in range(n_layers):
        z = a @ params[2 * k] + params[2 * k + 1]
        a = np.maximum(z, 0.0) if k < n_layers - 1 else z
    return a[:, 0]


def _bce_from_logits(z, y):
    return np.maximum(z, 0.0) - y * z + np.log1p(np.exp(-np.abs(z)))


def sigmoid(z):
    out = np.empty_like(z, dtype=np.float64)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def loss_and_grads(params, X, y):
    """Summed binary cross-entropy and its gradient for every parameter."""
    n_layers = len(params) // 2
    acts = [X]
    pre = []
    a = X
    for k in range(n_layers):
        z = a @ params[2 * k] + params[2 * k + 1]
        pre.append(z)
        a = np.maximum(z, 0.0) if k < n_layers - 1 else z
        acts.append(a)
    logits = pre[-1][:, 0]
    loss = float(_bce_from_logits(logits, y).sum())
    delta = (sigmoid(logits) - y)[:, None]
    grads = [None] * len(params)
    for k in range(n_layers - 1, -1, -1):
        grads[2 * k] = acts[k].T @ delta
        grads[2 * k + 1] = delta.sum(axis=0)
        if k > 0:
            delta = (delta @ params[2 * k].T) * (pre[k - 1] > 0)
    return loss, grads


class Adam:
    def __init__(self, params, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, params, grads) -> None:
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        c1 = 1.0 - b1**self.t
        c2 = 1.0 - b2**self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * g * g
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


@dataclass
class MLPModel:
    params: list[np.ndarray]
    feature_dim: int
    config: MLPConfig
    metadata: dict = field(default_factory=dict)
    kind: str = "mlp"

    def scores(self, X: np.ndarray) -> np.ndarray:
        return sigmoid(forward_logits(self.params, X))


def _check_xy(X, y, what):
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or len(X) != len(y):
        raise InputError(f"bad {what} shapes {X.shape} / {y.shape}")
    return X, y


def train_mlp(X, y=None, validation=None, cfg: MLPConfig = MLPConfig()) -> MLPModel:
    """Mini-batch Adam on mean binary cross-entropy.

    ``X`` may be a FeatureMatrix when ``y`` is None; ``validation`` is a
    FeatureMatrix or an ``(X_val, y_val)`` tuple.  With a nonempty validation
    set, training stops after ``cfg.patience`` epochs without a lower
    validation loss and the best weights are restored.
    """
    if y is None:
        X, y = X.X, X.y
    X_val = y_val = None
    if validation is not None:
        X_val, y_val = (validation.X, validation.y) if hasattr(validation, "X") else validation
    X, y = _check_xy(X, y, "training")
    if len(y) < 2:
        raise TrainingError("MLP needs at least two training rows")
    if len(np.unique(y)) < 2:
        raise TrainingError("MLP needs both classes in the training data")
    use_val = X_val is not None and len(X_val) > 0
    if use_val:
        X_val, y_val = _check_xy(X_val, y_val, "validation")
        if X_val.shape[1] != X.shape[1]:
            raise InputError("validation feature dimension differs from training")
    rng = np.random.default_rng(cfg.seed)
    params = init_params(X.shape[1], cfg.hidden_sizes, rng)
    opt = Adam(params, cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.epsilon)
    history, val_history = [], []
    best_val, best_params, best_epoch, wait = np.inf, None, 0, 0
    epochs_run = 0
    for epoch in range(1, cfg.max_epochs + 1):
        order = rng.permutation(len(y))
        total = 0.0
        for start in range(0, len(y), cfg.batch_size):
            b = order[start : start + cfg.batch_size]
            loss, grads = loss_and_grads(params, X[b], y[b])
            total += loss
            scale = 1.0 / len(b)
            opt.step(params, [g * scale for g in grads])
        mean_loss = total / len(y)
        if not math.isfinite(mean_loss):
            raise TrainingError(f"MLP training loss became non-finite at epoch {epoch}")
        history.append(mean_loss)
        epochs_run = epoch
        if use_val:
            val = float(_bce_from_logits(forward_logits(params, X_val), y_val).mean())
            val_history.append(val)
            if val < best_val:
                best_val, best_epoch, wait = val, epoch, 0
                best_params = [p.copy() for p in params]
            else:
                wait += 1
                if wait >= cfg.patience:
                    break
    if use_val and best_params is not None:
        params = best_params
    meta = {
        "seed": cfg.seed,
        "epochs_run": epochs_run,
        "best_epoch": best_epoch if use_val else epochs_run,
        "loss_history": history,
        "val_loss_history": val_history,
    }
    return MLPModel(params, X.shape[1], cfg, meta)


def mlp_gradient_check(cfg: MLPConfig, X, y, params=None, h: float = 1e-5, seed: int | None = None) -> float:
    """Largest relative difference between backprop and central differences.

    The relative error of one entry is ``|a - n| / max(|a|, |n|, 1e-8)``;
    the floor keeps exactly-zero gradients (dead ReLU units) from dividing
    zero by zero.
    """
    X, y = _check_xy(X, y, "probe")
    if len(X) > 10:
        raise InputError("gradient check probe must have at most 10 rows")
    if params is None:
        rng = np.random.default_rng(cfg.seed if seed is None else seed)
        params = init_params(X.shape[1], cfg.hidden_sizes, rng)
    params = [np.array(p, dtype=np.float64) for p in params]
    _, grads = loss_and_grads(params, X, y)
    worst = 0.0
    for p, g in zip(params, grads):
        flat, gflat = p.reshape(-1), g.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            up, _ = loss_and_grads(params, X, y)
            flat[i] = orig - h
            down, _ = loss_and_grads(params, X, y)
            flat[i] = orig
            num = (up - down) / (2.0 * h)
            denom = max(abs(num), abs(gflat[i]), 1e-8)
            worst = max(worst, abs(num - gflat[i]) / denom)
    return worst
