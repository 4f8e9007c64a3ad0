"""Optimization loops: plain SGD, Adam, and filtered gradient descent.

The filtered methods share one outer loop: observe a raw gradient, pass it
through a stateful filter, and step against the filtered estimate. SGD and
Adam are the unfiltered baselines. A small engine object owns the per-group
mutable state so the same update rule serves a 2-parameter benchmark and a
multi-tensor network.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DivergenceError
from .filters import (
    AutoRegressiveFilter,
    GradientFilter,
    MovingAverageFilter,
    ScalarKalmanFilter,
    WaveletShrinkageFilter,
)

__all__ = [
    "METHODS",
    "OptimizerConfig",
    "validate_config",
    "default_config",
    "build_filter",
    "AdamState",
    "sgd_step",
    "adam_direction",
    "adam_step",
    "fgd_step",
    "lr_decay",
    "UpdateEngine",
    "StepRecord",
    "Trajectory",
    "run_optimization",
]

METHODS = ("sgd", "adam", "ma", "ar", "kalman", "wavelet")

_ADAM_DEFAULTS = {"adam_beta1": 0.9, "adam_beta2": 0.99, "adam_eps": 1e-8}


@dataclass(frozen=True)
class OptimizerConfig:
    """Method selector plus exactly that method's knobs.

    Unused knobs stay at their defaults; ``validate_config`` rejects a
    config that sets parameters belonging to a different method.
    """

    method: str
    lr: float
    ma_coeffs: tuple | None = None
    ar_coeffs: tuple | None = None
    kalman_gamma: float | None = None
    kalman_c: float | None = None
    kalman_q_var: float | None = None
    kalman_r_var: float | None = None
    kalman_p0: float = 1.0
    wavelet_window: int | None = None
    wavelet_levels: int | None = None
    wavelet_threshold: float | None = None
    wavelet_alpha: float | None = None
    adam_beta1: float = 0.9
    adam_beta2: float = 0.99
    adam_eps: float = 1e-8
    lr_decay_per_epoch: float = 1.0


_METHOD_FIELDS = {
    "ma": ("ma_coeffs",),
    "ar": ("ar_coeffs",),
    "kalman": ("kalman_gamma", "kalman_c", "kalman_q_var", "kalman_r_var"),
    "wavelet": (
        "wavelet_window",
        "wavelet_levels",
        "wavelet_threshold",
        "wavelet_alpha",
    ),
}


def validate_config(config: OptimizerConfig) -> OptimizerConfig:
    """Raise ConfigError unless the config is complete and consistent."""
    if config.method not in METHODS:
        raise ConfigError(
            f"unknown method {config.method!r}, expected one of {METHODS}"
        )
    if not (np.isfinite(config.lr) and config.lr > 0):
        raise ConfigError(f"lr must be finite and > 0, got {config.lr}")
    if not 0.0 < config.lr_decay_per_epoch <= 1.0:
        raise ConfigError(
            f"lr_decay_per_epoch must be in (0, 1], got "
            f"{config.lr_decay_per_epoch}"
        )
    for owner, names in _METHOD_FIELDS.items():
        for name in names:
            value = getattr(config, name)
            if owner == config.method:
                if value is None:
                    raise ConfigError(
                        f"method {config.method!r} requires {name}"
                    )
            elif value is not None:
                raise ConfigError(
                    f"{name} is set but method is {config.method!r}"
                )
    if config.method != "adam":
        for name, default in _ADAM_DEFAULTS.items():
            if getattr(config, name) != default:
                raise ConfigError(
                    f"{name} is set but method is {config.method!r}"
                )
    if config.method in ("ma", "ar"):
        coeffs = getattr(config, config.method + "_coeffs")
        if len(coeffs) == 0 or not all(np.isfinite(c) for c in coeffs):
            raise ConfigError(
                f"{config.method}_coeffs must be non-empty and finite"
            )
    if config.method == "kalman":
        # The filter constructor re-checks these; failing early keeps the
        # diagnostics on the config, not the filter.
        if config.kalman_r_var <= 0:
            raise ConfigError("kalman_r_var must be > 0")
        if config.kalman_q_var < 0:
            raise ConfigError("kalman_q_var must be >= 0")
        if config.kalman_p0 <= 0:
            raise ConfigError("kalman_p0 must be > 0")
    if config.method == "wavelet":
        w, k = config.wavelet_window, config.wavelet_levels
        if w < 2 or w & (w - 1):
            raise ConfigError(f"wavelet_window must be a power of two, got {w}")
        if k < 1 or 2 ** k > w:
            raise ConfigError(
                f"wavelet_levels must satisfy 1 <= levels and "
                f"2**levels <= window, got levels={k} window={w}"
            )
        if config.wavelet_threshold < 0:
            raise ConfigError("wavelet_threshold must be >= 0")
        if config.wavelet_alpha < 1:
            raise ConfigError("wavelet_alpha must be >= 1")
    if config.method == "adam":
        if not 0.0 <= config.adam_beta1 < 1.0:
            raise ConfigError("adam_beta1 must be in [0, 1)")
        if not 0.0 <= config.adam_beta2 < 1.0:
            raise ConfigError("adam_beta2 must be in [0, 1)")
        if config.adam_eps <= 0:
            raise ConfigError("adam_eps must be > 0")
    return config


# Benchmark labels -> configs. Order-1 filters weight the previous sample
# by 0.9; order-2 use (0.8, 0.1). The Kalman and wavelet defaults are the
# 2D-benchmark settings; sweeps override them per study.
_LABEL_FIELDS = {
    "sgd": {},
    "adam": {},
    "ma1": {"ma_coeffs": (0.9,)},
    "ma2": {"ma_coeffs": (0.8, 0.1)},
    "ar1": {"ar_coeffs": (0.9,)},
    "ar2": {"ar_coeffs": (0.8, 0.1)},
    "kalman": {
        "kalman_gamma": 2.0,
        "kalman_c": 1.0,
        "kalman_q_var": 0.01,
        "kalman_r_var": 2.0,
    },
    "wavelet": {
        "wavelet_window": 8,
        "wavelet_levels": 3,
        "wavelet_threshold": 0.2,
        "wavelet_alpha": 5.0,
    },
}

METHOD_LABELS = tuple(_LABEL_FIELDS)


def default_config(label: str, lr: float, **overrides) -> OptimizerConfig:
    """Config for a benchmark method label (sgd, adam, ma1, ma2, ar1, ar2,
    kalman, wavelet) with that label's default filter parameters.
    """
    if label not in _LABEL_FIELDS:
        raise ConfigError(
            f"unknown method label {label!r}, expected one of "
            f"{METHOD_LABELS}"
        )
    method = label.rstrip("12")
    fields = dict(_LABEL_FIELDS[label])
    fields.update(overrides)
    return validate_config(OptimizerConfig(method=method, lr=lr, **fields))


def build_filter(config: OptimizerConfig, size: int) -> GradientFilter | None:
    """Fresh filter instance for one parameter group; None for sgd/adam."""
    validate_config(config)
    if config.method == "ma":
        return MovingAverageFilter(config.ma_coeffs, size)
    if config.method == "ar":
        return AutoRegressiveFilter(config.ar_coeffs, size)
    if config.method == "kalman":
        return ScalarKalmanFilter(
            config.kalman_gamma,
            config.kalman_c,
            config.kalman_q_var,
            config.kalman_r_var,
            size,
            p0=config.kalman_p0,
        )
    if config.method == "wavelet":
        return WaveletShrinkageFilter(
            config.wavelet_window,
            config.wavelet_levels,
            config.wavelet_threshold,
            config.wavelet_alpha,
            size,
        )
    return None


def _checked(grad, context: str) -> np.ndarray:
    g = np.asarray(grad, dtype=float)
    if not np.all(np.isfinite(g)):
        raise DivergenceError(f"non-finite gradient in {context}")
    return g


def sgd_step(params, grad, lr: float) -> np.ndarray:
    """One plain descent step against the raw gradient."""
    p = np.asarray(params, dtype=float)
    g = _checked(grad, "sgd_step")
    if p.shape != g.shape:
        raise ConfigError(
            f"params shape {p.shape} != grad shape {g.shape}"
        )
    return p - lr * g


@dataclass
class AdamState:
    """First/second moment accumulators for one parameter group."""

    m: np.ndarray
    v: np.ndarray
    t: int = 0
    beta1: float = 0.9
    beta2: float = 0.99
    eps: float = 1e-8

    @classmethod
    def fresh(cls, size: int, beta1=0.9, beta2=0.99, eps=1e-8) -> "AdamState":
        return cls(
            m=np.zeros(size), v=np.zeros(size),
            beta1=beta1, beta2=beta2, eps=eps,
        )


def adam_direction(state: AdamState, grad) -> np.ndarray:
    """Advance the moments one step and return the bias-corrected
    update direction m_hat / (sqrt(v_hat) + eps).
    """
    g = _checked(grad, "adam_direction")
    if g.shape != state.m.shape:
        raise ConfigError(
            f"grad shape {g.shape} != state shape {state.m.shape}"
        )
    state.t += 1
    state.m = state.beta1 * state.m + (1.0 - state.beta1) * g
    state.v = state.beta2 * state.v + (1.0 - state.beta2) * g * g
    m_hat = state.m / (1.0 - state.beta1 ** state.t)
    v_hat = state.v / (1.0 - state.beta2 ** state.t)
    return m_hat / (np.sqrt(v_hat) + state.eps)


def adam_step(params, grad, state: AdamState, lr: float) -> np.ndarray:
    """One Adam step; mutates ``state``."""
    p = np.asarray(params, dtype=float)
    return p - lr * adam_direction(state, grad)


def fgd_step(params, raw_grad, filt: GradientFilter, lr: float) -> np.ndarray:
    """One filtered descent step: estimate, then move against the estimate.

    Advances the filter by exactly one observation even when lr == 0.
    """
    p = np.asarray(params, dtype=float)
    g = _checked(raw_grad, "fgd_step")
    if p.shape != g.shape:
        raise ConfigError(
            f"params shape {p.shape} != grad shape {g.shape}"
        )
    return p - lr * filt.estimate(g)


def lr_decay(epoch: int, base_lr: float, factor: float) -> float:
    """Learning rate after ``epoch`` whole epochs: base * factor**epoch."""
    if epoch < 0:
        raise ConfigError(f"epoch must be >= 0, got {epoch}")
    return base_lr * factor ** epoch


class UpdateEngine:
    """Per-group update state for one optimizer config.

    Groups are named (a network names its tensors, the benchmark uses one
    group); each name owns an independent filter or Adam accumulator,
    created at first sight and keyed to that group's size. ``step``
    returns the new parameters and the direction that was applied, before
    the learning-rate scaling, so callers can log it.
    """

    def __init__(self, config: OptimizerConfig):
        self.config = validate_config(config)
        self._filters: dict[str, GradientFilter] = {}
        self._adam: dict[str, AdamState] = {}

    def step(self, name: str, params, grad, lr: float):
        p = np.asarray(params, dtype=float)
        g = _checked(grad, f"group {name!r}")
        if p.shape != g.shape:
            raise ConfigError(
                f"group {name!r}: params shape {p.shape} != grad "
                f"shape {g.shape}"
            )
        flat = g.ravel()
        cfg = self.config
        if cfg.method == "sgd":
            direction = flat
        elif cfg.method == "adam":
            state = self._adam.get(name)
            if state is None:
                state = AdamState.fresh(
                    flat.size, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps
                )
                self._adam[name] = state
            direction = adam_direction(state, flat)
        else:
            filt = self._filters.get(name)
            if filt is None:
                filt = build_filter(cfg, flat.size)
                self._filters[name] = filt
            direction = filt.estimate(flat)
        direction = direction.reshape(p.shape)
        return p - lr * direction, direction

    def reset(self) -> None:
        for filt in self._filters.values():
            filt.reset()
        for name, state in self._adam.items():
            self._adam[name] = AdamState.fresh(
                state.m.size, state.beta1, state.beta2, state.eps
            )


@dataclass
class StepRecord:
    """Pre-update snapshot of one iteration."""

    t: int
    params: np.ndarray
    loss: float
    raw_grad_sq: np.ndarray
    filtered_grad_sq: np.ndarray


@dataclass
class Trajectory:
    """Ordered per-iteration records, plus per-epoch test accuracy when a
    training loop fills it in. ``diverged`` marks a truncated run."""

    records: list = field(default_factory=list)
    diverged: bool = False
    epoch_accuracy: list = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)


def run_optimization(problem, config: OptimizerConfig, T: int, seed=0):
    """Drive one method on a problem for T iterations.

    Returns (trajectory, final_params). Records log the pre-update state,
    so record t holds f(theta_t) and the squared raw/filtered gradients
    observed at theta_t; final_params is theta_T. A non-finite loss or
    gradient sets the diverged flag and truncates the run instead of
    raising, so sweeps survive bad cells.
    """
    if T < 1:
        raise ConfigError(f"T must be >= 1, got {T}")
    engine = UpdateEngine(config)
    rng = np.random.default_rng(seed)
    theta = np.asarray(problem.start, dtype=float).copy()
    traj = Trajectory()
    for t in range(T):
        loss = float(problem.loss(theta))
        if not np.isfinite(loss):
            traj.diverged = True
            break
        try:
            g = problem.grad(theta, rng)
            new_theta, direction = engine.step("theta", theta, g, config.lr)
        except DivergenceError:
            traj.diverged = True
            break
        traj.records.append(
            StepRecord(
                t=t,
                params=theta.copy(),
                loss=loss,
                raw_grad_sq=np.asarray(g, dtype=float) ** 2,
                filtered_grad_sq=direction ** 2,
            )
        )
        theta = new_theta
    return traj, theta
