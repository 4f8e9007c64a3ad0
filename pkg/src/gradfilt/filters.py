"""Stateful gradient filters.

Each filter consumes the newest raw gradient observation for one parameter
group and returns the current filtered estimate. All state is element-wise:
a filter over n parameters is exactly n independent scalar filters, so
outputs are identical no matter how the parameters are grouped into arrays.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError
from .wavelet import (
    WaveletBasis,
    WaveletCoeffs,
    db4_basis,
    dwt_multilevel,
    idwt_multilevel,
    soft_threshold,
)

__all__ = [
    "GradientFilter",
    "MovingAverageFilter",
    "AutoRegressiveFilter",
    "ScalarKalmanFilter",
    "WaveletShrinkageFilter",
]


class GradientFilter:
    """Interface: ``estimate(g)`` advances state by one observation and
    returns the filtered gradient; ``reset()`` restores the fresh state.
    The observation length is fixed for the lifetime of the instance.
    """

    size: int

    def estimate(self, g: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def reset(self) -> None:
        raise NotImplementedError

    def _as_grad(self, g) -> np.ndarray:
        arr = np.asarray(g, dtype=float)
        if arr.shape != (self.size,):
            raise ConfigError(
                f"gradient has shape {arr.shape}, filter holds state for "
                f"({self.size},)"
            )
        return arr


class MovingAverageFilter(GradientFilter):
    """MA(q): estimate = g_t + sum_i a_i * g_{t-i} over raw observations.

    History buffers start at zero, so the first output equals the first
    observation. Coefficients are applied verbatim; nothing renormalizes
    the DC gain 1 + sum(a).
    """

    def __init__(self, coeffs, size: int):
        self.coeffs = tuple(float(a) for a in coeffs)
        if not self.coeffs:
            raise ConfigError("moving-average filter needs at least one coefficient")
        if size < 1:
            raise ConfigError(f"filter size must be >= 1, got {size}")
        self.size = int(size)
        self._history = [np.zeros(self.size) for _ in self.coeffs]  # newest first

    def estimate(self, g) -> np.ndarray:
        g = self._as_grad(g)
        est = g.copy()
        for a, past in zip(self.coeffs, self._history):
            est += a * past
        self._history.insert(0, g.copy())
        self._history.pop()
        return est

    def reset(self) -> None:
        for h in self._history:
            h[:] = 0.0


class AutoRegressiveFilter(GradientFilter):
    """AR(p): estimate = g_t + sum_i b_i * est_{t-i} over its own outputs.

    With one coefficient b1 this is classical momentum v_t = g_t + b1*v_{t-1}
    term for term: the accumulation below is the same single fused expression,
    so the sequences agree bitwise.
    """

    def __init__(self, coeffs, size: int):
        self.coeffs = tuple(float(b) for b in coeffs)
        if not self.coeffs:
            raise ConfigError("autoregressive filter needs at least one coefficient")
        if size < 1:
            raise ConfigError(f"filter size must be >= 1, got {size}")
        self.size = int(size)
        self._history = [np.zeros(self.size) for _ in self.coeffs]  # newest first

    def estimate(self, g) -> np.ndarray:
        g = self._as_grad(g)
        est = g.copy()
        for b, past in zip(self.coeffs, self._history):
            est += b * past
        self._history.insert(0, est.copy())
        self._history.pop()
        return est

    def reset(self) -> None:
        for h in self._history:
            h[:] = 0.0


class ScalarKalmanFilter(GradientFilter):
    """Independent one-dimensional Kalman filter per parameter.

    Model per element: state transition x <- gamma * x with process variance
    q_var, observation g = c * x with measurement variance r_var. Each call
    runs predict (x_hat <- gamma*x_hat, p <- gamma^2*p + q_var) then update
    (gain K = p*c / (c^2*p + r_var); x_hat += K*(g - c*x_hat);
    p <- (1 - K*c)*p) and returns the posterior x_hat.
    """

    def __init__(self, gamma: float, c: float, q_var: float, r_var: float,
                 size: int, p0: float = 1.0):
        if r_var <= 0:
            raise ConfigError(f"measurement variance must be > 0, got {r_var}")
        if q_var < 0:
            raise ConfigError(f"process variance must be >= 0, got {q_var}")
        if p0 <= 0:
            raise ConfigError(f"initial variance must be > 0, got {p0}")
        if size < 1:
            raise ConfigError(f"filter size must be >= 1, got {size}")
        self.gamma = float(gamma)
        self.c = float(c)
        self.q_var = float(q_var)
        self.r_var = float(r_var)
        self.p0 = float(p0)
        self.size = int(size)
        self._x_hat = np.zeros(self.size)
        self._p_post = np.full(self.size, self.p0)

    @property
    def x_hat(self) -> np.ndarray:
        return self._x_hat.copy()

    @property
    def p_post(self) -> np.ndarray:
        return self._p_post.copy()

    def estimate(self, g) -> np.ndarray:
        g = self._as_grad(g)
        x_pred = self.gamma * self._x_hat
        p_pred = self.gamma * self.gamma * self._p_post + self.q_var
        gain = p_pred * self.c / (self.c * self.c * p_pred + self.r_var)
        self._x_hat = x_pred + gain * (g - self.c * x_pred)
        self._p_post = (1.0 - gain * self.c) * p_pred
        return self._x_hat.copy()

    def reset(self) -> None:
        self._x_hat[:] = 0.0
        self._p_post[:] = self.p0


class WaveletShrinkageFilter(GradientFilter):
    """Denoise the recent gradient history in the wavelet domain.

    Keeps the last ``window`` observations per parameter (zeros before
    warm-up), decomposes ``levels`` deep with the given basis (db4 by
    default), soft-thresholds every highpass band with ``threshold``,
    scales the coarsest lowpass band once by ``alpha``, reconstructs,
    and returns the newest reconstructed sample as the estimate.
    """

    def __init__(self, window: int, levels: int, threshold: float,
                 alpha: float, size: int, basis: WaveletBasis | None = None):
        if window < 2 or (window & (window - 1)) != 0:
            raise ConfigError(f"window must be a power of two >= 2, got {window}")
        if levels < 1 or 2**levels > window:
            raise ConfigError(
                f"levels={levels} invalid for window {window}: need 2**levels <= window"
            )
        if threshold < 0:
            raise ConfigError(f"threshold must be >= 0, got {threshold}")
        if alpha < 1:
            raise ConfigError(f"lowpass gain must be >= 1, got {alpha}")
        if size < 1:
            raise ConfigError(f"filter size must be >= 1, got {size}")
        self.window = int(window)
        self.levels = int(levels)
        self.threshold = float(threshold)
        self.alpha = float(alpha)
        self.size = int(size)
        self.basis = basis if basis is not None else db4_basis()
        self._queue = np.zeros((self.window, self.size))  # oldest -> newest

    def estimate(self, g) -> np.ndarray:
        g = self._as_grad(g)
        self._queue[:-1] = self._queue[1:]
        self._queue[-1] = g
        coeffs = dwt_multilevel(self._queue, self.levels, self.basis)
        filtered = WaveletCoeffs(
            lowpass=self.alpha * coeffs.lowpass,
            highpass=[soft_threshold(h, self.threshold) for h in coeffs.highpass],
        )
        reconstructed = idwt_multilevel(filtered, self.basis)
        return reconstructed[-1].copy()

    def reset(self) -> None:
        self._queue[:] = 0.0
