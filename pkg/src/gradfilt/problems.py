"""The 2-D non-convex benchmark, its analytic gradient, and a minimum oracle.

f(x, y) = (x^2 + y^2) + 5 sin(x + y^2), radians everywhere. The quadratic
bowl keeps iterates bounded while the sine sprinkles rings of local minima
around the global one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "eval_f",
    "grad_f",
    "noisy_grad",
    "grid_minimum",
    "NonConvexProblem",
    "START_POINT",
]

# Fixed benchmark start, deliberately far from the global minimum.
START_POINT = (5.0, 5.0)


def eval_f(p):
    """Evaluate f at p = (x, y). Accepts scalars or broadcastable arrays."""
    x, y = p[0], p[1]
    return (x * x + y * y) + 5.0 * np.sin(x + y * y)


def grad_f(p):
    """Analytic gradient (2x + 5cos(x+y^2), 2y + 10y cos(x+y^2))."""
    x, y = p[0], p[1]
    co = np.cos(x + y * y)
    return np.stack([2.0 * x + 5.0 * co, 2.0 * y + 10.0 * y * co])


def noisy_grad(p, sigma: float, rng: np.random.Generator | None = None):
    """grad_f(p) plus independent N(0, sigma^2) per component.

    sigma = 0 returns the analytic gradient exactly and consumes no
    randomness; sigma > 0 requires a generator.
    """
    if sigma < 0:
        raise ValueError(f"noise level must be >= 0, got {sigma}")
    g = grad_f(p)
    if sigma == 0:
        return g
    if rng is None:
        raise ValueError("sigma > 0 requires a random generator")
    return g + sigma * rng.standard_normal(np.shape(g))


def grid_minimum(bounds=((-6.0, 6.0), (-6.0, 6.0)), resolution: int = 1201):
    """Brute-force global-minimum oracle.

    Evaluates f on a resolution x resolution grid over the bounds, then
    refines the best grid point with a short plain gradient descent (the
    grid pins the basin; descent polishes within it). Returns (point, value).
    """
    if resolution < 1000:
        raise ValueError(
            f"resolution must be >= 1000 points per axis, got {resolution}"
        )
    xs = np.linspace(bounds[0][0], bounds[0][1], resolution)
    ys = np.linspace(bounds[1][0], bounds[1][1], resolution)
    grid_x, grid_y = np.meshgrid(xs, ys, indexing="ij")
    values = eval_f((grid_x, grid_y))
    i, j = np.unravel_index(np.argmin(values), values.shape)
    point = np.array([grid_x[i, j], grid_y[i, j]])
    for _ in range(2000):
        point = point - 0.01 * grad_f(point)
    return point, float(eval_f(point))


@dataclass
class NonConvexProblem:
    """Benchmark wrapper exposing start/loss/grad to the optimization loop.

    noise_sigma adds Gaussian noise to the analytic gradient; the default 0
    keeps the benchmark deterministic.
    """

    start: tuple[float, float] = START_POINT
    noise_sigma: float = 0.0

    def loss(self, theta) -> float:
        return float(eval_f(theta))

    def grad(self, theta, rng: np.random.Generator | None = None):
        if self.noise_sigma > 0:
            return noisy_grad(theta, self.noise_sigma, rng)
        return grad_f(theta)
