"""Self-contained property checks, runnable without test infrastructure.

`gradfilt verify` executes these and reports one line per suite. They
mirror the repository's test suite at reduced scale where scale is a
knob, and exactly where the property is cheap.
"""

from __future__ import annotations

import numpy as np

from .filters import AutoRegressiveFilter, ScalarKalmanFilter
from .mlp import backward, forward, init_mlp, softmax_cross_entropy
from .optimizers import OptimizerConfig, UpdateEngine, build_filter
from .problems import grad_f
from .wavelet import db4_basis, dwt_multilevel, idwt_multilevel

__all__ = ["run_all", "SUITES"]


def _check_db4():
    basis = db4_basis()  # construction already enforces the conditions
    h = np.array(basis.lowpass_analysis)
    g = np.array(basis.highpass_analysis)
    worst = max(
        abs(h.sum() - np.sqrt(2.0)),
        abs(h @ h - 1.0),
        abs(g.sum()),
        max(abs(np.sum(g * np.arange(8.0) ** k)) for k in range(4)),
    )
    return worst < 1e-8, f"worst condition residual {worst:.2e}"


def _check_roundtrip():
    basis = db4_basis()
    rng = np.random.default_rng(20240817)
    worst = 0.0
    for length in (8, 16, 32):
        max_levels = int(np.log2(length))
        for levels in range(1, max_levels + 1):
            for _ in range(100):
                x = rng.normal(size=length)
                coeffs = dwt_multilevel(x, levels, basis)
                back = idwt_multilevel(coeffs, basis)
                worst = max(worst, float(np.max(np.abs(back - x))))
    return worst <= 1e-9, f"max reconstruction error {worst:.2e}"


def _check_momentum():
    rng = np.random.default_rng(7)
    ar = AutoRegressiveFilter((0.9,), 13)
    v = np.zeros(13)
    for _ in range(1000):
        g = rng.normal(size=13)
        est = ar.estimate(g)
        v = g + 0.9 * v
        if not np.array_equal(est, v):
            return False, "sequence diverged from momentum recursion"
    return True, "1000 steps bitwise-identical to momentum"


def _check_kalman_bounds():
    rng = np.random.default_rng(11)
    n = 1000  # 1000 independent scalar streams per setting
    ok = True
    for gamma in (0.5, 1.0, 2.0, 5.0):
        filt = ScalarKalmanFilter(gamma, 1.0, 0.01, 2.0, n)
        p_prev = filt.p_post
        for _ in range(50):
            predicted = gamma * gamma * p_prev + 0.01
            filt.estimate(rng.normal(scale=3.0, size=n))
            p = filt.p_post
            k_times_c = 1.0 - p / predicted
            if not (np.all(k_times_c > 0.0) and np.all(k_times_c < 1.0)):
                ok = False
            if not np.all(p <= predicted):
                ok = False
            p_prev = p
        if not ok:
            break
    return ok, "gain in (0,1), posterior below prediction, 1000 streams"


def _check_mlp_gradients():
    rng = np.random.default_rng(3)
    model = init_mlp(rng, sizes=(12, 4, 3))
    x = np.random.default_rng(4).random((5, 12))
    y = np.array([0, 2, 1, 2, 0])
    _, cache = forward(model, x)
    grads = backward(model, cache, y)
    h = 1e-4
    worst = 0.0
    for name, tensor in model.tensors().items():
        it = np.nditer(tensor, flags=["multi_index"])
        for _ in it:
            i = it.multi_index
            old = tensor[i]
            tensor[i] = old + h
            lp, _ = softmax_cross_entropy(forward(model, x)[0], y)
            tensor[i] = old - h
            lm, _ = softmax_cross_entropy(forward(model, x)[0], y)
            tensor[i] = old
            fd = (lp - lm) / (2 * h)
            an = grads[name][i]
            rel = abs(fd - an) / max(1e-8, abs(fd), abs(an))
            worst = max(worst, rel)
    return worst <= 1e-4, f"worst relative error {worst:.2e}"


def _check_benchmark_gradient():
    rng = np.random.default_rng(5)
    pts = rng.uniform(-6.0, 6.0, size=(100, 2))
    h = 1e-6
    worst = 0.0
    from .problems import eval_f

    for p in pts:
        g = grad_f(p)
        for axis in range(2):
            e = np.zeros(2)
            e[axis] = h
            fd = (eval_f(p + e) - eval_f(p - e)) / (2 * h)
            rel = abs(fd - g[axis]) / max(1.0, abs(fd), abs(g[axis]))
            worst = max(worst, rel)
    return worst <= 1e-6, f"worst relative error {worst:.2e}"


def _check_layout_independence():
    size = 10_000
    rng = np.random.default_rng(99)
    grads = rng.normal(size=(2, size))
    configs = {
        "ma": OptimizerConfig(method="ma", lr=0.1, ma_coeffs=(0.8, 0.1)),
        "ar": OptimizerConfig(method="ar", lr=0.1, ar_coeffs=(0.9,)),
        "kalman": OptimizerConfig(
            method="kalman", lr=0.1, kalman_gamma=2.0, kalman_c=1.0,
            kalman_q_var=0.01, kalman_r_var=2.0,
        ),
        "wavelet": OptimizerConfig(
            method="wavelet", lr=0.1, wavelet_window=16, wavelet_levels=3,
            wavelet_threshold=0.2, wavelet_alpha=5.0,
        ),
    }
    for name, cfg in configs.items():
        whole = build_filter(cfg, size)
        single = [build_filter(cfg, 1) for _ in range(size)]
        for g in grads:
            est_whole = whole.estimate(g)
            est_single = np.array(
                [single[i].estimate(g[i:i + 1])[0] for i in range(size)]
            )
            if not np.array_equal(est_whole, est_single):
                bad = int(np.argmax(est_whole != est_single))
                return False, f"{name}: element {bad} differs"
    return True, "1x10^4 block matches 10^4 singletons bitwise"


SUITES = (
    ("db4-basis-conditions", _check_db4),
    ("dwt-roundtrip", _check_roundtrip),
    ("ar1-equals-momentum", _check_momentum),
    ("kalman-gain-bounds", _check_kalman_bounds),
    ("mlp-gradient-check", _check_mlp_gradients),
    ("benchmark-gradient-check", _check_benchmark_gradient),
    ("filter-layout-independence", _check_layout_independence),
)


def run_all(printer=print) -> int:
    """Run every suite; returns the number of failures."""
    failures = 0
    for name, fn in SUITES:
        ok, detail = fn()
        printer(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
        if not ok:
            failures += 1
    return failures
