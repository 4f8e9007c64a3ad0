"""Experiment sweeps: config parsing, study execution, CSV metrics.

A config file describes one study (the 2D benchmark or the MNIST network)
as a grid of methods x learning rates (x batch sizes). Every cell runs
seeded and lands in its own CSV; a summary CSV collects the end state of
each cell, diverged or not. All value formatting is exact-round-trip, so
a rerun with the same config is byte-identical.
"""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError
from .mlp import load_mnist_idx, train
from .optimizers import (
    METHOD_LABELS,
    OptimizerConfig,
    Trajectory,
    default_config,
    run_optimization,
)
from .problems import NonConvexProblem, eval_f

__all__ = [
    "ExperimentSpec",
    "parse_config",
    "format_config",
    "run_study",
    "write_metrics_csv",
    "read_metrics_csv",
]

STUDIES = ("nonconvex", "mnist")

# Benchmark-study defaults; the network study re-tunes the Kalman
# transition and doubles the wavelet window.
_FILTER_DEFAULTS = {
    "ma1": "0.9",
    "ma2": "0.8, 0.1",
    "ar1": "0.9",
    "ar2": "0.8, 0.1",
    "kalman_gamma": "2.0",
    "kalman_c": "1.0",
    "kalman_q_var": "0.01",
    "kalman_r_var": "2.0",
    "kalman_p0": "1.0",
    "wavelet_window": "8",
    "wavelet_levels": "3",
    "wavelet_threshold": "0.2",
    "wavelet_alpha": "5.0",
}
_FILTER_DEFAULTS_MNIST = dict(
    _FILTER_DEFAULTS, kalman_gamma="5.0", wavelet_window="16"
)
_ADAM_DEFAULTS = {"beta1": "0.9", "beta2": "0.99", "eps": "1e-8"}
_EXPERIMENT_DEFAULTS = {
    "methods": ", ".join(METHOD_LABELS),
    "seed": "0",
    "output_dir": "results",
    "iterations": "500",
    "noise_sigma": "0.0",
}
_MNIST_DEFAULTS = {
    "epochs": "10",
    "batch_sizes": "4, 16, 64",
    "lr_decay": "0.7",
    "augment": "true",
}
_MNIST_PATH_KEYS = ("train_images", "train_labels", "test_images",
                    "test_labels")


@dataclass(frozen=True)
class ExperimentSpec:
    """One study's validated sweep grid plus everything needed to run it.

    ``methods`` carries one config per label with lr set to ``lrs[0]``;
    the runner swaps in each grid lr. MNIST path fields are empty for the
    benchmark study.
    """

    study: str
    labels: tuple
    methods: tuple
    lrs: tuple
    seed: int
    output_dir: str
    iterations: int = 500
    noise_sigma: float = 0.0
    epochs: int = 10
    batch_sizes: tuple = ()
    augment: bool = True
    mnist_paths: tuple = ()


def _fail(path, section, key, message):
    raise ConfigError(f"{path}: [{section}] {key}: {message}")


def _floats(text):
    return tuple(float(tok) for tok in text.replace(",", " ").split())


def _ints(text):
    return tuple(int(tok) for tok in text.replace(",", " ").split())


def _check_known(path, parser, section, known):
    for key in parser[section]:
        if key not in known:
            _fail(path, section, key, "unknown key")


def parse_config(path) -> ExperimentSpec:
    """Read and validate one experiment config.

    Sections: [experiment] (study, methods, lrs, seed, output_dir,
    iterations, noise_sigma), [filters], [adam], and for the network study
    [mnist] (epochs, batch_sizes, lr_decay, augment, and the four IDX
    paths). Unknown sections or keys are rejected by name; omitted keys
    fall back to the study's published settings. Relative paths resolve
    against the config file's directory; GRADFILT_OUTPUT_DIR overrides
    output_dir.
    """
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except configparser.Error as exc:
        # configparser diagnostics already carry line numbers
        raise ConfigError(f"{path}: {exc}") from exc

    for section in parser.sections():
        if section not in ("experiment", "filters", "adam", "mnist"):
            raise ConfigError(f"{path}: unknown section [{section}]")
    if "experiment" not in parser:
        raise ConfigError(f"{path}: missing [experiment] section")

    exp = dict(_EXPERIMENT_DEFAULTS)
    exp.update(parser["experiment"])
    _check_known(path, parser, "experiment",
                 set(_EXPERIMENT_DEFAULTS) | {"study", "lrs"})
    study = exp.get("study")
    if study not in STUDIES:
        _fail(path, "experiment", "study",
              f"must be one of {STUDIES}, got {study!r}")
    if "lrs" not in exp:
        _fail(path, "experiment", "lrs", "required")

    try:
        lrs = _floats(exp["lrs"])
        seed = int(exp["seed"])
        iterations = int(exp["iterations"])
        noise_sigma = float(exp["noise_sigma"])
    except ValueError as exc:
        raise ConfigError(f"{path}: [experiment] {exc}") from exc
    if not lrs or any(lr <= 0 or not np.isfinite(lr) for lr in lrs):
        _fail(path, "experiment", "lrs", f"need positive finite rates: {lrs}")
    if iterations < 1:
        _fail(path, "experiment", "iterations", "must be >= 1")
    if noise_sigma < 0:
        _fail(path, "experiment", "noise_sigma", "must be >= 0")

    labels = tuple(tok for tok in exp["methods"].replace(",", " ").split())
    if not labels:
        _fail(path, "experiment", "methods", "need at least one method")
    for label in labels:
        if label not in METHOD_LABELS:
            _fail(path, "experiment", "methods",
                  f"unknown method {label!r}, expected one of {METHOD_LABELS}")
    if len(set(labels)) != len(labels):
        _fail(path, "experiment", "methods", "duplicate method")

    filter_defaults = (_FILTER_DEFAULTS_MNIST if study == "mnist"
                       else _FILTER_DEFAULTS)
    filt = dict(filter_defaults)
    if "filters" in parser:
        _check_known(path, parser, "filters", set(filter_defaults))
        filt.update(parser["filters"])
    adam = dict(_ADAM_DEFAULTS)
    if "adam" in parser:
        _check_known(path, parser, "adam", set(_ADAM_DEFAULTS))
        adam.update(parser["adam"])

    epochs, batch_sizes, augment = 10, (), True
    mnist_paths = ()
    lr_decay = 1.0
    if study == "mnist":
        if "mnist" not in parser:
            raise ConfigError(f"{path}: mnist study needs a [mnist] section")
        mn = dict(_MNIST_DEFAULTS)
        mn.update(parser["mnist"])
        _check_known(path, parser, "mnist",
                     set(_MNIST_DEFAULTS) | set(_MNIST_PATH_KEYS))
        try:
            epochs = int(mn["epochs"])
            batch_sizes = _ints(mn["batch_sizes"])
            lr_decay = float(mn["lr_decay"])
            augment = mn["augment"].strip().lower() in ("true", "1", "yes")
        except ValueError as exc:
            raise ConfigError(f"{path}: [mnist] {exc}") from exc
        if epochs < 0:
            _fail(path, "mnist", "epochs", "must be >= 0")
        if not batch_sizes or any(b < 1 for b in batch_sizes):
            _fail(path, "mnist", "batch_sizes",
                  f"need positive sizes: {batch_sizes}")
        base = os.path.dirname(os.path.abspath(path))
        resolved = []
        for key in _MNIST_PATH_KEYS:
            if key not in mn:
                _fail(path, "mnist", key, "required")
            p = mn[key]
            if not os.path.isabs(p):
                p = os.path.normpath(os.path.join(base, p))
            if not os.path.exists(p):
                _fail(path, "mnist", key, f"file not found: {p}")
            resolved.append(p)
        mnist_paths = tuple(resolved)
    elif "mnist" in parser:
        raise ConfigError(
            f"{path}: [mnist] section is only valid for the mnist study"
        )

    def build(label):
        kw = {"lr_decay_per_epoch": lr_decay}
        try:
            if label in ("ma1", "ma2", "ar1", "ar2"):
                kw[label.rstrip("12") + "_coeffs"] = _floats(filt[label])
            elif label == "kalman":
                for name in ("gamma", "c", "q_var", "r_var", "p0"):
                    kw["kalman_" + name] = float(filt["kalman_" + name])
            elif label == "wavelet":
                kw["wavelet_window"] = int(filt["wavelet_window"])
                kw["wavelet_levels"] = int(filt["wavelet_levels"])
                kw["wavelet_threshold"] = float(filt["wavelet_threshold"])
                kw["wavelet_alpha"] = float(filt["wavelet_alpha"])
            elif label == "adam":
                kw["adam_beta1"] = float(adam["beta1"])
                kw["adam_beta2"] = float(adam["beta2"])
                kw["adam_eps"] = float(adam["eps"])
            return default_config(label, lrs[0], **kw)
        except ValueError as exc:
            raise ConfigError(f"{path}: method {label}: {exc}") from exc

    methods = tuple(build(label) for label in labels)

    output_dir = os.environ.get("GRADFILT_OUTPUT_DIR") or exp["output_dir"]
    return ExperimentSpec(
        study=study,
        labels=labels,
        methods=methods,
        lrs=lrs,
        seed=seed,
        output_dir=output_dir,
        iterations=iterations,
        noise_sigma=noise_sigma,
        epochs=epochs,
        batch_sizes=batch_sizes,
        augment=augment,
        mnist_paths=mnist_paths,
    )


def _fmt(value) -> str:
    return format(float(value), ".17g")


def format_config(spec: ExperimentSpec) -> str:
    """Spec back to config text; parsing the text reproduces the spec."""
    lines = ["[experiment]",
             f"study = {spec.study}",
             f"methods = {', '.join(spec.labels)}",
             f"lrs = {', '.join(_fmt(lr) for lr in spec.lrs)}",
             f"seed = {spec.seed}",
             f"output_dir = {spec.output_dir}",
             f"iterations = {spec.iterations}",
             f"noise_sigma = {_fmt(spec.noise_sigma)}"]
    by_label = dict(zip(spec.labels, spec.methods))
    filt_lines = []
    for label in ("ma1", "ma2", "ar1", "ar2"):
        if label in by_label:
            coeffs = getattr(by_label[label], label.rstrip("12") + "_coeffs")
            filt_lines.append(
                f"{label} = {', '.join(_fmt(c) for c in coeffs)}"
            )
    if "kalman" in by_label:
        cfg = by_label["kalman"]
        for name in ("gamma", "c", "q_var", "r_var", "p0"):
            filt_lines.append(
                f"kalman_{name} = {_fmt(getattr(cfg, 'kalman_' + name))}"
            )
    if "wavelet" in by_label:
        cfg = by_label["wavelet"]
        filt_lines.append(f"wavelet_window = {cfg.wavelet_window}")
        filt_lines.append(f"wavelet_levels = {cfg.wavelet_levels}")
        filt_lines.append(
            f"wavelet_threshold = {_fmt(cfg.wavelet_threshold)}"
        )
        filt_lines.append(f"wavelet_alpha = {_fmt(cfg.wavelet_alpha)}")
    if filt_lines:
        lines += ["", "[filters]"] + filt_lines
    if "adam" in by_label:
        cfg = by_label["adam"]
        lines += ["", "[adam]",
                  f"beta1 = {_fmt(cfg.adam_beta1)}",
                  f"beta2 = {_fmt(cfg.adam_beta2)}",
                  f"eps = {_fmt(cfg.adam_eps)}"]
    if spec.study == "mnist":
        decay = spec.methods[0].lr_decay_per_epoch
        lines += ["", "[mnist]",
                  f"epochs = {spec.epochs}",
                  f"batch_sizes = {', '.join(str(b) for b in spec.batch_sizes)}",
                  f"lr_decay = {_fmt(decay)}",
                  f"augment = {'true' if spec.augment else 'false'}"]
        for key, p in zip(_MNIST_PATH_KEYS, spec.mnist_paths):
            lines.append(f"{key} = {p}")
    return "\n".join(lines) + "\n"


def write_metrics_csv(trajectory: Trajectory, path) -> None:
    """One row per recorded iteration, exact-round-trip decimal text.

    Header: t,loss,param_0..,raw_grad_sq_0..,filtered_grad_sq_0.. with
    widths taken from the records. Refuses an empty trajectory before
    touching the filesystem.
    """
    if len(trajectory.records) == 0:
        raise ConfigError(f"refusing to write empty trajectory to {path}")
    first = trajectory.records[0]
    p_w, r_w, f_w = (first.params.size, first.raw_grad_sq.size,
                     first.filtered_grad_sq.size)
    header = (["t", "loss"]
              + [f"param_{i}" for i in range(p_w)]
              + [f"raw_grad_sq_{i}" for i in range(r_w)]
              + [f"filtered_grad_sq_{i}" for i in range(f_w)])
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for rec in trajectory.records:
            if (rec.params.size, rec.raw_grad_sq.size,
                    rec.filtered_grad_sq.size) != (p_w, r_w, f_w):
                raise ConfigError(
                    f"inconsistent record widths at t={rec.t}"
                )
            row = ([str(rec.t), _fmt(rec.loss)]
                   + [_fmt(v) for v in rec.params]
                   + [_fmt(v) for v in rec.raw_grad_sq]
                   + [_fmt(v) for v in rec.filtered_grad_sq])
            fh.write(",".join(row) + "\n")


def read_metrics_csv(path):
    """Returns (column_names, float matrix) for one metrics CSV."""
    with open(path) as fh:
        header = fh.readline().strip()
        if not header:
            raise ConfigError(f"{path}: empty metrics file")
        names = header.split(",")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    if data.size and data.shape[1] != len(names):
        raise ConfigError(
            f"{path}: {data.shape[1]} columns, header names {len(names)}"
        )
    return names, data


def _cell_name(spec, label, lr, batch=None) -> str:
    lr_txt = format(lr, "g").replace(".", "p")
    if batch is None:
        return f"{spec.study}_{label}_lr{lr_txt}.csv"
    return f"{spec.study}_{label}_b{batch}_lr{lr_txt}.csv"


def run_study(spec: ExperimentSpec):
    """Run every sweep cell and write per-cell metrics plus summary.csv.

    Cells are seeded independently as (spec.seed, cell_index), so any
    subset reruns identically. A diverged cell gets status "diverged" in
    the summary and keeps whatever rows it produced; the sweep continues.
    Returns the list of written file paths, summary last.
    """
    os.makedirs(spec.output_dir, exist_ok=True)
    written = []
    summary_rows = []
    if spec.study == "nonconvex":
        problem = NonConvexProblem(noise_sigma=spec.noise_sigma)
        cell = 0
        for label, base in zip(spec.labels, spec.methods):
            for lr in spec.lrs:
                config = replace(base, lr=lr)
                traj, theta = run_optimization(
                    problem, config, spec.iterations, seed=[spec.seed, cell]
                )
                out = os.path.join(spec.output_dir,
                                   _cell_name(spec, label, lr))
                if traj.records:
                    write_metrics_csv(traj, out)
                    written.append(out)
                summary_rows.append([
                    label, _fmt(lr), "",
                    "diverged" if traj.diverged else "ok",
                    str(len(traj.records)),
                    _fmt(theta[0]), _fmt(theta[1]),
                    _fmt(eval_f(theta)),
                ])
                cell += 1
        summary_header = ("method,lr,batch_size,status,steps,"
                          "final_x,final_y,final_f")
    else:
        train_set = load_mnist_idx(spec.mnist_paths[0], spec.mnist_paths[1])
        test_set = load_mnist_idx(spec.mnist_paths[2], spec.mnist_paths[3])
        cell = 0
        for label, base in zip(spec.labels, spec.methods):
            for batch in spec.batch_sizes:
                for lr in spec.lrs:
                    config = replace(base, lr=lr)
                    model, traj = train(
                        train_set, config, spec.epochs,
                        seed=[spec.seed, cell], batch_size=batch,
                        test_set=test_set, augment=spec.augment,
                    )
                    out = os.path.join(
                        spec.output_dir, _cell_name(spec, label, lr, batch)
                    )
                    if traj.records:
                        write_metrics_csv(traj, out)
                        written.append(out)
                    acc = traj.epoch_accuracy
                    summary_rows.append([
                        label, _fmt(lr), str(batch),
                        "diverged" if traj.diverged else "ok",
                        str(len(traj.records)),
                        _fmt(traj.records[-1].loss) if traj.records else "",
                        _fmt(acc[-1]) if acc else "",
                        _fmt(max(acc)) if acc else "",
                    ])
                    cell += 1
        summary_header = ("method,lr,batch_size,status,steps,"
                          "final_loss,final_accuracy,best_accuracy")
    summary_path = os.path.join(spec.output_dir, "summary.csv")
    with open(summary_path, "w", newline="\n") as fh:
        fh.write(summary_header + "\n")
        for row in summary_rows:
            fh.write(",".join(row) + "\n")
    written.append(summary_path)
    return written
