"""End-to-end tests of the command-line front end (in-process)."""

import numpy as np
import pytest

from conftest import write_idx_images, write_idx_labels
from gradfilt.cli import EXIT_CONFIG, EXIT_DATA, EXIT_OK, main


@pytest.fixture(autouse=True)
def _no_output_dir_override(monkeypatch):
    monkeypatch.delenv("GRADFILT_OUTPUT_DIR", raising=False)


def test_run_happy_path(tmp_path, capsys):
    out = tmp_path / "res"
    cfg = tmp_path / "exp.cfg"
    cfg.write_text(
        "[experiment]\n"
        "study = nonconvex\n"
        "methods = sgd, ar1\n"
        "lrs = 0.01\n"
        "iterations = 40\n"
        f"output_dir = {out}\n"
    )
    assert main(["run", str(cfg)]) == EXIT_OK
    printed = capsys.readouterr().out.splitlines()
    assert printed[-1].endswith("summary.csv")
    assert len(printed) == 3  # two cells plus the summary
    assert (out / "summary.csv").exists()


def test_run_missing_config_is_config_error(capsys):
    assert main(["run", "/nonexistent/exp.cfg"]) == EXIT_CONFIG
    assert "config error" in capsys.readouterr().err


def test_run_bad_value_is_config_error(tmp_path, capsys):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text("[experiment]\nstudy = nonconvex\nlrs = -1\n")
    assert main(["run", str(cfg)]) == EXIT_CONFIG


def test_run_corrupt_idx_is_data_error(tmp_path, capsys):
    # the config parses (files exist), but the image payload is short
    img = write_idx_images(
        str(tmp_path / "i.idx"),
        np.zeros((4, 28, 28), dtype=np.uint8),
        truncate_by=7,
    )
    lab = write_idx_labels(
        str(tmp_path / "l.idx"), np.zeros(4, dtype=np.uint8)
    )
    cfg = tmp_path / "exp.cfg"
    cfg.write_text(
        "[experiment]\n"
        "study = mnist\n"
        "methods = sgd\n"
        "lrs = 0.1\n"
        f"output_dir = {tmp_path / 'res'}\n"
        "\n"
        "[mnist]\n"
        "epochs = 1\n"
        "batch_sizes = 2\n"
        f"train_images = {img}\n"
        f"train_labels = {lab}\n"
        f"test_images = {img}\n"
        f"test_labels = {lab}\n"
    )
    assert main(["run", str(cfg)]) == EXIT_DATA
    assert "data error" in capsys.readouterr().err


def test_plot_happy_path(tmp_path, capsys):
    out = tmp_path / "res"
    cfg = tmp_path / "exp.cfg"
    cfg.write_text(
        "[experiment]\n"
        "study = nonconvex\n"
        "methods = sgd\n"
        "lrs = 0.01\n"
        "iterations = 30\n"
        f"output_dir = {out}\n"
    )
    assert main(["run", str(cfg)]) == EXIT_OK
    capsys.readouterr()
    csv = out / "nonconvex_sgd_lr0p01.csv"
    svg = tmp_path / "chart.svg"
    assert main(["plot", "value_curve", str(csv), "-o", str(svg)]) == EXIT_OK
    assert svg.read_text().startswith("<svg ")


def test_plot_missing_csv_is_data_error(tmp_path):
    svg = tmp_path / "chart.svg"
    code = main(["plot", "value_curve", "/nonexistent.csv", "-o", str(svg)])
    assert code == EXIT_DATA


def test_oracle_min_prints_frozen_value(capsys):
    assert main(["oracle-min"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "f* = -3.246394" in out
    assert "argmin = (-1.11051" in out


def test_oracle_min_rejects_coarse_resolution(capsys):
    assert main(["oracle-min", "--resolution", "10"]) == EXIT_CONFIG


def test_verify_subcommand_passes(capsys):
    assert main(["verify"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "PASS" in out
    assert "FAIL" not in out
