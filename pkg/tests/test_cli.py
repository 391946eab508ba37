#!/usr/bin/env python3
# tests/test_cli.py
"""End-to-end CLI runs with click's test runner."""

import json

import pandas as pd
import pytest
from click.testing import CliRunner

from chuk_memristor_ica import __version__
from chuk_memristor_ica.cli.main import EXIT_CONFIG, EXIT_IO, EXIT_NOT_CONVERGED, cli
from chuk_memristor_ica.core.imaging import load_pgm, save_pgm, synthetic_sources

@pytest.fixture
def runner() -> CliRunner:
    return CliRunner()

@pytest.fixture
def small_config(tmp_path) -> str:
    path = tmp_path / "small.json"
    path.write_text(json.dumps({'image_size': 32}), encoding="utf-8")
    return str(path)

@pytest.fixture
def originals(tmp_path) -> list[str]:
    return [str(save_pgm(image, tmp_path / f"source_{k}.pgm")) for k, image in enumerate(synthetic_sources(32))]

def read_table(path) -> pd.DataFrame:
    return pd.read_csv(path, comment="#")

def invoke(runner, *args):
    return runner.invoke(cli, [str(a) for a in args])

def snapshot(directory) -> dict[str, bytes]:
    return {p.name: p.read_bytes() for p in sorted(directory.iterdir())}

class TestDeviceDemo:
    def test_writes_trace(self, runner, tmp_path):
        out = tmp_path / "demo"
        result = invoke(runner, "device-demo", "--out", out)
        assert result.exit_code == 0, result.output
        path = out / "device_demo.csv"
        assert path.read_text(encoding="utf-8").startswith("# config_sha256=")
        frame = read_table(path)
        assert list(frame.columns) == ["time_s", "resistance_ohm", "weight"]
        assert len(frame) == 1 + 208
        assert frame.resistance_ohm.iloc[0] == 40e3
        assert frame.time_s.iloc[-1] == pytest.approx(2600e-9)

    def test_reports_blocks(self, runner, tmp_path):
        result = invoke(runner, "device-demo", "--out", tmp_path / "demo")
        assert result.exit_code == 0, result.output
        assert "0-500   ns" in result.output
        assert "2500-3000  ns" in result.output

    def test_reruns_are_byte_identical(self, runner, tmp_path):
        out = tmp_path / "demo"
        assert invoke(runner, "device-demo", "--out", out).exit_code == 0
        first = snapshot(out)
        assert invoke(runner, "device-demo", "--out", out).exit_code == 0
        assert snapshot(out) == first

class TestMixAndSeparate:
    def test_mix_synthetic(self, runner, tmp_path, small_config):
        out = tmp_path / "mixed"
        result = invoke(runner, "mix", "--config", small_config, "--out", out)
        assert result.exit_code == 0, result.output
        for k in range(2):
            image = load_pgm(out / f"mixture_{k}.pgm")
            assert image.shape == (32, 32)
        rows = read_table(out / "mix_record.csv")
        assert list(rows.entry) == ["a[0][0]", "a[0][1]", "a[1][0]", "a[1][1]", "scale", "offset"]

    def test_mix_reruns_are_byte_identical(self, runner, tmp_path, small_config):
        out = tmp_path / "mixed"
        assert invoke(runner, "mix", "--config", small_config, "--out", out, "--seed", 5).exit_code == 0
        first = snapshot(out)
        assert set(first) == {"mixture_0.pgm", "mixture_1.pgm", "mix_record.csv"}
        assert invoke(runner, "mix", "--config", small_config, "--out", out, "--seed", 5).exit_code == 0
        assert snapshot(out) == first

    def test_separate_fastica(self, runner, tmp_path, originals):
        mixed = tmp_path / "mixed"
        assert invoke(runner, "mix", *originals, "--out", mixed).exit_code == 0
        out = tmp_path / "separated"
        result = invoke(runner, "separate", mixed / "mixture_0.pgm", mixed / "mixture_1.pgm",
                        "--algorithm", "fastica", "--backend", "crossbar",
                        "--originals", originals[0], "--originals", originals[1], "--out", out)
        assert result.exit_code == 0, result.output
        metrics = read_table(out / "metrics_fastica_crossbar.csv")
        assert list(metrics.image) == ["source_0", "source_1", "mean"]
        assert (metrics.ssim > 0.9).all()
        assert (out / "separated_fastica_crossbar_0.pgm").exists()
        weights = read_table(out / "weights_fastica.csv")
        assert list(weights.columns) == ["row", "col", "weight", "state_weight", "resistance_ohm"]
        convergence = read_table(out / "convergence_fastica_crossbar.csv")
        assert list(convergence.columns) == ["pipeline", "converged", "iterations", "clipped_writes"]
        assert convergence.clipped_writes.iloc[0] == 0
        cells = read_table(out / "cells_fastica_crossbar.csv")
        assert list(cells.columns) == ["cycle", "row", "col", "weight", "resistance_ohm", "charge_c", "y"]
        assert cells.cycle.nunique() == convergence.iterations.iloc[0] + 1

    def test_separate_reruns_are_byte_identical(self, runner, tmp_path, originals):
        mixed = tmp_path / "mixed"
        assert invoke(runner, "mix", *originals, "--out", mixed).exit_code == 0
        out = tmp_path / "separated"
        args = ["separate", mixed / "mixture_0.pgm", mixed / "mixture_1.pgm",
                "--algorithm", "fastica", "--backend", "crossbar",
                "--originals", originals[0], "--originals", originals[1], "--out", out, "--seed", 11]
        assert invoke(runner, *args).exit_code == 0
        first = snapshot(out)
        assert "cells_fastica_crossbar.csv" in first
        assert invoke(runner, *args).exit_code == 0
        assert snapshot(out) == first

    def test_separate_acy_without_originals(self, runner, tmp_path, originals):
        mixed = tmp_path / "mixed"
        assert invoke(runner, "mix", *originals, "--out", mixed).exit_code == 0
        out = tmp_path / "separated"
        result = invoke(runner, "separate", mixed / "mixture_0.pgm", mixed / "mixture_1.pgm",
                        "--algorithm", "acy", "--out", out)
        assert result.exit_code in (0, EXIT_NOT_CONVERGED), result.output
        trace = read_table(out / "trace_acy_ideal.csv")
        assert set(trace.metric) == {"delta_w_frobenius"}
        assert not (out / "metrics_acy_ideal.csv").exists()
        assert load_pgm(out / "separated_acy_ideal_1.pgm").shape == (32, 32)

class TestCompare:
    def test_improvement_table(self, runner, tmp_path, small_config):
        out = tmp_path / "cmp"
        result = invoke(runner, "compare", "--config", small_config, "--out", out)
        assert result.exit_code == 0, result.output
        table = read_table(out / "improvements.csv")
        assert list(table.columns) == ["algorithm", "ssim_impr", "gsm_impr", "psnr_impr", "mse_impr",
                                       "converged", "status"]
        assert list(table.algorithm) == ["acy", "fastica"]
        assert (table.status == "ok").all()
        assert len(read_table(out / "quality.csv")) == 12

    def test_reruns_are_byte_identical(self, runner, tmp_path, small_config):
        out = tmp_path / "cmp"
        assert invoke(runner, "compare", "--config", small_config, "--out", out, "--seed", 3).exit_code == 0
        first = (out / "improvements.csv").read_bytes()
        assert invoke(runner, "compare", "--config", small_config, "--out", out, "--seed", 3).exit_code == 0
        assert (out / "improvements.csv").read_bytes() == first

class TestMonteCarlo:
    def test_zero_sigma_single_trial(self, runner, tmp_path, small_config):
        out = tmp_path / "mc"
        result = invoke(runner, "mc", "--config", small_config, "--out", out, "--trials", 1, "--sigma", 0)
        assert result.exit_code == 0, result.output
        summary = read_table(out / "mc_summary.csv")
        assert len(summary) == 8
        assert (summary.delta_vs_nominal == 0.0).all()
        assert len(read_table(out / "mc_trials.csv")) == 2

    def test_reruns_are_byte_identical(self, runner, tmp_path, small_config):
        out = tmp_path / "mc"
        args = ["mc", "--config", small_config, "--out", out, "--trials", 2, "--sigma", 0.03, "--seed", 9]
        assert invoke(runner, *args).exit_code == 0
        first = snapshot(out)
        assert {"mc_trials.csv", "mc_summary.csv"} <= set(first)
        assert invoke(runner, *args).exit_code == 0
        assert snapshot(out) == first

class TestErrors:
    def test_missing_image(self, runner, tmp_path):
        result = invoke(runner, "mix", tmp_path / "missing.pgm", tmp_path / "other.pgm", "--out", tmp_path / "o")
        assert result.exit_code == EXIT_IO
        assert "missing.pgm" in result.output

    def test_bad_config(self, runner, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({'mixing_matrix': [[1.0, 2.0]]}), encoding="utf-8")
        result = invoke(runner, "device-demo", "--config", path, "--out", tmp_path / "o")
        assert result.exit_code == EXIT_CONFIG

    def test_unknown_algorithm(self, runner, tmp_path):
        result = invoke(runner, "separate", tmp_path / "a.pgm", "--algorithm", "pca")
        assert result.exit_code == 2

    def test_version(self, runner):
        result = invoke(runner, "--version")
        assert result.exit_code == 0
        assert __version__ in result.output
