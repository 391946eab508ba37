#!/usr/bin/env python3
# tests/test_variability.py
"""Per-cell parameter sampling and the Monte Carlo study."""

import numpy as np
import pytest

from chuk_memristor_ica.config.models import VariationSpec
from chuk_memristor_ica.core import variability
from chuk_memristor_ica.core.base import Algorithm, NoReferenceError, VariationSpecError
from chuk_memristor_ica.core.imaging import mix, quantize, synthetic_sources
from chuk_memristor_ica.core.metrics import METRIC_NAMES
from chuk_memristor_ica.core.pipeline import compare, run_pipeline
from chuk_memristor_ica.core.variability import (
    cell_rng,
    run_mc,
    sample_crossbar_params,
    sample_params,
)

def mixed_pair(size: int):
    sources = synthetic_sources(size)
    mixtures, _ = mix(sources, [[0.7, 0.3], [0.3, 0.7]])
    return [quantize(m) for m in mixtures], sources

def with_variation(cfg, **variation):
    return cfg.model_copy(update={'variation': cfg.variation.model_copy(update=variation)})

class TestSampling:
    def test_no_variation_returns_base(self, mc_params):
        spec = VariationSpec(sigma_fraction=0.0)
        assert sample_params(mc_params, spec, np.random.default_rng(0)) is mc_params

    def test_only_listed_fields_vary(self, mc_params):
        drawn = sample_params(mc_params, VariationSpec(fields=["d"]), np.random.default_rng(0))
        assert drawn.d != mc_params.d
        assert (drawn.r_on, drawn.r_off, drawn.k_off) == (mc_params.r_on, mc_params.r_off, mc_params.k_off)

    def test_means_override_base(self, mc_params):
        spec = VariationSpec(sigma_fraction=0.001, fields=["r_on"], means={'r_on': 1000.0})
        drawn = sample_params(mc_params, spec, np.random.default_rng(0))
        assert drawn.r_on == pytest.approx(1000.0, rel=0.01)

    def test_invalid_draws_exhaust_retries(self, mc_params):
        spec = VariationSpec(sigma_fraction=0.01, means={'r_on': 152e6, 'r_off': 150e3})
        with pytest.raises(VariationSpecError):
            sample_params(mc_params, spec, np.random.default_rng(0))

    def test_cell_streams_are_reproducible(self, mc_params):
        spec = VariationSpec()
        first = sample_params(mc_params, spec, cell_rng(7, 3, 0, 1))
        second = sample_params(mc_params, spec, cell_rng(7, 3, 0, 1))
        assert first == second

    def test_cells_differ(self, mc_params):
        grid = sample_crossbar_params(mc_params, VariationSpec(seed=1), 2, 2, trial=0)
        values = {cell.d for row in grid for cell in row}
        assert len(values) == 4

    def test_trials_differ(self, mc_params):
        spec = VariationSpec(seed=1)
        a = sample_crossbar_params(mc_params, spec, 2, 2, trial=0)
        b = sample_crossbar_params(mc_params, spec, 2, 2, trial=1)
        assert a != b

    @pytest.mark.slow
    def test_draw_statistics(self, mc_params):
        spec = VariationSpec(fields=["d"], sigma_fraction=0.03)
        rng = np.random.default_rng(42)
        draws = np.array([sample_params(mc_params, spec, rng).d for _ in range(100_000)])
        assert draws.mean() == pytest.approx(50e-9, rel=0.005)
        assert draws.std() == pytest.approx(1.5e-9, rel=0.05)

    @pytest.mark.slow
    def test_cells_are_independent(self, mc_params):
        spec = VariationSpec(fields=["d"])
        pairs = np.array([
            [sample_params(mc_params, spec, cell_rng(0, t, 0, j)).d for j in range(2)]
            for t in range(5000)
        ])
        assert abs(np.corrcoef(pairs[:, 0], pairs[:, 1])[0, 1]) < 0.05

class TestMonteCarlo:
    def test_requires_references(self, run_config):
        mixtures, _ = mixed_pair(32)
        with pytest.raises(NoReferenceError):
            run_mc(mixtures, None, run_config)

    def test_zero_sigma_reproduces_nominal(self, run_config):
        mixtures, sources = mixed_pair(32)
        cfg = with_variation(run_config, trials=1, sigma_fraction=0.0)
        report = run_mc(mixtures, sources, cfg, [Algorithm.FASTICA])
        [outcome] = report.trials
        assert outcome.status == "ok"
        assert outcome.improvements == report.nominal[Algorithm.FASTICA]
        for row in report.summary_rows():
            assert row['delta_vs_nominal'] == 0.0
            assert row['trials_ok'] == 1

    def test_rows(self, run_config):
        mixtures, sources = mixed_pair(32)
        cfg = with_variation(run_config, trials=2)
        report = run_mc(mixtures, sources, cfg, [Algorithm.FASTICA])
        assert [(r['trial'], r['algorithm']) for r in report.trial_rows()] == [(0, "fastica"), (1, "fastica")]
        assert [r['metric'] for r in report.summary_rows()] == ["ssim", "gsm", "psnr", "mse"]

    def test_threads_match_sequential(self, run_config):
        mixtures, sources = mixed_pair(32)
        cfg = with_variation(run_config, trials=3)
        sequential = run_mc(mixtures, sources, cfg, [Algorithm.FASTICA])
        threaded = run_mc(mixtures, sources, cfg.model_copy(update={'workers': 3}), [Algorithm.FASTICA])
        assert threaded.trial_rows() == sequential.trial_rows()

    @pytest.mark.slow
    def test_fastica_tolerates_three_percent_variation(self, run_config):
        mixtures, sources = mixed_pair(64)
        cfg = with_variation(run_config.model_copy(update={'image_size': 64}), trials=20, sigma_fraction=0.03)
        report = run_mc(mixtures, sources, cfg, [Algorithm.FASTICA])
        for row in report.summary_rows():
            assert row['trials_ok'] == 20
            assert abs(row['delta_vs_nominal']) <= 5.0

    def test_shared_profile_matches_compare(self, run_config):
        mixtures, sources = mixed_pair(32)
        cfg = with_variation(run_config.model_copy(update={'mc_profile': run_config.device_profile}),
                             trials=1, sigma_fraction=0.0)
        report = run_mc(mixtures, sources, cfg)
        rows = compare(mixtures, sources, cfg).improvement_rows()
        for row, algorithm in zip(rows, Algorithm):
            [outcome] = [t for t in report.trials if t.algorithm is algorithm]
            assert outcome.status == "ok"
            for metric in METRIC_NAMES:
                assert outcome.improvements[metric] == row[f"{metric}_impr"]

    @pytest.mark.parametrize("error", [
        np.linalg.LinAlgError("singular matrix"),
        ValueError("array must not contain infs or NaNs"),
        FloatingPointError("overflow encountered"),
    ])
    def test_numerical_failures_are_recorded(self, run_config, monkeypatch, error):
        mixtures, sources = mixed_pair(32)

        def failing_on_perturbed_arrays(*args, cell_params=None, **kwargs):
            if cell_params is not None:
                raise error
            return run_pipeline(*args, **kwargs)

        monkeypatch.setattr(variability, "run_pipeline", failing_on_perturbed_arrays)
        report = run_mc(mixtures, sources, with_variation(run_config, trials=2), [Algorithm.FASTICA])
        assert [t.status.startswith("failed:") for t in report.trials] == [True, True]
        assert all(not t.converged for t in report.trials)
        assert all(row['trials_ok'] == 0 for row in report.summary_rows())

    def test_sampling_failures_are_recorded(self, run_config, monkeypatch):
        mixtures, sources = mixed_pair(32)

        def failing_sampler(*args, **kwargs):
            raise FloatingPointError("invalid value encountered")

        monkeypatch.setattr(variability, "sample_crossbar_params", failing_sampler)
        report = run_mc(mixtures, sources, with_variation(run_config, trials=1))
        assert [(t.algorithm, t.status) for t in report.trials] == [
            (Algorithm.ACY, "failed: invalid value encountered"),
            (Algorithm.FASTICA, "failed: invalid value encountered"),
        ]
