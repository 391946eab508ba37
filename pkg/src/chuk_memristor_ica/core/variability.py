#!/usr/bin/env python3
# chuk_memristor_ica/core/variability.py
"""
Monte Carlo study of device-to-device variation.

Each trial draws independent parameters for every crossbar cell, reruns the
memristive pipelines on the perturbed array and reports the improvement
over the software pipeline next to the unperturbed (nominal) figure.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from pydantic import ValidationError

from ..config.models import RunConfig, VariationSpec
from ..devices.memristor import DeviceParams
from .base import Algorithm, BackendKind, NoReferenceError, VariationSpecError
from .imaging import GrayImage
from .metrics import METRIC_NAMES, improvement_pct
from .pipeline import RUN_ERRORS, PipelineResult, run_pipeline

logger = logging.getLogger(__name__)

MAX_REJECTIONS = 1000

# ═══════════════════════════════════════════════════════════════════════════
# SAMPLING
# ═══════════════════════════════════════════════════════════════════════════

def sample_params(base: DeviceParams, spec: VariationSpec, rng: np.random.Generator) -> DeviceParams:
    """
    Draw each varied field from Normal(mean, sigma_fraction * mean).
    Draws that violate the device invariants are rejected and redrawn.
    """
    if spec.sigma_fraction == 0.0 and not spec.means:
        return base
    template = base.model_dump()
    for rejections in range(MAX_REJECTIONS):
        update = {}
        for name in spec.fields:
            mean = spec.means.get(name, getattr(base, name))
            update[name] = float(rng.normal(mean, spec.sigma_fraction * mean))
        try:
            return DeviceParams.model_validate({**template, **update})
        except ValidationError:
            logger.debug("Rejected draw %s (%d so far)", update, rejections + 1)
    raise VariationSpecError(f"{MAX_REJECTIONS} consecutive draws violated the device invariants")

def cell_rng(seed: int, trial: int, row: int, col: int) -> np.random.Generator:
    """Independent substream for one cell of one trial."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(trial, row, col)))

def sample_crossbar_params(base: DeviceParams, spec: VariationSpec, rows: int, cols: int,
                           trial: int) -> list[list[DeviceParams]]:
    return [
        [sample_params(base, spec, cell_rng(spec.seed, trial, i, j)) for j in range(cols)]
        for i in range(rows)
    ]

# ═══════════════════════════════════════════════════════════════════════════
# STUDY
# ═══════════════════════════════════════════════════════════════════════════

@dataclass
class TrialOutcome:
    trial: int
    algorithm: Algorithm
    improvements: dict[str, Optional[float]] = field(default_factory=dict)
    status: str = "ok"
    converged: bool = True

    def as_row(self) -> dict:
        row = {'trial': self.trial, 'algorithm': self.algorithm.value}
        row.update({f"{m}_impr": self.improvements.get(m) for m in METRIC_NAMES})
        row['converged'] = self.converged
        row['status'] = self.status
        return row

@dataclass
class McReport:
    spec: VariationSpec
    nominal: dict[Algorithm, dict[str, Optional[float]]] = field(default_factory=dict)
    trials: list[TrialOutcome] = field(default_factory=list)

    def trial_rows(self) -> list[dict]:
        return [t.as_row() for t in self.trials]

    def summary_rows(self) -> list[dict]:
        """Per algorithm and metric: nominal, trial mean/std and mean minus nominal."""
        rows = []
        for algorithm, nominal in self.nominal.items():
            outcomes = [t for t in self.trials if t.algorithm is algorithm and t.status == "ok"]
            for metric in METRIC_NAMES:
                values = [t.improvements[metric] for t in outcomes if t.improvements.get(metric) is not None]
                mean = float(np.mean(values)) if values else None
                reference = nominal.get(metric)
                rows.append({
                    'algorithm': algorithm.value,
                    'metric': metric,
                    'nominal_impr': reference,
                    'mean_impr': mean,
                    'std_impr': float(np.std(values)) if values else None,
                    'delta_vs_nominal': None if mean is None or reference is None else mean - reference,
                    'trials_ok': len(values),
                })
        return rows

def _run_trial(trial: int, mixtures, references, cfg: RunConfig, algorithms, software, nominal_params):
    n = len(mixtures)
    outcomes = []
    try:
        cells = sample_crossbar_params(nominal_params, cfg.variation, n, n, trial)
    except RUN_ERRORS as e:
        return [TrialOutcome(trial, a, status=f"failed: {e}", converged=False) for a in algorithms]
    for algorithm in algorithms:
        try:
            result = run_pipeline(mixtures, references, algorithm, BackendKind.CROSSBAR, cfg,
                                  nominal=nominal_params, cell_params=cells)
            outcomes.append(TrialOutcome(
                trial, algorithm,
                improvements=improvement_pct(result.summary, software[algorithm].summary),
                converged=result.ica.converged,
            ))
        except RUN_ERRORS as e:
            logger.warning("Monte Carlo trial %d (%s) failed: %s", trial, algorithm.value, e)
            outcomes.append(TrialOutcome(trial, algorithm, status=f"failed: {e}", converged=False))
    return outcomes

def run_mc(mixtures: list[GrayImage], references: list[GrayImage], cfg: RunConfig,
           algorithms: list[Algorithm] | None = None) -> McReport:
    """
    Software and nominal crossbar pipelines run once per algorithm; every
    trial reruns the crossbar pipeline on a freshly perturbed array. Trials
    may run on ``cfg.workers`` threads; the report is ordered by trial.
    """
    if not references:
        raise NoReferenceError("The Monte Carlo study needs the original images")
    algorithms = algorithms or list(Algorithm)
    spec = cfg.variation
    nominal_params = cfg.device(cfg.mc_profile)
    report = McReport(spec=spec)

    software: dict[Algorithm, PipelineResult] = {}
    for algorithm in algorithms:
        software[algorithm] = run_pipeline(mixtures, references, algorithm, BackendKind.IDEAL, cfg,
                                           nominal=nominal_params)
        nominal = run_pipeline(mixtures, references, algorithm, BackendKind.CROSSBAR, cfg,
                               nominal=nominal_params)
        report.nominal[algorithm] = improvement_pct(nominal.summary, software[algorithm].summary)

    def trial(t: int) -> list[TrialOutcome]:
        return _run_trial(t, mixtures, references, cfg, algorithms, software, nominal_params)

    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            batches = list(pool.map(trial, range(spec.trials)))
    else:
        batches = [trial(t) for t in range(spec.trials)]
    for outcomes in batches:
        report.trials.extend(outcomes)

    failed = sum(1 for t in report.trials if t.status != "ok")
    logger.info("Monte Carlo finished: %d trials, %d failed runs", spec.trials, failed)
    return report
