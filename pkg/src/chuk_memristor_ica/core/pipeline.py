#!/usr/bin/env python3
# chuk_memristor_ica/core/pipeline.py
"""
Separation pipeline: mixtures -> ICA on a weight backend -> aligned images
-> quality reports, and the four-way software/memristive comparison.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..config.models import CrossbarConfig, IcaConfig, MetricsConfig, RunConfig
from ..devices.crossbar import Crossbar
from ..devices.memristor import DeviceParams
from .backends import CrossbarBackend, IdealBackend, WeightBackend
from .base import Algorithm, BackendKind, NoReferenceError, SignalMatrix, SignalRole, SimulatorError
from .ica import IcaResult, run_ica
from .imaging import AlignmentRecord, GrayImage, align_outputs, flatten, rescale_to_range, unflatten
from .metrics import METRIC_NAMES, QualityReport, evaluate_pair, improvement_row, summarize

logger = logging.getLogger(__name__)

# Failures of one run that are recorded while the remaining runs continue.
RUN_ERRORS = (SimulatorError, np.linalg.LinAlgError, ValueError, ArithmeticError)

PIPELINES = [
    (Algorithm.ACY, BackendKind.IDEAL),
    (Algorithm.ACY, BackendKind.CROSSBAR),
    (Algorithm.FASTICA, BackendKind.IDEAL),
    (Algorithm.FASTICA, BackendKind.CROSSBAR),
]

def pipeline_name(algorithm: Algorithm, backend: BackendKind) -> str:
    return f"{algorithm.value}_{backend.value}"

@dataclass
class PipelineResult:
    """One separation run and its evaluation."""
    algorithm: Algorithm
    backend: BackendKind
    ica: IcaResult
    images: list[GrayImage]
    alignment: list[AlignmentRecord] = field(default_factory=list)
    reports: list[QualityReport] = field(default_factory=list)
    crossbar: Optional[Crossbar] = None
    cell_trace: list[dict] = field(default_factory=list)

    @property
    def name(self) -> str:
        return pipeline_name(self.algorithm, self.backend)

    @property
    def summary(self) -> Optional[QualityReport]:
        return summarize(self.reports, self.name) if self.reports else None

@dataclass
class ComparisonReport:
    """Outcome of the four pipelines on one experiment."""
    results: dict[str, PipelineResult] = field(default_factory=dict)
    failures: dict[str, str] = field(default_factory=dict)

    def quality_rows(self) -> list[dict]:
        rows = []
        for result in self.results.values():
            rows.extend(r.as_row() for r in result.reports)
            rows.append(result.summary.as_row())
        return rows

    def improvement_rows(self) -> list[dict]:
        rows = []
        for algorithm in Algorithm:
            memristive = pipeline_name(algorithm, BackendKind.CROSSBAR)
            software = pipeline_name(algorithm, BackendKind.IDEAL)
            failed = [name for name in (memristive, software) if name in self.failures]
            if failed:
                row = {'algorithm': algorithm.value, **{f"{m}_impr": None for m in METRIC_NAMES}}
                row['status'] = "failed: " + "; ".join(f"{n}: {self.failures[n]}" for n in failed)
            else:
                row = improvement_row(algorithm.value, self.results[memristive].summary,
                                      self.results[software].summary)
                row['status'] = "ok"
            row['converged'] = all(
                self.results[name].ica.converged for name in (memristive, software) if name in self.results
            )
            rows.append(row)
        return rows

    @property
    def converged(self) -> bool:
        return all(r.ica.converged for r in self.results.values())

# ═══════════════════════════════════════════════════════════════════════════
# BUILDING BLOCKS
# ═══════════════════════════════════════════════════════════════════════════

def build_crossbar(n: int, nominal: DeviceParams, cfg: CrossbarConfig,
                   cell_params: list[list[DeviceParams]] | None = None) -> Crossbar:
    return Crossbar(
        rows=n,
        cols=n,
        nominal=nominal,
        cell_params=cell_params,
        v_read=cfg.v_read,
        v_write_pos=cfg.v_write_pos,
        v_write_neg=cfg.v_write_neg,
        t0=cfg.t0,
        verify_passes=cfg.verify_passes,
        verify_tol=cfg.verify_tol,
    )

def build_backend(kind: BackendKind, algorithm: Algorithm, n: int, nominal: DeviceParams,
                  cfg: CrossbarConfig, cell_params=None) -> WeightBackend:
    """Ideal store, or an n x n crossbar scaled for the algorithm's weight range."""
    if kind is BackendKind.IDEAL:
        return IdealBackend(n, n)
    scale = cfg.fastica_scale if algorithm is Algorithm.FASTICA else cfg.acy_scale
    return CrossbarBackend(build_crossbar(n, nominal, cfg, cell_params), scale=scale,
                           trace_sample=cfg.trace_sample)

def mixtures_to_signals(mixtures: list[GrayImage]) -> SignalMatrix:
    return SignalMatrix(np.stack([flatten(m) for m in mixtures]), SignalRole.MIXTURES)

def separate(mixtures: list[GrayImage], ica_cfg: IcaConfig, backend: WeightBackend) -> IcaResult:
    """Run ICA on flattened mixture images."""
    return run_ica(mixtures_to_signals(mixtures), ica_cfg, backend)

def evaluate(name: str, ica: IcaResult, shape: tuple[int, int],
             references: list[GrayImage] | None, metrics_cfg: MetricsConfig):
    """
    Turn ICA outputs into images. With references, outputs are aligned to
    them and scored; without, each output is stretched to [0, 255].
    """
    height, width = shape
    if not references:
        images = [unflatten(rescale_to_range(row), width, height) for row in ica.outputs.data]
        return images, [], []
    aligned, alignment = align_outputs(ica.outputs.data, np.stack([flatten(r) for r in references]))
    images = [unflatten(row, width, height) for row in aligned]
    reports = [
        evaluate_pair(name, f"source_{k}", image, reference, metrics_cfg)
        for k, (image, reference) in enumerate(zip(images, references))
    ]
    return images, alignment, reports

def run_pipeline(mixtures: list[GrayImage], references: list[GrayImage] | None,
                 algorithm: Algorithm, backend: BackendKind, cfg: RunConfig,
                 nominal: DeviceParams | None = None, cell_params=None) -> PipelineResult:
    """Separate ``mixtures`` with one algorithm/backend pair and evaluate the result."""
    n = len(mixtures)
    ica_cfg = cfg.ica_config(algorithm).model_copy(update={'backend': backend})
    weights = build_backend(backend, algorithm, n, nominal or cfg.device(), cfg.crossbar, cell_params)
    ica = separate(mixtures, ica_cfg, weights)
    name = pipeline_name(algorithm, backend)
    images, alignment, reports = evaluate(name, ica, mixtures[0].shape, references, cfg.metrics)
    logger.info("Pipeline %s finished after %d iterations (converged=%s)", name, ica.iterations, ica.converged)
    return PipelineResult(
        algorithm=algorithm,
        backend=backend,
        ica=ica,
        images=images,
        alignment=alignment,
        reports=reports,
        crossbar=getattr(weights, "crossbar", None),
        cell_trace=weights.cell_trace_rows() if isinstance(weights, CrossbarBackend) else [],
    )

def compare(mixtures: list[GrayImage], references: list[GrayImage] | None,
            cfg: RunConfig) -> ComparisonReport:
    """Run all four pipelines; a failing pipeline is recorded and the rest continue."""
    if not references:
        raise NoReferenceError("Comparing pipelines requires the original images")
    report = ComparisonReport()
    for algorithm, backend in PIPELINES:
        name = pipeline_name(algorithm, backend)
        try:
            report.results[name] = run_pipeline(mixtures, references, algorithm, backend, cfg)
        except RUN_ERRORS as e:
            logger.warning("Pipeline %s failed: %s", name, e)
            report.failures[name] = str(e)
    return report
