#!/usr/bin/env python3
# chuk_memristor_ica/core/experiment_manager.py
"""
Experiment Manager for the memristor ICA simulator

Runs the user-facing experiments (mixing, separation, four-way comparison,
device demo, Monte Carlo study) from one RunConfig and writes every result
through a single ResultsWriter.
"""

import logging
from dataclasses import asdict
from pathlib import Path
from typing import Optional

from ..config.loader import config_hash
from ..config.models import RunConfig
from ..devices.memristor import NS, MemristorState, TraceSample, demo_schedule, run_schedule, trace_segment
from .base import Algorithm, BackendKind, MixingError
from .imaging import GrayImage, MixRecord, load_pgm, mix, quantize, synthetic_sources
from .pipeline import ComparisonReport, PipelineResult, compare, run_pipeline
from .results_writer import ResultsWriter
from .variability import McReport, run_mc

QUALITY_COLUMNS = ['pipeline', 'image', 'mse', 'psnr_db', 'ssim', 'gsm']
IMPROVEMENT_COLUMNS = ['algorithm', 'ssim_impr', 'gsm_impr', 'psnr_impr', 'mse_impr', 'converged', 'status']
TRACE_COLUMNS = ['metric', 'component', 'iteration', 'value']
CONVERGENCE_COLUMNS = ['pipeline', 'converged', 'iterations', 'clipped_writes']
CELL_TRACE_COLUMNS = ['cycle', 'row', 'col', 'weight', 'resistance_ohm', 'charge_c', 'y']
DEMO_COLUMNS = ['time_s', 'resistance_ohm', 'weight']
DEMO_PROFILE = "demo"
DEMO_BLOCK_NS = 500

class ExperimentManager:
    """
    Runs experiments described by a RunConfig.
    Source images come from explicit paths, ``cfg.sources`` or the
    synthetic pair, in that order of preference.
    """

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.logger = logging.getLogger(__name__)
        self.writer = ResultsWriter(cfg.output_dir, config_hash(cfg), cfg.seed)

    # ═══════════════════════════════════════════════════════════════════════
    # INPUTS
    # ═══════════════════════════════════════════════════════════════════════

    def load_sources(self, paths: Optional[list[str]] = None) -> list[GrayImage]:
        paths = paths or self.cfg.sources
        if paths:
            return [load_pgm(p) for p in paths]
        self.logger.info("Using the synthetic %dx%d source pair", self.cfg.image_size, self.cfg.image_size)
        return synthetic_sources(self.cfg.image_size)

    def make_mixtures(self, sources: list[GrayImage]) -> tuple[list[GrayImage], MixRecord]:
        """Mix and round to 8-bit levels, exactly what the mixture files contain."""
        if len(sources) != len(self.cfg.mixing_matrix):
            raise MixingError(f"{len(sources)} sources for a {len(self.cfg.mixing_matrix)}-channel mixing matrix")
        mixtures, record = mix(sources, self.cfg.mixing_matrix)
        return [quantize(m) for m in mixtures], record

    # ═══════════════════════════════════════════════════════════════════════
    # COMMANDS
    # ═══════════════════════════════════════════════════════════════════════

    def mix(self, source_paths: Optional[list[str]] = None) -> tuple[list[Path], MixRecord]:
        """Write ``mixture_<k>.pgm`` and the mixing record."""
        sources = self.load_sources(source_paths)
        mixtures, record = self.make_mixtures(sources)
        paths = [self.writer.write_image(f"mixture_{k}", m) for k, m in enumerate(mixtures)]
        self.writer.write_table("mix_record", record.to_rows(), ['entry', 'value'])
        self.logger.info("Mixed %d images (scale %.6f, offset %.6f)", len(sources), record.scale, record.offset)
        return paths, record

    def separate(self, mixture_paths: list[str], algorithm: Algorithm, backend: BackendKind,
                 original_paths: Optional[list[str]] = None) -> PipelineResult:
        mixtures = [load_pgm(p) for p in mixture_paths]
        references = [load_pgm(p) for p in original_paths] if original_paths else None
        result = run_pipeline(mixtures, references, algorithm, backend, self.cfg)
        self._write_pipeline(result)
        return result

    def compare(self, source_paths: Optional[list[str]] = None) -> ComparisonReport:
        """All four pipelines on one mixed pair, with the improvement table."""
        sources = self.load_sources(source_paths)
        mixtures, record = self.make_mixtures(sources)
        self.writer.write_table("mix_record", record.to_rows(), ['entry', 'value'])
        report = compare(mixtures, sources, self.cfg)
        for result in report.results.values():
            self._write_pipeline(result)
        self.writer.write_table("quality", report.quality_rows(), QUALITY_COLUMNS)
        self.writer.write_table("improvements", report.improvement_rows(), IMPROVEMENT_COLUMNS)
        return report

    def device_demo(self) -> list[TraceSample]:
        """Resistance and weight of one device under the alternating write/read schedule."""
        params = self.cfg.device(DEMO_PROFILE if DEMO_PROFILE in self.cfg.profiles else None)
        trace = run_schedule(MemristorState(0.0), demo_schedule(), params)
        self.writer.write_table("device_demo", [asdict(s) for s in trace], DEMO_COLUMNS)
        return trace

    @staticmethod
    def demo_blocks(trace: list[TraceSample], block_ns: int = DEMO_BLOCK_NS) -> list[dict]:
        """Resistance at the start and end of every ``block_ns`` window of a demo trace."""
        blocks = []
        k = 0
        while k * block_ns * NS < trace[-1].time_s:
            start_ns, end_ns = k * block_ns, (k + 1) * block_ns
            segment = trace_segment(trace, start_ns * NS, end_ns * NS)
            if segment:
                blocks.append({
                    'start_ns': start_ns,
                    'end_ns': end_ns,
                    'first_ohm': segment[0].resistance_ohm,
                    'last_ohm': segment[-1].resistance_ohm,
                })
            k += 1
        return blocks

    def monte_carlo(self, source_paths: Optional[list[str]] = None,
                    algorithms: Optional[list[Algorithm]] = None) -> McReport:
        sources = self.load_sources(source_paths)
        mixtures, _ = self.make_mixtures(sources)
        report = run_mc(mixtures, sources, self.cfg, algorithms)
        self.writer.write_table(
            "mc_trials", report.trial_rows(),
            ['trial', 'algorithm', 'ssim_impr', 'gsm_impr', 'psnr_impr', 'mse_impr', 'converged', 'status'],
        )
        self.writer.write_table(
            "mc_summary", report.summary_rows(),
            ['algorithm', 'metric', 'nominal_impr', 'mean_impr', 'std_impr', 'delta_vs_nominal', 'trials_ok'],
        )
        return report

    # ═══════════════════════════════════════════════════════════════════════
    # OUTPUTS
    # ═══════════════════════════════════════════════════════════════════════

    def _write_pipeline(self, result: PipelineResult) -> None:
        name = result.name
        for k, image in enumerate(result.images):
            self.writer.write_image(f"separated_{name}_{k}", image)
        trace = result.ica.trace.subsample(self.cfg.trace_every)
        self.writer.write_table(
            f"trace_{name}",
            [{'metric': trace.metric, **asdict(row)} for row in trace.rows],
            TRACE_COLUMNS,
        )
        if result.alignment:
            self.writer.write_table(f"alignment_{name}", [asdict(a) for a in result.alignment])
        if result.reports:
            rows = [r.as_row() for r in result.reports] + [result.summary.as_row()]
            self.writer.write_table(f"metrics_{name}", rows, QUALITY_COLUMNS)
        ica = result.ica
        self.writer.write_table(
            f"convergence_{name}",
            [{'pipeline': name, 'converged': ica.converged, 'iterations': ica.iterations,
              'clipped_writes': ica.clipped_writes}],
            CONVERGENCE_COLUMNS,
        )
        if ica.clipped_writes:
            self.logger.warning("%s clipped weights to the device range in %d write(s)", name, ica.clipped_writes)
        if result.cell_trace:
            self.writer.write_table(f"cells_{name}", result.cell_trace, CELL_TRACE_COLUMNS)
        if result.crossbar is not None:
            self.writer.write_table(f"weights_{result.algorithm.value}", result.crossbar.weight_table(),
                                    ['row', 'col', 'weight', 'state_weight', 'resistance_ohm'])
        if not result.ica.converged:
            self.logger.warning("%s did not converge; outputs written anyway", name)
