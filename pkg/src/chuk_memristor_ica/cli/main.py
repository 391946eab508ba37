#!/usr/bin/env python3
# chuk_memristor_ica/cli/main.py
"""
Memristor ICA CLI

Command-line driver for the crossbar ICA simulator: mix images, separate
them with ACY or FastICA on an ideal or memristive weight store, compare
all four pipelines, run the device demo and the Monte Carlo study.
"""

import functools
import logging
import sys
from contextlib import contextmanager

import click

from .. import __version__
from ..config.loader import apply_overrides, load_config
from ..core.base import (
    Algorithm,
    BackendKind,
    ConfigError,
    ImageError,
    NoReferenceError,
)
from ..core.experiment_manager import ExperimentManager

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_CONFIG = 3
EXIT_IO = 4
EXIT_NOT_CONVERGED = 5
EXIT_INTERRUPTED = 130

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

def exit_code_for(error: Exception) -> int:
    if isinstance(error, (ConfigError, NoReferenceError)):
        return EXIT_CONFIG
    if isinstance(error, (OSError, ImageError)):
        return EXIT_IO
    return EXIT_UNEXPECTED

@contextmanager
def command_errors(action: str):
    """Report a failed command on stderr and exit with its code."""
    try:
        yield
    except Exception as e:
        click.echo(f"❌ {action} failed: {e}", err=True)
        sys.exit(exit_code_for(e))

def common_options(func):
    """--config, --seed, --out, --paper-scale and --verbose for every command."""
    @click.option('--config', 'config_path', type=click.Path(dir_okay=False), help='JSON run configuration')
    @click.option('--seed', type=int, help='Master seed (overrides the config)')
    @click.option('--out', 'output_dir', type=click.Path(file_okay=False), help='Output directory')
    @click.option('--paper-scale', is_flag=True, help='Use 512x512 synthetic images')
    @click.option('--verbose', '-v', is_flag=True, help='Debug logging')
    @functools.wraps(func)
    def wrapper(config_path, seed, output_dir, paper_scale, verbose, **kwargs):
        with command_errors("Configuration"):
            cfg = apply_overrides(load_config(config_path), seed=seed, output_dir=output_dir,
                                  paper_scale=paper_scale)
            level = logging.DEBUG if verbose else getattr(logging, cfg.log_level)
            logging.basicConfig(level=level, format=LOG_FORMAT)
            logging.getLogger("chuk_memristor_ica").setLevel(level)
            manager = ExperimentManager(cfg)
        return func(manager, **kwargs)
    return wrapper

ALGORITHM_CHOICE = click.Choice([a.value for a in Algorithm])
BACKEND_CHOICE = click.Choice([b.value for b in BackendKind])

def _fmt(value) -> str:
    return "n/a" if value is None else f"{value:+.4f}%"

@click.group()
@click.version_option(version=__version__)
def cli():
    """Memristor crossbar ICA simulator - blind image separation on VTEAM devices."""
    pass

@cli.command()
@click.argument('sources', nargs=-1, type=click.Path(dir_okay=False))
@common_options
def mix(manager: ExperimentManager, sources):
    """Mix source images (synthetic pair if none given)."""
    with command_errors("Mixing"):
        paths, record = manager.mix(list(sources) or None)
    for path in paths:
        click.echo(f"✅ Wrote {path}")
    click.echo(f"   Rescale: scale={record.scale:.6f} offset={record.offset:.6f}")

@cli.command()
@click.argument('mixtures', nargs=-1, required=True, type=click.Path(dir_okay=False))
@click.option('--algorithm', type=ALGORITHM_CHOICE, default=Algorithm.FASTICA.value, show_default=True)
@click.option('--backend', type=BACKEND_CHOICE, default=BackendKind.IDEAL.value, show_default=True)
@click.option('--originals', multiple=True, type=click.Path(dir_okay=False),
              help='Original image (repeat once per mixture) for alignment and metrics')
@common_options
def separate(manager: ExperimentManager, mixtures, algorithm, backend, originals):
    """Separate mixture images with one algorithm/backend pair."""
    with command_errors("Separation"):
        result = manager.separate(list(mixtures), Algorithm(algorithm), BackendKind(backend),
                                  list(originals) or None)
    click.echo(f"✅ {result.name}: {result.ica.iterations} iterations")
    for report in result.reports:
        psnr = "identical" if report.psnr_db is None else f"{report.psnr_db:.2f} dB"
        click.echo(f"   {report.image}: SSIM {report.ssim:.4f}  GSM {report.gsm:.4f}  "
                   f"PSNR {psnr}  MSE {report.mse:.4f}")
    if not result.ica.converged:
        click.echo(f"⚠️  {result.name} did not converge within the iteration budget", err=True)
        sys.exit(EXIT_NOT_CONVERGED)

@cli.command()
@click.argument('sources', nargs=-1, type=click.Path(dir_okay=False))
@common_options
def compare(manager: ExperimentManager, sources):
    """Compare software and memristive pipelines for both algorithms."""
    with command_errors("Comparison"):
        report = manager.compare(list(sources) or None)
    click.echo("📊 Improvement of the memristive pipeline over software:")
    for row in report.improvement_rows():
        click.echo(f"   {row['algorithm']:8s} SSIM {_fmt(row['ssim_impr'])}  GSM {_fmt(row['gsm_impr'])}  "
                   f"PSNR {_fmt(row['psnr_impr'])}  MSE {_fmt(row['mse_impr'])}  [{row['status']}]")
        if not row['converged']:
            click.echo(f"   ⚠️  {row['algorithm']} did not converge in at least one pipeline")
    click.echo(f"✅ Results in {manager.writer.output_dir}")

@cli.command('device-demo')
@common_options
def device_demo(manager: ExperimentManager):
    """Trace resistance and weight under alternating write pulses."""
    with command_errors("Device demo"):
        trace = manager.device_demo()
    click.echo(f"✅ {len(trace)} samples written to {manager.writer.output_dir / 'device_demo.csv'}")
    for block in manager.demo_blocks(trace):
        click.echo(f"   {block['start_ns']:5d}-{block['end_ns']:<5d} ns: "
                   f"R {block['first_ohm']:.4g} -> {block['last_ohm']:.4g} ohm")

@cli.command()
@click.argument('sources', nargs=-1, type=click.Path(dir_okay=False))
@click.option('--trials', type=click.IntRange(min=1), help='Number of trials (overrides the config)')
@click.option('--sigma', type=click.FloatRange(0.0, 0.3, max_open=True),
              help='Standard deviation as a fraction of the mean')
@click.option('--workers', type=click.IntRange(min=1), help='Threads for the trials')
@common_options
def mc(manager: ExperimentManager, sources, trials, sigma, workers):
    """Monte Carlo study of device-to-device variation."""
    variation = {k: v for k, v in (('trials', trials), ('sigma_fraction', sigma)) if v is not None}
    update = {'variation': manager.cfg.variation.model_copy(update=variation)} if variation else {}
    if workers is not None:
        update['workers'] = workers
    if update:
        # rebuilt so the provenance hash covers the overrides
        manager = ExperimentManager(manager.cfg.model_copy(update=update))
    with command_errors("Monte Carlo"):
        report = manager.monte_carlo(list(sources) or None)
    click.echo(f"📊 {report.spec.trials} trials at sigma {report.spec.sigma_fraction:.1%}:")
    for row in report.summary_rows():
        click.echo(f"   {row['algorithm']:8s} {row['metric']:5s} nominal {_fmt(row['nominal_impr'])}  "
                   f"mean {_fmt(row['mean_impr'])}  ({row['trials_ok']} ok)")
    click.echo(f"✅ Results in {manager.writer.output_dir}")

def main():
    """Main CLI entry point."""
    try:
        cli()
    except KeyboardInterrupt:
        click.echo("\n\n👋 Interrupted by user")
        sys.exit(EXIT_INTERRUPTED)
    except Exception as e:
        click.echo(f"\n❌ Unexpected error: {e}", err=True)
        sys.exit(EXIT_UNEXPECTED)

if __name__ == "__main__":
    main()
