#!/usr/bin/env python3
# chuk_memristor_ica/core/ica.py
"""
Independent component analysis on a weight backend.

Two learning rules are provided:

- ACY: natural-gradient updates ΔW = μ (I - E[g(y) yᵀ]) W with a degree-11
  odd polynomial contrast, run on the raw (centered) mixtures;
- FastICA: fixed-point iteration with g(y) = y exp(-y²/2) on whitened data,
  one component at a time with Gram-Schmidt deflation.

Centering and whitening are digital pre-processing. The weights live on a
:class:`~chuk_memristor_ica.core.backends.WeightBackend`, and every
iteration writes them there and reads them back, so crossbar storage errors
flow into the learning loop exactly as they would in hardware.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from ..config.models import IcaConfig
from .backends import WeightBackend
from .base import (
    Algorithm,
    ConvergenceError,
    ConvergenceTrace,
    DegeneracyError,
    DimensionError,
    IcaError,
    SignalMatrix,
    SignalRole,
)

logger = logging.getLogger(__name__)

# Relative size below which an eigenvalue or a residual row counts as zero.
DEGENERACY_TOL = 1e-12
CENTERING_TOL = 1e-8

@dataclass
class IcaResult:
    """Outcome of an ICA run."""
    algorithm: Algorithm
    weights: np.ndarray            # as read back from the backend, in the algorithm's own coordinates
    unmixing: np.ndarray           # maps centered mixtures to outputs
    outputs: SignalMatrix
    means: np.ndarray
    converged: bool
    iterations: int
    trace: ConvergenceTrace
    clipped_writes: int = 0
    extra: dict = field(default_factory=dict)

# ═══════════════════════════════════════════════════════════════════════════
# PRE-PROCESSING
# ═══════════════════════════════════════════════════════════════════════════

def center(x: SignalMatrix) -> tuple[SignalMatrix, np.ndarray]:
    """Remove the per-channel mean; returns the centered signals and the means."""
    if x.samples < 2:
        raise IcaError(f"Centering needs at least 2 samples, got {x.samples}")
    means = x.data.mean(axis=1)
    return x.with_data(x.data - means[:, None]), means

def whiten(x: SignalMatrix) -> tuple[SignalMatrix, np.ndarray]:
    """
    PCA whitening of centered data.

    Returns ``(v, K)`` with ``v = K x``, ``K = Λ^{-1/2} Eᵀ`` from the
    eigendecomposition of the sample covariance ``x xᵀ / N``.
    """
    data = x.data
    peak = float(np.abs(data).max()) or 1.0
    if np.any(np.abs(data.mean(axis=1)) > CENTERING_TOL * peak):
        raise IcaError("Whitening expects centered data; call center() first")

    cov = data @ data.T / x.samples
    eigvals, eigvecs = np.linalg.eigh(cov)
    if eigvals.max() <= 0 or eigvals.min() <= DEGENERACY_TOL * eigvals.max():
        raise DegeneracyError(f"Singular channel covariance (eigenvalues {eigvals})")

    transform = (eigvecs / np.sqrt(eigvals)).T
    return x.with_data(transform @ data, SignalRole.WHITENED), transform

# ═══════════════════════════════════════════════════════════════════════════
# CONTRAST FUNCTIONS
# ═══════════════════════════════════════════════════════════════════════════

def acy_activation(y):
    """g(y) = 3/4 y^11 + 25/4 y^9 - 14/3 y^7 - 47/4 y^5 + 29/4 y^3."""
    y = np.asarray(y, dtype=np.float64)
    y2 = y * y
    # Horner form in y²; odd in y exactly
    poly = 29 / 4 + y2 * (-47 / 4 + y2 * (-14 / 3 + y2 * (25 / 4 + y2 * (3 / 4))))
    return y * y2 * poly

def fastica_g(y):
    """g(y) = y exp(-y²/2)."""
    y = np.asarray(y, dtype=np.float64)
    return y * np.exp(-y * y / 2.0)

def fastica_gprime(y):
    """g'(y) = (1 - y²) exp(-y²/2)."""
    y = np.asarray(y, dtype=np.float64)
    y2 = y * y
    return (1.0 - y2) * np.exp(-y2 / 2.0)

# ═══════════════════════════════════════════════════════════════════════════
# UPDATE RULES
# ═══════════════════════════════════════════════════════════════════════════

def unit_variance(y: np.ndarray) -> np.ndarray:
    """Each row divided by its standard deviation over the batch (constant rows unchanged)."""
    y = np.atleast_2d(np.asarray(y, dtype=np.float64))
    scales = y.std(axis=1)
    scales[scales == 0.0] = 1.0
    return y / scales[:, None]

def _acy_direction(y: np.ndarray, activation_input: np.ndarray | None = None) -> np.ndarray:
    # I - E[g(u) yᵀ] over the batch, u = y unless given
    u = y if activation_input is None else activation_input
    return np.eye(y.shape[0]) - acy_activation(u) @ y.T / y.shape[1]

def acy_update(weights: np.ndarray, y, mu: float) -> np.ndarray:
    """ΔW = μ (I - E[g(y) yᵀ]) W, the expectation being the batch mean."""
    weights = np.atleast_2d(np.asarray(weights, dtype=np.float64))
    y = np.atleast_2d(np.asarray(y.data if isinstance(y, SignalMatrix) else y, dtype=np.float64))
    if y.shape[0] != weights.shape[0]:
        raise DimensionError(f"{y.shape[0]} outputs for a weight matrix with {weights.shape[0]} rows")
    return mu * (_acy_direction(y) @ weights)

def fastica_step(w: np.ndarray, v, projection: np.ndarray | None = None) -> np.ndarray:
    """
    One fixed-point iteration w+ = E[v g(wᵀv)] - E[g'(wᵀv)] w, normalized.

    ``projection`` may carry a precomputed wᵀv (e.g. read from a crossbar);
    otherwise it is computed here.
    """
    v = np.atleast_2d(np.asarray(v.data if isinstance(v, SignalMatrix) else v, dtype=np.float64))
    w = np.asarray(w, dtype=np.float64)
    if w.shape != (v.shape[0],):
        raise DimensionError(f"Weight vector {w.shape} does not match {v.shape[0]} channels")
    u = w @ v if projection is None else np.asarray(projection, dtype=np.float64)
    w_next = (v * fastica_g(u)).mean(axis=1) - fastica_gprime(u).mean() * w
    norm = float(np.linalg.norm(w_next))
    if norm == 0.0 or not np.isfinite(norm):
        raise ConvergenceError("Fixed-point update has zero norm")
    return w_next / norm

def decorrelate(weights: np.ndarray, k: int) -> np.ndarray:
    """Gram-Schmidt row ``k`` against rows ``0..k-1`` and renormalize it."""
    weights = np.array(weights, dtype=np.float64, copy=True)
    row = weights[k].copy()
    original = float(np.linalg.norm(row))
    # two passes keep the rows orthonormal to rounding level
    for _ in range(2):
        for j in range(k):
            row -= (row @ weights[j]) * weights[j]
    norm = float(np.linalg.norm(row))
    if original == 0.0 or norm <= 1e-10 * original:
        raise DegeneracyError(f"Row {k} lies in the span of the previous rows")
    weights[k] = row / norm
    return weights

# ═══════════════════════════════════════════════════════════════════════════
# DRIVERS
# ═══════════════════════════════════════════════════════════════════════════

def _batch_slices(samples: int, batch_size: int | None) -> list[slice]:
    if not batch_size or batch_size >= samples:
        return [slice(0, samples)]
    return [slice(start, min(start + batch_size, samples)) for start in range(0, samples, batch_size)]

def _check_backend(backend: WeightBackend, n: int) -> None:
    shape = getattr(backend, "shape", (n, n))
    if tuple(shape) != (n, n):
        raise DimensionError(f"Backend holds {shape} weights, data has {n} channels")

def run_acy(x: SignalMatrix, cfg: IcaConfig, backend: WeightBackend) -> IcaResult:
    """
    ACY natural-gradient ICA.

    The mixtures are centered and each channel is divided by its standard
    deviation, so the start point W = I gives unit-variance outputs. On
    every batch the contrast is evaluated on the outputs rescaled to unit
    variance, u = y / std(y), and the update direction is I - E[g(u) yᵀ].
    The step is μ_k = min(μ, max_step / ‖I - E[g(u) yᵀ]‖_F).
    """
    n = x.channels
    _check_backend(backend, n)
    centered, means = center(x)
    scales = centered.data.std(axis=1)
    if np.any(scales == 0.0):
        raise DegeneracyError("A mixture channel is constant")
    data = centered.data / scales[:, None]
    batches = _batch_slices(x.samples, cfg.batch_size)

    trace = ConvergenceTrace(metric="delta_w_frobenius")
    backend.write_weights(np.eye(n))
    converged = False
    iterations = 0
    for it in range(cfg.max_iters):
        weights = backend.read_weights()
        y = backend.forward(data[:, batches[it % len(batches)]])
        direction = _acy_direction(y, unit_variance(y))
        size = float(np.linalg.norm(direction))
        mu_k = cfg.learning_rate if size == 0.0 else min(cfg.learning_rate, cfg.max_step / size)
        delta = mu_k * (direction @ weights)
        step = float(np.linalg.norm(delta))
        trace.add(0, it, step)
        iterations = it + 1
        logger.debug("ACY iteration %d: mu=%.3e |dW|=%.3e", it, mu_k, step)
        if step < cfg.tol:
            converged = True
            break
        backend.write_weights(weights + delta)

    if not converged:
        logger.warning("ACY did not converge in %d iterations (last |dW|=%.3e)",
                       cfg.max_iters, trace.rows[-1].value)
    weights = backend.read_weights()
    outputs = backend.forward(data)
    return IcaResult(
        algorithm=Algorithm.ACY,
        weights=weights,
        unmixing=weights / scales[None, :],
        outputs=SignalMatrix(outputs, SignalRole.OUTPUTS),
        means=means,
        converged=converged,
        iterations=iterations,
        trace=trace,
        clipped_writes=getattr(backend, "clipped", 0),
    )

def run_fastica(x: SignalMatrix, cfg: IcaConfig, backend: WeightBackend) -> IcaResult:
    """
    Deflationary FastICA.

    Every cycle stores the current weights on the backend, reads them back,
    and takes the projection wᵀv from the backend's forward pass. A
    component has converged when |w+ᵀ w| > 1 - tol.
    """
    n = x.channels
    _check_backend(backend, n)
    centered, means = center(x)
    v, transform = whiten(centered)

    rng = np.random.default_rng(cfg.seed)
    weights = rng.standard_normal((n, n))
    for k in range(n):
        weights = decorrelate(weights, k)

    trace = ConvergenceTrace(metric="abs_wt_wprev")
    converged_all = True
    iterations = 0
    for k in range(n):
        converged = False
        for it in range(cfg.max_iters):
            backend.write_weights(weights)
            stored = backend.read_weights()[k]
            projection = backend.forward(v.data)[k]
            weights[k] = fastica_step(stored, v, projection)
            weights = decorrelate(weights, k)
            similarity = abs(float(weights[k] @ stored)) / float(np.linalg.norm(stored))
            trace.add(k, it, similarity)
            iterations += 1
            logger.debug("FastICA component %d iteration %d: |w+ w|=%.12f", k, it, similarity)
            if similarity > 1.0 - cfg.tol:
                converged = True
                break
        if not converged:
            converged_all = False
            logger.warning("FastICA component %d did not converge in %d iterations", k, cfg.max_iters)

    backend.write_weights(weights)
    stored = backend.read_weights()
    outputs = backend.forward(v.data)
    return IcaResult(
        algorithm=Algorithm.FASTICA,
        weights=stored,
        unmixing=stored @ transform,
        outputs=SignalMatrix(outputs, SignalRole.OUTPUTS),
        means=means,
        converged=converged_all,
        iterations=iterations,
        trace=trace,
        clipped_writes=getattr(backend, "clipped", 0),
        extra={"whitening": transform},
    )

def run_ica(x: SignalMatrix, cfg: IcaConfig, backend: WeightBackend) -> IcaResult:
    """Dispatch on ``cfg.algorithm``."""
    if cfg.algorithm is Algorithm.ACY:
        return run_acy(x, cfg, backend)
    return run_fastica(x, cfg, backend)
