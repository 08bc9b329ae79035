"""Error budget of the trace-estimated fidelity.

Two independent noise sources enter a finite run: the scatter of
single-state expectation values around the exact trace (finite-average
error, shrinking as 1/sqrt(m)), and the fluctuation of the exact trace of
one particular chain around the ensemble-averaged curve (intrinsic
error, shrinking only with the Hilbert-space dimension).  The total is
read off the imaginary part of the estimated amplitude, which vanishes
for the ensemble average at all times, so

    sigma_total^2 = sigma_intrinsic^2 + sigma_finite_average^2 / m.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .floquet import FidelitySeries

__all__ = [
    "ErrorBudget",
    "finite_average_sigma",
    "scatter_vs_time",
    "total_sigma_from_imaginary",
    "intrinsic_sigma",
    "transient_end",
    "error_budget",
]


@dataclass
class ErrorBudget:
    sigma_fa: float
    sigma_total: float
    sigma_intrinsic: float
    m: int
    transient_cutoff: int
    intrinsic_truncated: bool = False  # discriminant clipped at zero


class IntrinsicSigma(NamedTuple):
    value: float
    truncated: bool


def scatter_vs_time(samples: np.ndarray) -> np.ndarray:
    """Per-time std across states of <psi_j|M_t|psi_j> (complex modulus).

    Sample standard deviation (ddof=1) of the complex values: the mean
    squared modulus of deviations from the per-time mean.
    """
    m = samples.shape[0]
    if m < 2:
        raise ValueError("need samples from at least two states")
    dev = samples - samples.mean(axis=0, keepdims=True)
    return np.sqrt(np.sum(np.abs(dev) ** 2, axis=0) / (m - 1))


def finite_average_sigma(samples: np.ndarray, cutoff: int) -> float:
    """Stationary finite-average scatter: per-time std averaged over t > cutoff."""
    scatter = scatter_vs_time(samples)
    if cutoff >= len(scatter) - 1:
        raise ValueError("cutoff leaves no samples beyond the transient")
    return float(scatter[cutoff + 1 :].mean())


def total_sigma_from_imaginary(f: np.ndarray, cutoff: int) -> float:
    """Total deviation from the RMS of Im f(t) beyond the transient.

    The ensemble-averaged amplitude is real at all times, so fluctuations
    are measured about zero rather than about the sample mean.
    """
    f = np.asarray(f)
    if cutoff >= len(f) - 1:
        raise ValueError("cutoff leaves no samples beyond the transient")
    return float(np.sqrt(np.mean(f.imag[cutoff + 1 :] ** 2)))


def intrinsic_sigma(sigma_total: float, sigma_fa: float, m: int) -> IntrinsicSigma:
    """sqrt(sigma_total^2 - sigma_fa^2/m), clipped at zero with a flag.

    A negative discriminant just means the finite-average term already
    accounts for the observed scatter within sampling noise.
    """
    if sigma_total < 0 or sigma_fa < 0:
        raise ValueError("sigma inputs must be >= 0")
    disc = sigma_total**2 - sigma_fa**2 / m
    if disc < 0:
        return IntrinsicSigma(0.0, True)
    return IntrinsicSigma(float(np.sqrt(disc)), False)


def transient_end(scatter: np.ndarray, frac: float = 0.8) -> int:
    """First time at which the scatter reaches ``frac`` of its late plateau.

    The per-time scatter starts at zero for normalized initial states and
    grows to a stationary value; this locates the end of that transient.
    """
    plateau = np.median(scatter[len(scatter) // 2 :])
    above = np.nonzero(scatter >= frac * plateau)[0]
    return int(above[0]) if len(above) else len(scatter) - 1


def error_budget(series: FidelitySeries, cutoff: int | None = None) -> ErrorBudget:
    """Assemble the full error budget of a trace-fidelity run.

    The default transient cutoff is half the Heisenberg time: decay and
    scatter have both reached their stationary regime well before that at
    the perturbation strengths of interest.
    """
    if cutoff is None:
        cutoff = int(series.t_heis / 2)
    # cutoff is in time steps; samples may be recorded on a stride grid
    idx = int(np.searchsorted(series.t_steps, cutoff))
    idx = min(idx, len(series.t_steps) - 2)
    sigma_fa = finite_average_sigma(series.samples, idx)
    sigma_total = total_sigma_from_imaginary(series.f, idx)
    intr = intrinsic_sigma(sigma_total, sigma_fa, series.m)
    return ErrorBudget(
        sigma_fa=sigma_fa,
        sigma_total=sigma_total,
        sigma_intrinsic=intr.value,
        m=series.m,
        transient_cutoff=int(series.t_steps[idx]),
        intrinsic_truncated=intr.truncated,
    )
