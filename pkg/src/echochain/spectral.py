"""Eigenphase statistics: spacing densities, ratio statistic, form factor.

Floquet eigenphases live on the unit circle with uniform mean density, so
unfolding is the trivial rescaling s_n = N (theta_{n+1} - theta_n) / 2 pi
including the wrap-around spacing; the unfolded mean is exactly 1 by
construction.  Reference curves come in two flavours: the Wigner surmises
in closed form, and Monte Carlo sampling of the circular ensembles for
statements the surmise gets visibly wrong.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "EigenphaseList",
    "SpacingHistogram",
    "FormFactorSeries",
    "eigenphases",
    "unfolded_spacings",
    "raw_spacings",
    "nns_density",
    "wigner_surmise",
    "mean_spacing_ratio",
    "spectral_form_factor",
    "form_factor_reference",
    "sample_cue_phases",
    "sample_coe_phases",
]


@dataclass
class EigenphaseList:
    """Sorted eigenphases of one unitary block."""

    phases: np.ndarray  # sorted, in [0, 2 pi)
    k: int | None = None

    @property
    def count(self) -> int:
        return len(self.phases)


@dataclass
class SpacingHistogram:
    """Normalized nearest-neighbour spacing density with surmise companions."""

    edges: np.ndarray
    density: np.ndarray
    surmise_b1: np.ndarray  # Wigner surmise at the bin centres, beta = 1
    surmise_b2: np.ndarray
    n_spacings: int

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])


@dataclass
class FormFactorSeries:
    tau: np.ndarray
    k: np.ndarray
    k_ref: np.ndarray
    window: float
    beta: int


def eigenphases(matrix: np.ndarray, k: int | None = None, unitarity_tol: float = 1e-10) -> EigenphaseList:
    """Sorted phases of the eigenvalues of a unitary matrix.

    Raises if the matrix is not unitary to within ``unitarity_tol`` (max
    deviation of U^dagger U from the identity).
    """
    n = matrix.shape[0]
    if matrix.ndim != 2 or matrix.shape[1] != n:
        raise ValueError("matrix must be square")
    defect = np.max(np.abs(matrix.conj().T @ matrix - np.eye(n)))
    if defect > unitarity_tol:
        raise ValueError(f"matrix is not unitary: max|U^H U - I| = {defect:.3e}")
    phases = np.sort(np.angle(np.linalg.eigvals(matrix)) % (2.0 * np.pi))
    return EigenphaseList(phases=phases, k=k)


def raw_spacings(e: EigenphaseList) -> np.ndarray:
    """Circular phase gaps including the wrap-around; N values summing to 2 pi."""
    if e.count < 2:
        raise ValueError("need at least two eigenphases")
    th = e.phases
    return np.diff(np.concatenate((th, [th[0] + 2.0 * np.pi])))


def unfolded_spacings(e: EigenphaseList) -> np.ndarray:
    """Spacings rescaled to unit mean: s_n = N (theta_{n+1} - theta_n) / 2 pi."""
    return raw_spacings(e) * (e.count / (2.0 * np.pi))


def wigner_surmise(s: np.ndarray, beta: int) -> np.ndarray:
    """Wigner surmise spacing density, beta = 1 (GOE) or 2 (GUE)."""
    s = np.asarray(s, dtype=float)
    if beta == 1:
        return (np.pi / 2.0) * s * np.exp(-np.pi * s**2 / 4.0)
    if beta == 2:
        return (32.0 / np.pi**2) * s**2 * np.exp(-4.0 * s**2 / np.pi)
    raise ValueError("beta must be 1 or 2")


def nns_density(
    spacings: np.ndarray | list[np.ndarray], bins: int = 50, s_max: float = 4.0
) -> SpacingHistogram:
    """Pooled nearest-neighbour spacing density over one or more sectors."""
    if isinstance(spacings, (list, tuple)):
        spacings = np.concatenate([np.asarray(s) for s in spacings])
    edges = np.linspace(0.0, s_max, bins + 1)
    density, _ = np.histogram(spacings, bins=edges, density=True)
    centers = 0.5 * (edges[:-1] + edges[1:])
    return SpacingHistogram(
        edges=edges,
        density=density,
        surmise_b1=wigner_surmise(centers, 1),
        surmise_b2=wigner_surmise(centers, 2),
        n_spacings=len(spacings),
    )


def mean_spacing_ratio(e: EigenphaseList) -> float:
    """<r> with r_n = min(s_n, s_{n+1}) / max(s_n, s_{n+1}) on raw spacings.

    Unfolding-free: the circular spectrum has uniform mean density, so raw
    gaps can be compared directly.  Consecutive pairs wrap around the
    circle, giving N ratios for N phases.
    """
    if e.count < 3:
        raise ValueError("need at least three eigenphases")
    s = raw_spacings(e)
    s_next = np.roll(s, -1)
    return float(np.mean(np.minimum(s, s_next) / np.maximum(s, s_next)))


def form_factor_reference(tau: np.ndarray, beta: int) -> np.ndarray:
    """Large-N circular-ensemble form factor K(tau), tau in Heisenberg units."""
    tau = np.asarray(tau, dtype=float)
    if beta == 2:
        return np.minimum(tau, 1.0)
    if beta == 1:
        small = 2.0 * tau - tau * np.log1p(2.0 * tau)
        with np.errstate(divide="ignore", invalid="ignore"):
            large = 2.0 - tau * np.log((2.0 * tau + 1.0) / (2.0 * tau - 1.0))
        return np.where(tau <= 1.0, small, large)
    raise ValueError("beta must be 1 or 2")


def spectral_form_factor(
    lists: list[EigenphaseList],
    beta: int,
    window: float = 0.15,
    tau_max: float = 2.0,
    n_out: int = 200,
) -> FormFactorSeries:
    """Sector-averaged, smoothed form factor on the rescaled axis tau = t/N_k.

    For each sector, K_k(t) = |sum_n exp(-i theta_n t)|^2 / N_k is
    evaluated at integer steps t = 1..tau_max*N_k.  Points from all
    sectors are pooled on the tau axis and averaged in a centred boxcar of
    width ``window`` (in units of the Heisenberg time), with the
    half-width shrinking near the domain edges.
    """
    taus = []
    ks = []
    for e in lists:
        n = e.count
        t_max = max(1, int(np.floor(tau_max * n)))
        t = np.arange(1, t_max + 1)
        z = np.exp(-1j * np.outer(e.phases, t)).sum(axis=0)
        taus.append(t / n)
        ks.append(np.abs(z) ** 2 / n)
    tau_all = np.concatenate(taus)
    k_all = np.concatenate(ks)
    order = np.argsort(tau_all)
    tau_all, k_all = tau_all[order], k_all[order]

    tau_out = np.linspace(tau_max / n_out, tau_max, n_out)
    half = window / 2.0
    csum = np.concatenate(([0.0], np.cumsum(k_all)))
    k_out = np.empty(n_out)
    for i, tc in enumerate(tau_out):
        h = min(half, tc - tau_all[0] / 2, tau_max - tc + tau_max / n_out)
        h = max(h, 1e-12)
        lo = np.searchsorted(tau_all, tc - h, side="left")
        hi = np.searchsorted(tau_all, tc + h, side="right")
        if hi == lo:  # window empty (very sparse sectors): take the nearest point
            j = np.clip(np.searchsorted(tau_all, tc), 1, len(tau_all) - 1)
            j = j if abs(tau_all[j] - tc) < abs(tau_all[j - 1] - tc) else j - 1
            k_out[i] = k_all[j]
        else:
            k_out[i] = (csum[hi] - csum[lo]) / (hi - lo)
    return FormFactorSeries(
        tau=tau_out, k=k_out, k_ref=form_factor_reference(tau_out, beta), window=window, beta=beta
    )


def _haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def sample_cue_phases(n: int, rng: np.random.Generator) -> EigenphaseList:
    """Eigenphases of one Haar-random unitary (unitary circular ensemble)."""
    u = _haar_unitary(n, rng)
    return EigenphaseList(phases=np.sort(np.angle(np.linalg.eigvals(u)) % (2 * np.pi)))


def sample_coe_phases(n: int, rng: np.random.Generator) -> EigenphaseList:
    """Eigenphases of one orthogonal-class (time-reversal invariant) sample.

    Uses S = U^T U with U Haar, the standard construction of the circular
    orthogonal ensemble.
    """
    u = _haar_unitary(n, rng)
    s = u.T @ u
    return EigenphaseList(phases=np.sort(np.angle(np.linalg.eigvals(s)) % (2 * np.pi)))
