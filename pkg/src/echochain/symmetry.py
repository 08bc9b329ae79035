"""Ring symmetries of the kicked chain and momentum-sector bases.

The chain is translation and reflection invariant, so the propagator is
block diagonal in the eigenbasis of the one-site rotation.  Sector k is
spanned by Bloch sums over translation orbits,

    |k, r> = d^{-1/2} sum_{j=0}^{d-1} exp(+2 pi i k j / L) T^{-j} |r>,

where r is the orbit representative (minimal basis index over rotations),
d its orbit period, and T the one-site rotation.  Orbits enter sector k
iff k*d = 0 mod L.  With this phase convention the embedded vectors are
rotation eigenstates with eigenvalue exp(+2 pi i k / L).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import states
from .floquet import FloquetSpec, mki_step

__all__ = [
    "rotate_state",
    "reflect_state",
    "SectorBasis",
    "build_sector_basis",
    "sector_dimensions",
    "project_state",
    "embed_state",
    "sector_floquet_matrix",
    "parity_split",
    "default_sector_list",
    "ResourceLimitError",
]


class ResourceLimitError(RuntimeError):
    """Raised when a dense sector matrix would exceed the configured guard."""


@lru_cache(maxsize=8)
def _ror_permutation(L: int) -> np.ndarray:
    idx = np.arange(1 << L, dtype=np.int64)
    return (idx >> 1) | ((idx & 1) << (L - 1))


@lru_cache(maxsize=8)
def _reverse_permutation(L: int) -> np.ndarray:
    idx = np.arange(1 << L, dtype=np.int64)
    rev = np.zeros_like(idx)
    for j in range(L):
        rev |= ((idx >> j) & 1) << (L - 1 - j)
    return rev


def rotate_state(state: np.ndarray) -> np.ndarray:
    """One-site ring rotation: |i0 i1 ... i_{L-1}>  ->  |i_{L-1} i0 ... i_{L-2}>."""
    L = states.num_qubits(state)
    return state[_ror_permutation(L)]


def reflect_state(state: np.ndarray) -> np.ndarray:
    """Ring reflection: site order reversed, |i0 ... i_{L-1}> -> |i_{L-1} ... i0>."""
    L = states.num_qubits(state)
    return state[_reverse_permutation(L)]


@lru_cache(maxsize=8)
def _orbit_table(L: int):
    """Representatives and orbit periods of all translation orbits."""
    idx = np.arange(1 << L, dtype=np.int64)
    mask = (1 << L) - 1
    canon = idx.copy()
    period = np.zeros(1 << L, dtype=np.int64)
    x = idx
    for j in range(1, L + 1):
        x = ((x << 1) | (x >> (L - 1))) & mask
        np.minimum(canon, x, out=canon)
        first_return = (x == idx) & (period == 0)
        period[first_return] = j
    is_rep = canon == idx
    return idx[is_rep], period[is_rep]


@dataclass
class SectorBasis:
    """Momentum-k invariant subspace defined by orbit representatives.

    ``indices``/``phases`` hold, orbit after orbit, the basis index and
    complex weight of every component of every sector vector; ``offsets``
    marks where each orbit starts, so projections reduce over contiguous
    segments.
    """

    L: int
    k: int
    reps: np.ndarray
    periods: np.ndarray
    indices: np.ndarray
    phases: np.ndarray
    offsets: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.reps)


def build_sector_basis(L: int, k: int) -> SectorBasis:
    """Enumerate translation orbits and keep those compatible with momentum k."""
    if not 0 <= k < L:
        raise ValueError(f"momentum index k={k} outside 0..L-1")
    reps, periods = _orbit_table(L)
    keep = (k * periods) % L == 0
    reps, periods = reps[keep], periods[keep]
    # deterministic ordering by representative value
    order = np.argsort(reps)
    reps, periods = reps[order], periods[order]

    total = int(periods.sum())
    indices = np.empty(total, dtype=np.int64)
    phases = np.empty(total, dtype=np.complex128)
    offsets = np.zeros(len(reps) + 1, dtype=np.int64)
    np.cumsum(periods, out=offsets[1:])
    ror = _ror_permutation(L)
    for i, (r, d) in enumerate(zip(reps, periods)):
        lo = offsets[i]
        s = r
        for j in range(d):
            indices[lo + j] = s
            s = ror[s]
        phases[lo : lo + d] = np.exp(2j * np.pi * k * np.arange(d) / L) / np.sqrt(d)
    return SectorBasis(
        L=L, k=k, reps=reps, periods=periods, indices=indices, phases=phases, offsets=offsets[:-1]
    )


def sector_dimensions(L: int) -> np.ndarray:
    """dim H_k for k = 0..L-1; sums to 2^L."""
    reps, periods = _orbit_table(L)
    dims = np.empty(L, dtype=np.int64)
    for k in range(L):
        dims[k] = int(np.count_nonzero((k * periods) % L == 0))
    return dims


def default_sector_list(L: int) -> list[int]:
    """Sectors used for pooled spectral statistics: k = 1 .. ceil(L/2) - 1.

    Excludes k = 0 and (for even L) k = L/2, where reflection acts within
    the sector and would mix two parity subspectra into the statistics.
    """
    return list(range(1, (L + 1) // 2 if L % 2 else L // 2))


def project_state(state: np.ndarray, basis: SectorBasis) -> np.ndarray:
    """Coefficients <k,r|state> for every sector vector."""
    if state.shape[0] != 1 << basis.L:
        raise ValueError("state dimension does not match basis.L")
    terms = np.conj(basis.phases) * state[basis.indices]
    return np.add.reduceat(terms, basis.offsets)


def embed_state(coeffs: np.ndarray, basis: SectorBasis) -> np.ndarray:
    """Full-space vector sum_r coeffs[r] |k,r>."""
    if coeffs.shape[0] != basis.dim:
        raise ValueError("coefficient count does not match sector dimension")
    state = np.zeros(1 << basis.L, dtype=np.complex128)
    state[basis.indices] = np.repeat(coeffs, basis.periods) * basis.phases
    return state


def sector_floquet_matrix(
    spec: FloquetSpec, basis: SectorBasis, max_dim: int = 8192
) -> np.ndarray:
    """Dense block <k,a|U_MKI|k,b> of the propagator in one momentum sector.

    Columns are produced by embedding each sector vector, running the fast
    propagator, and projecting back; the result is unitary because the
    sector is invariant.
    """
    if spec.L != basis.L:
        raise ValueError("spec and basis disagree on L")
    if basis.dim > max_dim:
        raise ResourceLimitError(
            f"sector dimension {basis.dim} exceeds dense guard {max_dim}"
        )
    mat = np.empty((basis.dim, basis.dim), dtype=np.complex128)
    coeffs = np.zeros(basis.dim, dtype=np.complex128)
    for b in range(basis.dim):
        coeffs[b] = 1.0
        psi = embed_state(coeffs, basis)
        coeffs[b] = 0.0
        mki_step(psi, spec, out=psi)
        mat[:, b] = project_state(psi, basis)
    return mat


def parity_split(basis: SectorBasis) -> tuple[np.ndarray, np.ndarray]:
    """Even/odd reflection subspaces of a self-paired sector (k = 0 or L/2).

    Returns two matrices whose columns are sector-coefficient vectors
    spanning the P = +1 and P = -1 subspaces.  Either block may be empty:
    for a given chain not necessarily both parities occur for every
    representative.  Off by default in the spectral pipeline; provided for
    parity-resolved studies.
    """
    L, k = basis.L, basis.k
    if k != 0 and 2 * k != L:
        raise ValueError("parity is only block-diagonal in sectors k=0 and k=L/2")
    rev = _reverse_permutation(L)
    rep_pos = {int(r): i for i, r in enumerate(basis.reps)}
    pi = np.zeros((basis.dim, basis.dim))
    ror = _ror_permutation(L)
    for i, r in enumerate(basis.reps):
        mirrored = int(rev[r])
        # locate the mirrored string inside its orbit: mirrored = T^{-a} r'
        s = mirrored
        a = 0
        while s not in rep_pos:
            s = int(ror[s])
            a += 1
        j = rep_pos[s]
        sign = 1.0 if k == 0 else (-1.0) ** (a % 2)
        pi[j, i] = sign
    evals, evecs = np.linalg.eigh(pi)
    even = evecs[:, evals > 0]
    odd = evecs[:, evals < 0]
    return even, odd
