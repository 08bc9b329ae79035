"""Fidelity decay in multiply kicked Ising chains, with RMT references.

Dense state-vector simulation of a periodically kicked spin-1/2 ring,
stochastic trace estimation of the Loschmidt-echo amplitude, momentum
sector spectral statistics, and the random-matrix reference curves the
dynamics is compared against.
"""

__version__ = "0.1.0"

from . import csvio, floquet, presets, rmt, rng, spectral, states, stats, symmetry  # noqa: F401
