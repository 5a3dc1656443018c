"""Random states, their entanglement, and the concentration bounds that govern them.

Modules by task: :mod:`sampler` draws Haar-random objects, :mod:`states`
holds registers and structural maps, :mod:`measures` evaluates correlation
measures, :mod:`bounds` evaluates closed-form tail bounds and thresholds,
:mod:`protocols` simulates constructive protocols and :mod:`experiments`
runs seeded Monte Carlo campaigns.
"""

from .sampler import SeedSpec, haar_pure, haar_unitary, random_mixed, random_subspace
from .states import Register

__all__ = ["Register", "SeedSpec", "haar_pure", "haar_unitary", "random_mixed", "random_subspace"]
__version__ = "0.1.0"
