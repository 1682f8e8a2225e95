"""Safe smooth path planning on probabilistic occupancy maps.

Paths live in an approximate-kernel function space (random Fourier or
Nystrom features) and are optimized by stochastic functional gradient
descent with occupancy-gated updates.  The package bundles the
continuous occupancy model the planner reads, an RRT* baseline over the
same model, laser-log ingestion, synthetic worlds, and a benchmark CLI.
"""

from .errors import OccupathError
from ._fast import BACKEND

__version__ = "0.1.0"
__all__ = ["BACKEND", "OccupathError", "__version__"]
