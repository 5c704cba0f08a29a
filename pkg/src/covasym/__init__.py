"""Covariance asymptotics of linear statistics of stationary random measures.

Submodules
----------
core       shared numerics: multi-indices, quadrature, grids, DFT, seeds
kernels    truncated pair-correlation kernels and their moments
expansion  covariance expansion terms, bounds, exact transforms, predictions
indicator  surface-order limits for indicator statistics of smooth domains
cumulants  set-partition algebra, reduction identities, discrete verifiers
simulate   seeded samplers for the process zoo
estimate   linear statistics, cumulant estimators, scaling fits
cli        command-line front door
"""

from . import core, cumulants, estimate, expansion, indicator, kernels, simulate

__version__ = "0.1.0"
