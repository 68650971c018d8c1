"""Random-matrix numerical laboratory.

Submodules
----------
core          shared types, histograms, distances and output helpers
sampling      Gaussian and Wishart ensembles, eigen-decomposition, i.i.d. gaps
density       finite-N densities, kernels, limiting laws and asymptotics
coulomb       Coulomb-gas Monte Carlo, energy functionals, Tricomi solver
resolvent     Stieltjes transforms, R-transforms and free addition
determinants  Vandermonde, Pfaffian, Hankel and related identities
eigenvectors  component statistics, Porter-Thomas laws, IPR, group volumes
checks        invariant and acceptance suites
cli           the ``rmt`` command
"""
from . import coulomb, core, density, determinants, eigenvectors, resolvent, sampling

__version__ = "0.1.0"

__all__ = ["core", "sampling", "density", "coulomb", "resolvent", "determinants", "eigenvectors", "__version__"]
