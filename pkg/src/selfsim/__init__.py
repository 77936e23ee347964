"""Self-similar solutions of the 1-D diffusion equation and the solvers used to study them.

Modules
-------
specfun     Kummer 1F1, real-index Hermite functions, erfi, log-gamma.
similarity  Scaling frame, stationary profiles and mode sums.
cauchy      Whole-line problem by heat-kernel quadrature.
ibvp        Crank-Nicolson solver on [-D, D] with Dirichlet/Neumann/Robin data.
series      Sine-series solution of the Dirichlet problem.
utm         Unified-transform (contour integral) solution of the Dirichlet problem.
analysis    Decay fits, decomposition and the underflow audit.
cli         Command-line front end.
"""

from .errors import SelfSimError

__version__ = "0.1.0"

__all__ = ["SelfSimError", "__version__"]
