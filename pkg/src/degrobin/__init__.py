"""Numerics for -div(b(|u|) grad u) = f in a ball with the Robin condition
du/dnu + beta u = 0 and the degenerate coefficient b(s) = (1 + s)^(-theta).

Submodules: coefficients (b, B, B^-1, F and the Gamma condition),
regimes (summability thresholds), radial_oracle (closed-form radial
solutions), fd_solver (truncated Picard solver), norms (quadrature for
radial grid functions), estimates (estimate harnesses) and cli.
"""

__version__ = "0.1.0"

from .coefficients import CoefficientFamily, B_eval, B_inv, F_eval, b_eval
from .errors import DomainError, NonConvergenceError, NonexistenceError
from .fd_solver import PowerSource, ProblemSpec, SolveReport, TabulatedSource, picard_solve, truncation_sweep
from .norms import RadialGridFunction
from .radial_oracle import RadialClosedForm, RadialExampleSpec, solve_boundary_value
from .regimes import Regime, RegimeReport, classify

__all__ = [
    "__version__",
    "CoefficientFamily",
    "b_eval",
    "B_eval",
    "B_inv",
    "F_eval",
    "DomainError",
    "NonConvergenceError",
    "NonexistenceError",
    "PowerSource",
    "TabulatedSource",
    "ProblemSpec",
    "SolveReport",
    "picard_solve",
    "truncation_sweep",
    "RadialGridFunction",
    "RadialExampleSpec",
    "RadialClosedForm",
    "solve_boundary_value",
    "Regime",
    "RegimeReport",
    "classify",
]
