"""Self-similar imploding profiles for compressible Euler / Navier-Stokes.

Modules
-------
params_phase          closed-form phase-portrait objects and admissibility
profile_solver        sonic-point Taylor seed and profile integration
repulsivity_verifier  repulsivity margins, barrier and cutoff-constant checks
linear_modes          per-degree linearised operators and spectra
selfsim_evolution     radial method-of-lines evolution and diagnostics
cli_reports           command-line front end
"""

__version__ = "0.1.0"

from .errors import ImplosionError, NumericalError, ValidationError  # noqa: F401
from .params_phase import FluidParams, sonic_data  # noqa: F401
from .profile_solver import build_profile  # noqa: F401
