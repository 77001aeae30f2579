"""Fourth-order point-weighting finite-difference solvers for the 2D
Helmholtz equation with PML boundaries."""

from .errors import (DegenerateDenominatorError, EvanescentModeError, FitError,
                     FootprintError, NumericalError, PwhelmError, SolverError, SpecError)
from .pml import (CoefficientFields, GridSpec, MediumModel, PmlConfig, coefficient_fields,
                  sigma_profile, stretch_factor)
from .stencils import (SchemeParams17, SchemeParams25, Stencil, base_flux_stencil_x,
                       base_flux_stencil_z, conventional5_stencil, mass_stencil, nc4_stencil,
                       pw17_stencil, pw25_stencil)
from .dispersion import (dispersion_functional, group_velocity_ratio, numerical_wavenumber,
                         phase_velocity_ratio, pq, symbols_17, symbols_25)
from .fitting import (FitConfig, FitReport, estimate_IG, fit_params, fit_params_17,
                      fit_params_25, lsq_rows_17, lsq_rows_25, sample_grid)
from .linsys import Field, PointSource, SparseSystem, apply_boundary, assemble, solve

__version__ = "0.1.0"
