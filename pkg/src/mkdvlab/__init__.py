"""mkdvlab: spectral numerics for the modified KdV equation.

Submodules:

* ``spectral``  grids, spectral fields, multipliers, projections, dealiased products
* ``norms``     Lebesgue, mixed space-time, Sobolev, Besov, modulation norms
* ``flows``     Airy group, scaling map, mKdV integrators, Duhamel term
* ``estimates`` Strichartz and bilinear decay sweeps, resonance algebra
* ``illposed``  two-bump datum, third Gateaux derivative, inflation sweeps
* ``cli``       config parsing, experiment runner, reports
"""

__version__ = "0.1.0"

from .errors import (ArgumentError, BlowUpError, ConfigError,  # noqa: F401
                     DegenerateSeparationError, LabError, NumericError,
                     ResolutionError, UndefinedRatioError)
from .spectral import (FrequencyWindow, Grid, SpectralField,  # noqa: F401
                       apply_multiplier, dealiased_product, project, to_spectral)
