"""Axial tests of uniformity on the unit hypersphere."""
from .numerics import DistRef, NumericalError, RngStream
from .models import (
    LINEAR,
    WATSON,
    AngularFunction,
    AxialModel,
    SphericalSample,
    sample_axial,
    sample_uniform_sphere,
)
from .teststats import (
    ScatterSpectrum,
    TestReport,
    bingham_q,
    delta_theta,
    rayleigh_stat,
    scatter_matrix,
    t_minus,
    t_plus,
    t_pm,
    t_specified,
)

__version__ = "0.1.0"
