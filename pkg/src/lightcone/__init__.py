"""Light-cone Eisenstein series: Fourier coefficients, local factors, and
lattice-point counting on rational quadric cones."""

from .eisenstein import (
    FormParams,
    HalfSpacePoint,
    TruncationConfig,
    Phi_const,
    Phi_lambda,
    fourier_coefficient,
    eisenstein_fourier,
    eisenstein_direct,
    omega,
    cusp_volume_vP1,
    R_closed,
    R_series,
    functional_eq_residual,
    pole_scan,
)
from .counting import (
    Bump,
    CountResult,
    count_sharp,
    count_smoothed,
    enumerate_points,
    mellin,
)

__version__ = "0.1.0"

__all__ = [
    "FormParams",
    "HalfSpacePoint",
    "TruncationConfig",
    "Phi_const",
    "Phi_lambda",
    "fourier_coefficient",
    "eisenstein_fourier",
    "eisenstein_direct",
    "omega",
    "cusp_volume_vP1",
    "R_closed",
    "R_series",
    "functional_eq_residual",
    "pole_scan",
    "Bump",
    "CountResult",
    "count_sharp",
    "count_smoothed",
    "enumerate_points",
    "mellin",
    "__version__",
]
