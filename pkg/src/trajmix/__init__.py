"""Mixture-model toolkit for continuous time series.

Encodes, analyzes, edits and synthesizes trajectories as weighted
superpositions of basis functions tied together by Gaussian mixture
models: weighted least squares and locally weighted regression, Gaussian
mixture regression, Bezier curves, analytic Fourier decompositions of
mixture densities, spectral ergodic control, and probabilistic movement
primitives.
"""

from .bezier import BezierCurve, bernstein, de_casteljau, fit_bezier
from .datasets import TrajectorySet, make_trajectories
from .ergodic import (
    ErgodicConfig,
    ErgodicState,
    control_step,
    ergodic_metric,
    simulate,
    sobolev_weights,
    update_coeffs,
)
from .exceptions import (
    DegenerateCovarianceError,
    FarFromSupportError,
    NumericalError,
    SingularSystemError,
)
from .fourier import (
    FourierDomain,
    basis_1d,
    basis_nd,
    basis_vector,
    combine_coeffs,
    evaluate_even_series,
    grad_basis_matrix,
    grad_basis_nd,
    mirror_mixture,
    mixture_coeffs,
    shift_coeffs,
)
from .gaussians import (
    DimensionSplit,
    EMResult,
    Gaussian,
    GaussianMixture,
    MixtureModel,
    em_fit,
    moment_match,
)
from .gmr import GMR, condition_gaussian, condition_mixture, dynamics_step
from .lwr import LWR, RbfSet, polynomial_features, weighted_least_squares
from .promp import (
    BernsteinBasis,
    FourierBasis,
    ProMP,
    ProMPMixture,
    RadialBasis,
    ViaPoint,
    fit_promp_mixture,
    pca_trajectory_model,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
