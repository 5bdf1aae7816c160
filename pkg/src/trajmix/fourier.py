"""Fourier basis functions and analytic coefficients of mirrored mixtures.

A density supported on ``[0, L/2]^D`` is extended to an even periodic
function on ``[-L/2, L/2]^D`` by mirroring every Gaussian through all sign
flips of the axes.  Evenness makes the basis real (a product of cosines per
dimension, scaled by ``1/L^D``) and the series coefficients of the mirrored
mixture have a closed form: a cosine carrying the component center and a
Gaussian-decay factor carrying its covariance.  Complex arithmetic only
appears in the 1-D property helpers (shift et al.); the D-dimensional
pipeline is all-real.
"""

import itertools
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .gaussians import Gaussian, MixtureModel
from .validation import as_vector, check_positive

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class FourierDomain:
    """Periodic domain ``[-L/2, L/2]^dim`` with ``n_coeffs`` modes per axis.

    The index set is the full grid ``{0..K-1}^dim`` flattened row-major,
    so flat index 0 always corresponds to the all-zero index vector.
    """

    period: float
    dim: int
    n_coeffs: int

    def __post_init__(self):
        check_positive(self.period, "period")
        if int(self.dim) < 1 or int(self.n_coeffs) < 1:
            raise ValueError("dim and n_coeffs must be >= 1")
        object.__setattr__(self, "period", float(self.period))
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "n_coeffs", int(self.n_coeffs))

    @property
    def n_total(self):
        return self.n_coeffs ** self.dim

    @property
    def half_width(self):
        return self.period / 2.0

    def index_set(self):
        """All index vectors as an (n_total, dim) integer array."""
        return _index_set(self.n_coeffs, self.dim)

    def contains(self, x):
        x = np.asarray(x, dtype=float)
        return bool(np.all(np.abs(x) <= self.half_width + 1e-12))


@lru_cache(maxsize=None)
def _index_set(n_coeffs, dim):
    grids = np.meshgrid(*([np.arange(n_coeffs)] * dim), indexing="ij")
    idx = np.stack(grids, axis=-1).reshape(-1, dim)
    idx.flags.writeable = False
    return idx


def basis_1d(x, k, period):
    """Complex 1-D basis function ``(1/L) exp(-i 2 pi k x / L)``."""
    period = check_positive(period, "period")
    return np.exp(-1j * TWO_PI * k * np.asarray(x, dtype=float) / period) / period


def basis_nd(x, k, dom):
    """Real cosine-product basis function at a single index vector ``k``."""
    x = as_vector(x, "x", dom.dim)
    k = np.asarray(k, dtype=int)
    if k.shape != (dom.dim,) or np.any(k < 0) or np.any(k >= dom.n_coeffs):
        raise ValueError("k must be an index vector inside the domain's index set")
    return float(np.prod(np.cos(TWO_PI * k * x / dom.period)) / dom.period ** dom.dim)


def basis_vector(x, dom):
    """All basis functions at ``x``, shape (n_total,)."""
    x = as_vector(x, "x", dom.dim)
    ks = np.arange(dom.n_coeffs)
    cos_tab = np.cos(TWO_PI * np.outer(ks, x) / dom.period)  # (K, dim)
    idx = dom.index_set()
    vals = cos_tab[idx, np.arange(dom.dim)]
    return vals.prod(axis=1) / dom.period ** dom.dim


def grad_basis_nd(x, k, dom):
    """Analytic gradient of :func:`basis_nd` with respect to ``x``."""
    x = as_vector(x, "x", dom.dim)
    k = np.asarray(k, dtype=int)
    if k.shape != (dom.dim,) or np.any(k < 0) or np.any(k >= dom.n_coeffs):
        raise ValueError("k must be an index vector inside the domain's index set")
    ang = TWO_PI * k * x / dom.period
    cos_vals = np.cos(ang)
    grad = np.empty(dom.dim)
    for d in range(dom.dim):
        parts = cos_vals.copy()
        parts[d] = -np.sin(ang[d]) * TWO_PI * k[d] / dom.period
        grad[d] = np.prod(parts)
    return grad / dom.period ** dom.dim


def grad_basis_matrix(x, dom):
    """Gradients of every basis function at ``x``, shape (n_total, dim)."""
    x = as_vector(x, "x", dom.dim)
    ks = np.arange(dom.n_coeffs)
    ang = TWO_PI * np.outer(ks, x) / dom.period  # (K, dim)
    cos_tab = np.cos(ang)
    dsin_tab = -np.sin(ang) * (TWO_PI * ks[:, None] / dom.period)
    idx = dom.index_set()
    dims = np.arange(dom.dim)
    gathered = cos_tab[idx, dims]  # (n_total, dim)
    grad = np.empty((dom.n_total, dom.dim))
    for d in range(dom.dim):
        parts = gathered.copy()
        parts[:, d] = dsin_tab[idx[:, d], d]
        grad[:, d] = parts.prod(axis=1)
    return grad / dom.period ** dom.dim


def sign_patterns(dim):
    """All ``2^dim`` axis sign flips, ordered like the nested product
    of (-1, 1) per axis (so in 2-D: --, -+, +-, ++)."""
    return np.array(list(itertools.product((-1.0, 1.0), repeat=dim)))


def mirror_mixture(mixture, dom):
    """Mirror a mixture on ``[0, L/2]^D`` into an even one on the full domain.

    Every component is reflected through all sign-flip matrices, yielding
    ``2^D`` copies with weight divided accordingly.  Component means outside
    ``[0, L/2]^D`` only trigger a warning, since the transform stays valid.
    """
    if mixture.dim != dom.dim:
        raise ValueError("mixture dimension does not match the domain")
    half = dom.half_width
    for comp in mixture.components:
        if np.any(comp.mean < -1e-12) or np.any(comp.mean > half + 1e-12):
            warnings.warn(
                "component mean outside [0, L/2]^D; mirrored density may "
                "not match the intended one",
                stacklevel=2,
            )
    patterns = sign_patterns(dom.dim)
    comps = []
    priors = []
    for weight, comp in zip(mixture.priors, mixture.components):
        for s in patterns:
            comps.append(Gaussian(s * comp.mean, np.outer(s, s) * comp.cov))
            priors.append(weight / len(patterns))
    return MixtureModel(tuple(comps), np.asarray(priors))


def mixture_coeffs(mixture, dom):
    """Analytic Fourier coefficients of the mirrored mixture (all real).

    The input is the *un-mirrored* mixture on ``[0, L/2]^D``; mirroring is
    applied internally.  Summing over one representative of each +/- pair of
    sign patterns with twice the weight is sufficient because the cosine and
    the quadratic form are both invariant under a global sign flip.
    """
    if mixture.dim != dom.dim:
        raise ValueError("mixture dimension does not match the domain")
    idx = dom.index_set().astype(float)
    period = dom.period
    # One representative per +/- pair: the patterns whose first sign is -1.
    patterns = sign_patterns(dom.dim)
    half_patterns = patterns[: len(patterns) // 2]
    n_half = len(half_patterns)
    coeffs = np.zeros(dom.n_total)
    for weight, comp in zip(mixture.priors, mixture.components):
        for s in half_patterns:
            dots = idx @ (s * comp.mean)
            ks = idx * s
            quad = np.einsum("nd,de,ne->n", ks, comp.cov, ks)
            coeffs += (
                (weight / n_half)
                * np.cos(TWO_PI * dots / period)
                * np.exp(-2.0 * np.pi ** 2 * quad / period ** 2)
            )
    return coeffs / period ** dom.dim


def evaluate_even_series(coeffs, dom, x):
    """Reconstruct the even periodic density from nonnegative-index
    coefficients, doubling every mode with a nonzero index per axis."""
    coeffs = as_vector(coeffs, "coeffs", dom.n_total)
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    pts = np.atleast_2d(x)
    if pts.shape[1] != dom.dim:
        raise ValueError(f"points must have dimension {dom.dim}")
    idx = dom.index_set()
    doubling = np.where(idx > 0, 2.0, 1.0).prod(axis=1)
    ks = np.arange(dom.n_coeffs)
    out = np.empty(pts.shape[0])
    for i, pt in enumerate(pts):
        cos_tab = np.cos(TWO_PI * np.outer(ks, pt) / dom.period)
        vals = cos_tab[idx, np.arange(dom.dim)].prod(axis=1)
        out[i] = float(np.sum(doubling * coeffs * vals))
    return float(out[0]) if single else out


def shift_coeffs(coeffs, shift, period):
    """1-D shift property: coefficients of ``g(x - shift)``."""
    coeffs = np.asarray(coeffs, dtype=complex)
    if coeffs.ndim != 1:
        raise ValueError("shift_coeffs expects 1-D coefficients")
    period = check_positive(period, "period")
    k = np.arange(coeffs.shape[0])
    return coeffs * np.exp(-1j * TWO_PI * k * float(shift) / period)


def combine_coeffs(coeffs1, coeffs2, a1, a2):
    """Linear-combination property: coefficients of ``a1 g1 + a2 g2``."""
    c1 = np.asarray(coeffs1)
    c2 = np.asarray(coeffs2)
    if c1.shape != c2.shape:
        raise ValueError("coefficient arrays must have the same shape")
    return float(a1) * c1 + float(a2) * c2
