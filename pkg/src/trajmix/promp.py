"""Probabilistic movement primitives over interchangeable basis families.

A demonstration set is compressed into a Gaussian over basis-function
weights; the block design matrix (basis matrix Kronecker identity) maps
that Gaussian to a distribution over whole trajectories, whose covariance
has rank at most D*K before observation noise is added.  Via-point
conditioning happens in weight space, so its cost does not grow with the
trajectory length, and is mapped back through the same linear transform.
"""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from sklearn.base import BaseEstimator

from . import bezier, lwr
from .datasets import TrajectorySet
from .exceptions import DegenerateCovarianceError, SingularSystemError
from .gaussians import Gaussian, MixtureModel, _covariance_factor, em_fit
from .validation import as_index_list, as_vector, check_positive, check_unit_interval


# ---------------------------------------------------------------------------
# Basis families
# ---------------------------------------------------------------------------

class BasisFamily:
    """Common interface: a (T, K) design matrix over times in [0, 1]."""

    kind = None

    @property
    def n_basis(self):
        raise NotImplementedError

    def matrix(self, times):
        raise NotImplementedError

    def to_dict(self):
        raise NotImplementedError


class RadialBasis(BasisFamily):
    """Rescaled Gaussian bumps on [0, 1] (partition of unity per row)."""

    kind = "radial"

    def __init__(self, n_basis, centers=None, bandwidth=None, rescaled=True):
        n_basis = int(n_basis)
        if n_basis < 1:
            raise ValueError("n_basis must be >= 1")
        if centers is None:
            centers = np.linspace(0.0, 1.0, n_basis)
        centers = as_vector(centers, "centers")
        if centers.shape[0] != n_basis:
            n_basis = centers.shape[0]
        if bandwidth is None:
            bandwidth = (1.0 / n_basis) ** 2
        self.bandwidth = check_positive(bandwidth, "bandwidth")
        self.rescaled = bool(rescaled)
        self._rbfs = lwr.RbfSet(
            centers.reshape(-1, 1), self.bandwidth, rescaled=self.rescaled
        )

    @property
    def n_basis(self):
        return self._rbfs.n_basis

    @property
    def centers(self):
        return self._rbfs.centers.ravel()

    def matrix(self, times):
        times = np.asarray(times, dtype=float).reshape(-1, 1)
        return self._rbfs.weights(times)

    def to_dict(self):
        return {
            "kind": "radial",
            "n_basis": self.n_basis,
            "centers": self.centers.tolist(),
            "bandwidth": self.bandwidth,
            "rescaled": self.rescaled,
        }


class BernsteinBasis(BasisFamily):
    """Bernstein polynomials of degree K-1 (rows sum to one exactly)."""

    kind = "bernstein"

    def __init__(self, n_basis):
        n_basis = int(n_basis)
        if n_basis < 2:
            raise ValueError("n_basis must be >= 2 (degree >= 1)")
        self._n_basis = n_basis

    @property
    def n_basis(self):
        return self._n_basis

    @property
    def degree(self):
        return self._n_basis - 1

    def matrix(self, times):
        times = check_unit_interval(times, "times")
        return bezier.bernstein_matrix(self.degree, times)

    def to_dict(self):
        return {"kind": "bernstein", "n_basis": self.n_basis}


class FourierBasis(BasisFamily):
    """Cosine modes ``cos(2 pi k t / period)``; the default period 2 makes a
    half-range cosine series on [0, 1], a complete basis there."""

    kind = "fourier"

    def __init__(self, n_basis, period=2.0, k_values=None):
        n_basis = int(n_basis)
        if n_basis < 1:
            raise ValueError("n_basis must be >= 1")
        self.period = check_positive(period, "period")
        if k_values is None:
            k_values = np.arange(n_basis)
        self.k_values = np.asarray(k_values, dtype=int)
        if self.k_values.shape[0] != n_basis:
            raise ValueError("k_values must list n_basis mode numbers")

    @property
    def n_basis(self):
        return self.k_values.shape[0]

    def matrix(self, times):
        times = np.asarray(times, dtype=float)
        return np.cos(2.0 * np.pi * np.outer(times, self.k_values) / self.period)

    def to_dict(self):
        return {
            "kind": "fourier",
            "n_basis": self.n_basis,
            "period": self.period,
            "k_values": self.k_values.tolist(),
        }


def make_basis(kind, n_basis, **params):
    if kind == "radial":
        return RadialBasis(n_basis, **params)
    if kind == "bernstein":
        return BernsteinBasis(n_basis)
    if kind == "fourier":
        return FourierBasis(n_basis, **params)
    raise ValueError(f"unknown basis kind: {kind!r}")


def basis_from_dict(data):
    kind = data.get("kind")
    params = {k: v for k, v in data.items() if k not in ("kind", "n_basis")}
    return make_basis(kind, data["n_basis"], **params)


def block_design_matrix(phi, dim):
    """Kronecker expansion of a (T, K) basis matrix to (D T, D K)."""
    return np.kron(np.asarray(phi, dtype=float), np.eye(int(dim)))


# ---------------------------------------------------------------------------
# Demonstration handling
# ---------------------------------------------------------------------------

def _as_demo_list(trajectories):
    """Normalize the accepted inputs to a list of (times, values) pairs."""
    if isinstance(trajectories, TrajectorySet):
        return list(zip(trajectories.times, trajectories.values))
    if isinstance(trajectories, np.ndarray):
        arr = np.asarray(trajectories, dtype=float)
        if arr.ndim == 2:
            arr = arr[None]
        if arr.ndim != 3:
            raise ValueError("array input must be (M, T, D) or (T, D)")
        times = np.linspace(0.0, 1.0, arr.shape[1])
        return [(times, demo) for demo in arr]
    demos = []
    for item in trajectories:
        values = np.asarray(item, dtype=float)
        if values.ndim == 1:
            values = values.reshape(-1, 1)
        if values.ndim != 2 or values.shape[0] < 2:
            raise ValueError("each demo must be a (T>=2, D) array")
        demos.append((np.linspace(0.0, 1.0, values.shape[0]), values))
    if not demos:
        raise ValueError("need at least one demonstration")
    return demos


def resample_demos(trajectories, n_timesteps=None):
    """Linearly rescale all demos onto one common [0, 1] grid.

    Returns the grid and an (M, T, D) stack.  Demonstrations of unequal
    length are interpolated; the common length defaults to the longest.
    """
    demos = _as_demo_list(trajectories)
    dim = demos[0][1].shape[1]
    for _, values in demos:
        if values.shape[1] != dim:
            raise ValueError("all demos must share the same dimension")
    if n_timesteps is None:
        n_timesteps = max(values.shape[0] for _, values in demos)
    n_timesteps = int(n_timesteps)
    grid = np.linspace(0.0, 1.0, n_timesteps)
    out = np.empty((len(demos), n_timesteps, dim))
    for m, (times, values) in enumerate(demos):
        span = times[-1] - times[0]
        if span <= 0:
            raise ValueError("demo time stamps must span a positive interval")
        t_norm = (times - times[0]) / span
        for d in range(dim):
            out[m, :, d] = np.interp(grid, t_norm, values[:, d])
    return grid, out


# ---------------------------------------------------------------------------
# The ProMP estimator
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ViaPoint:
    """A soft equality constraint on some coordinates at one time index."""

    t_index: int
    dims: tuple
    value: np.ndarray
    noise: float

    def __post_init__(self):
        dims = tuple(int(d) for d in np.atleast_1d(self.dims))
        value = as_vector(self.value, "value", len(dims))
        noise = float(self.noise)
        if noise < 0:
            raise ValueError("constraint noise must be >= 0")
        object.__setattr__(self, "t_index", int(self.t_index))
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "value", value)
        object.__setattr__(self, "noise", noise)


class ProMP(BaseEstimator):
    """Trajectory distribution as a Gaussian over basis-function weights.

    Parameters
    ----------
    basis : str or BasisFamily
        ``"radial"``, ``"bernstein"``, ``"fourier"`` or a ready family.
    n_basis : int
        Number of basis functions per dimension (K).
    n_timesteps : int or None
        Common resampling length; ``None`` keeps the longest demo length.
    period, centers, bandwidth :
        Family-specific parameters forwarded when ``basis`` is a string.
    reg_scale : float
        Scale of the trace-proportional jitter added to the weight
        covariance (the number of demos is usually far below D*K).
    """

    def __init__(self, basis="radial", n_basis=10, n_timesteps=None,
                 period=2.0, centers=None, bandwidth=None, reg_scale=1e-8):
        self.basis = basis
        self.n_basis = n_basis
        self.n_timesteps = n_timesteps
        self.period = period
        self.centers = centers
        self.bandwidth = bandwidth
        self.reg_scale = reg_scale

    def _make_family(self):
        if isinstance(self.basis, BasisFamily):
            return self.basis
        if self.basis == "radial":
            return RadialBasis(self.n_basis, centers=self.centers,
                               bandwidth=self.bandwidth)
        if self.basis == "fourier":
            return FourierBasis(self.n_basis, period=self.period)
        return make_basis(self.basis, self.n_basis)

    def fit(self, trajectories, y=None):
        family = self._make_family()
        grid, data = resample_demos(trajectories, self.n_timesteps)
        n_demos, n_steps, dim = data.shape

        phi = family.matrix(grid)
        gram = phi.T @ phi
        try:
            factor = cho_factor(gram, lower=True)
        except np.linalg.LinAlgError:
            raise SingularSystemError(
                f"design matrix of the '{family.kind}' basis is rank "
                f"deficient ({family.n_basis} functions for {n_steps} steps)"
            ) from None

        weights = np.empty((n_demos, family.n_basis * dim))
        residual = 0.0
        for m in range(n_demos):
            w_block = cho_solve(factor, phi.T @ data[m])  # (K, D)
            weights[m] = w_block.reshape(-1)
            residual += float(np.sum((data[m] - phi @ w_block) ** 2))

        mu_w = weights.mean(axis=0)
        centered = weights - mu_w
        sigma_w = centered.T @ centered / n_demos
        jitter = self.reg_scale * np.trace(sigma_w) / sigma_w.shape[0]
        sigma_w = sigma_w + jitter * np.eye(sigma_w.shape[0])

        self.family_ = family
        self.times_ = grid
        self.phi_ = phi
        self.psi_ = block_design_matrix(phi, dim)
        self.weights_ = weights
        self.mu_w_ = mu_w
        self.sigma_w_ = 0.5 * (sigma_w + sigma_w.T)
        self.sigma2_ = residual / (n_demos * n_steps * dim)
        self.T_ = n_steps
        self.D_ = dim
        return self

    # -- queries ----------------------------------------------------------

    def weight_distribution(self):
        return Gaussian(self.mu_w_, self.sigma_w_)

    def trajectory_distribution(self):
        """Gaussian over the stacked (D*T,) trajectory vector."""
        cov = self.psi_ @ self.sigma_w_ @ self.psi_.T
        cov = 0.5 * (cov + cov.T) + self.sigma2_ * np.eye(cov.shape[0])
        return Gaussian(self.psi_ @ self.mu_w_, cov)

    def mean_trajectory(self):
        return (self.psi_ @ self.mu_w_).reshape(self.T_, self.D_)

    def _constraint_rows(self, constraints):
        rows, values, noises = [], [], []
        for c in constraints:
            if not isinstance(c, ViaPoint):
                c = ViaPoint(*c)
            if not 0 <= c.t_index < self.T_:
                raise ValueError(f"t_index {c.t_index} out of range")
            as_index_list(c.dims, self.D_, "via-point dims")
            for d, v in zip(c.dims, c.value):
                rows.append(c.t_index * self.D_ + d)
                values.append(v)
                noises.append(c.noise)
        if not rows:
            raise ValueError("need at least one via-point constraint")
        return np.asarray(rows), np.asarray(values), np.asarray(noises)

    def _conditioned_weights(self, constraints):
        rows, values, noises = self._constraint_rows(constraints)
        psi_c = self.psi_[rows]
        innovation_cov = psi_c @ self.sigma_w_ @ psi_c.T + np.diag(noises)
        try:
            factor = cho_factor(innovation_cov, lower=True)
        except np.linalg.LinAlgError:
            raise DegenerateCovarianceError(
                "constrained block is singular; increase the constraint noise"
            ) from None
        gain = cho_solve(factor, psi_c @ self.sigma_w_).T  # (DK, c)
        mu = self.mu_w_ + gain @ (values - psi_c @ self.mu_w_)
        sigma = self.sigma_w_ - gain @ psi_c @ self.sigma_w_
        return mu, 0.5 * (sigma + sigma.T)

    def condition_via_points(self, constraints):
        """Trajectory Gaussian conditioned on via-points.

        Conditioning updates the weight Gaussian using only the relevant
        design rows, then maps through the trajectory transform; the cost is
        independent of the trajectory length.
        """
        mu, sigma = self._conditioned_weights(constraints)
        cov = self.psi_ @ sigma @ self.psi_.T
        cov = 0.5 * (cov + cov.T) + self.sigma2_ * np.eye(cov.shape[0])
        return Gaussian(self.psi_ @ mu, cov)

    def sample(self, n, seed=0):
        """Draw ``n`` trajectories, shape (n, T, D); seeded and exact."""
        if int(n) < 1:
            raise ValueError("n must be >= 1")
        n = int(n)
        rng = np.random.default_rng(seed)
        factor = _covariance_factor(self.sigma_w_)
        draws = self.mu_w_ + rng.standard_normal((n, self.mu_w_.shape[0])) @ factor.T
        out = np.einsum("tk,nk->nt", self.psi_, draws).reshape(n, self.T_, self.D_)
        if self.sigma2_ > 0.0:
            out = out + np.sqrt(self.sigma2_) * rng.standard_normal(out.shape)
        return out


def promp_to_dict(model):
    return {
        "version": "promp-v1",
        "basis": model.family_.to_dict(),
        "mu_w": model.mu_w_.tolist(),
        "sigma_w": model.sigma_w_.tolist(),
        "sigma2": float(model.sigma2_),
        "n_timesteps": int(model.T_),
        "dim": int(model.D_),
    }


def promp_from_dict(data):
    if data.get("version") != "promp-v1":
        raise ValueError(f"expected a promp-v1 model, got {data.get('version')!r}")
    family = basis_from_dict(data["basis"])
    n_steps = int(data["n_timesteps"])
    dim = int(data["dim"])
    model = ProMP(basis=family, n_timesteps=n_steps)
    grid = np.linspace(0.0, 1.0, n_steps)
    model.family_ = family
    model.times_ = grid
    model.phi_ = family.matrix(grid)
    model.psi_ = block_design_matrix(model.phi_, dim)
    model.mu_w_ = np.asarray(data["mu_w"], dtype=float)
    model.sigma_w_ = np.asarray(data["sigma_w"], dtype=float)
    model.sigma2_ = float(data["sigma2"])
    model.T_ = n_steps
    model.D_ = dim
    return model


# ---------------------------------------------------------------------------
# Eigendecomposition (PCA) alternative
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PcaTrajectoryModel:
    """Trajectory distribution from the leading eigencomponents of the raw
    stacked-trajectory covariance; weights are standard normal by
    construction, the mean trajectory is stored separately."""

    mean: np.ndarray          # (D*T,)
    basis: np.ndarray         # (D*T, r), columns are eigvec * sqrt(eigval)
    eigenvalues: np.ndarray   # all D*T eigenvalues, non-increasing
    n_timesteps: int
    dim: int

    @property
    def n_components(self):
        return self.basis.shape[1]

    def weight_distribution(self):
        r = self.n_components
        return Gaussian(np.zeros(r), np.eye(r))

    def trajectory_distribution(self):
        return Gaussian(self.mean, self.basis @ self.basis.T)

    def reconstruct(self, x):
        """Project a stacked trajectory onto the retained subspace."""
        x = as_vector(x, "x", self.mean.shape[0])
        coords, *_ = np.linalg.lstsq(self.basis, x - self.mean, rcond=None)
        return self.mean + self.basis @ coords


def pca_trajectory_model(trajectories, n_components, n_timesteps=None):
    """Fit :class:`PcaTrajectoryModel` with the requested component count.

    If fewer strictly positive eigenvalues exist, the count is truncated
    with a warning.
    """
    _, data = resample_demos(trajectories, n_timesteps)
    n_demos, n_steps, dim = data.shape
    if n_demos < 2:
        raise ValueError("need at least two demonstrations")
    flat = data.reshape(n_demos, n_steps * dim)
    mean = flat.mean(axis=0)
    centered = flat - mean
    cov = centered.T @ centered / n_demos
    eigval, eigvec = np.linalg.eigh(0.5 * (cov + cov.T))
    order = np.argsort(eigval)[::-1]
    eigval = eigval[order]
    eigvec = eigvec[:, order]
    n_components = int(n_components)
    positive = int(np.sum(eigval > max(eigval[0], 0.0) * 1e-12))
    if n_components > positive:
        warnings.warn(
            f"only {positive} positive eigenvalues available; truncating "
            f"from {n_components}",
            stacklevel=2,
        )
        n_components = positive
    basis = eigvec[:, :n_components] * np.sqrt(eigval[:n_components])
    return PcaTrajectoryModel(mean, basis, eigval, n_steps, dim)


# ---------------------------------------------------------------------------
# Mixtures of movement primitives
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProMPMixture:
    """Mixture of movement primitives sharing one basis and noise level."""

    priors: np.ndarray
    components: tuple          # of ProMP
    weight_mixture: MixtureModel

    def trajectory_distribution(self):
        """Mixture over stacked trajectories, each component mapped through
        the shared linear transform with the noise re-added."""
        comps = []
        for promp_k in self.components:
            g = promp_k.weight_distribution().affine_map(promp_k.psi_)
            comps.append(
                Gaussian(g.mean, g.cov + promp_k.sigma2_ * np.eye(g.cov.shape[0]))
            )
        return MixtureModel(tuple(comps), self.priors)


def fit_promp_mixture(trajectories, n_components, basis="radial", n_basis=10,
                      n_timesteps=None, seed=0, max_iter=200, tol=1e-8):
    """EM over per-demo weight vectors, one movement primitive per cluster."""
    base = ProMP(basis=basis, n_basis=n_basis, n_timesteps=n_timesteps)
    base.fit(trajectories)
    if base.weights_.shape[0] < int(n_components):
        raise ValueError("need at least as many demos as mixture components")
    result = em_fit(base.weights_, n_components, init="kmeans++", seed=seed,
                    max_iter=max_iter, tol=tol)
    comps = []
    for gaussian in result.model.components:
        promp_k = ProMP(basis=base.family_, n_timesteps=base.T_)
        promp_k.family_ = base.family_
        promp_k.times_ = base.times_
        promp_k.phi_ = base.phi_
        promp_k.psi_ = base.psi_
        promp_k.mu_w_ = gaussian.mean
        promp_k.sigma_w_ = gaussian.cov
        promp_k.sigma2_ = base.sigma2_
        promp_k.T_ = base.T_
        promp_k.D_ = base.D_
        comps.append(promp_k)
    return ProMPMixture(result.model.priors, tuple(comps), result.model)
