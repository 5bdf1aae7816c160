"""Multivariate Gaussian and Gaussian-mixture primitives.

The two data types here (:class:`Gaussian`, :class:`MixtureModel`) are the
atomic probabilistic objects of the whole toolkit: density evaluation,
linear transformation, conditioning, moment matching, EM fitting and
sampling all live in this module.  Fitted objects are immutable; every
query is pure and safe for concurrent readers.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve, solve_triangular
from scipy.special import logsumexp
from sklearn.base import BaseEstimator
from sklearn.cluster import kmeans_plusplus

from .exceptions import DegenerateCovarianceError
from .validation import as_index_list, as_matrix, as_vector, check_symmetric

# Scale factor of the diagonal regularization added before every covariance
# inversion: lam = REG_SCALE * trace(cov) / dim.  Scale-aware, so degenerate
# demonstrations do not blow up regardless of units.
REG_SCALE = 1e-8

LOG_TWO_PI = np.log(2.0 * np.pi)


def regularized(cov):
    """Return ``cov`` with a scale-aware jitter added to its diagonal."""
    dim = cov.shape[0]
    lam = REG_SCALE * np.trace(cov) / dim
    return cov + lam * np.eye(dim)


def _cholesky_regularized(cov, what="covariance"):
    try:
        return np.linalg.cholesky(regularized(cov))
    except np.linalg.LinAlgError:
        raise DegenerateCovarianceError(
            f"{what} is singular even after diagonal regularization"
        ) from None


def _covariance_factor(cov):
    """A matrix ``L`` with ``L @ L.T == cov``, tolerating PSD-singular input."""
    if np.trace(cov) == 0.0:
        return np.zeros_like(cov)
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        pass
    try:
        return np.linalg.cholesky(regularized(cov))
    except np.linalg.LinAlgError:
        eigval, eigvec = np.linalg.eigh(cov)
        return eigvec * np.sqrt(np.clip(eigval, 0.0, None))


def _freeze(arr):
    arr = np.array(arr, dtype=float)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class DimensionSplit:
    """Partition of the coordinates of a joint vector into inputs and outputs."""

    input_dims: tuple
    output_dims: tuple

    def __post_init__(self):
        in_idx = tuple(int(d) for d in self.input_dims)
        out_idx = tuple(int(d) for d in self.output_dims)
        if not in_idx or not out_idx:
            raise ValueError("both input_dims and output_dims must be non-empty")
        if set(in_idx) & set(out_idx):
            raise ValueError("input_dims and output_dims must be disjoint")
        if min(in_idx + out_idx) < 0:
            raise ValueError("dimension indices must be nonnegative")
        object.__setattr__(self, "input_dims", in_idx)
        object.__setattr__(self, "output_dims", out_idx)

    def validate(self, dim):
        as_index_list(self.input_dims + self.output_dims, dim, "split dims")
        return self


@dataclass(frozen=True)
class Gaussian:
    """Multivariate normal with a full covariance matrix.

    Parameters
    ----------
    mean : array, shape (dim,)
    cov : array, shape (dim, dim)
        Must be symmetric within 1e-12 relative tolerance; it is stored
        symmetrized.  Positive definiteness (after regularization) is
        enforced lazily, where an inverse is actually needed.
    """

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = as_vector(self.mean, "mean")
        cov = as_matrix(self.cov, "cov", n_cols=mean.shape[0])
        if cov.shape[0] != mean.shape[0]:
            raise ValueError("cov must be square with the dimension of mean")
        check_symmetric(cov, "cov", rtol=1e-12)
        object.__setattr__(self, "mean", _freeze(mean))
        object.__setattr__(self, "cov", _freeze(0.5 * (cov + cov.T)))

    @property
    def dim(self):
        return self.mean.shape[0]

    def logpdf(self, x):
        """Log density at ``x`` (a point or an (n, dim) batch)."""
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        pts = np.atleast_2d(x)
        if pts.shape[1] != self.dim:
            raise ValueError(f"points must have dimension {self.dim}")
        chol = _cholesky_regularized(self.cov)
        diff = pts - self.mean
        z = solve_triangular(chol, diff.T, lower=True)
        logdet = 2.0 * np.sum(np.log(np.diag(chol)))
        out = -0.5 * (self.dim * LOG_TWO_PI + logdet + np.sum(z * z, axis=0))
        return float(out[0]) if single else out

    def pdf(self, x):
        return np.exp(self.logpdf(x))

    def affine_map(self, A, b=None):
        """The distribution of ``A x + b`` when ``x`` follows this Gaussian."""
        A = np.asarray(A, dtype=float)
        if A.ndim != 2 or A.shape[1] != self.dim:
            raise ValueError(f"A must have {self.dim} columns, got shape {A.shape}")
        b = np.zeros(A.shape[0]) if b is None else as_vector(b, "b", A.shape[0])
        return Gaussian(A @ self.mean + b, A @ self.cov @ A.T)

    def marginal(self, dims):
        dims = as_index_list(dims, self.dim, "dims")
        idx = np.asarray(dims)
        return Gaussian(self.mean[idx], self.cov[np.ix_(idx, idx)])

    def condition(self, split, x_in):
        """Condition on the input block taking the value ``x_in``.

        Returns the Gaussian over the output block, with the usual
        conditional mean and the input-independent conditional covariance.
        """
        split.validate(self.dim)
        in_idx = np.asarray(split.input_dims)
        out_idx = np.asarray(split.output_dims)
        x_in = as_vector(x_in, "x_in", len(split.input_dims))
        cov_ii = self.cov[np.ix_(in_idx, in_idx)]
        cov_oi = self.cov[np.ix_(out_idx, in_idx)]
        cov_oo = self.cov[np.ix_(out_idx, out_idx)]
        chol = _cholesky_regularized(cov_ii, "input-block covariance")
        gain = cho_solve((chol, True), cov_oi.T).T
        mean = self.mean[out_idx] + gain @ (x_in - self.mean[in_idx])
        cov = cov_oo - gain @ cov_oi.T
        return Gaussian(mean, 0.5 * (cov + cov.T))

    def sample(self, n, seed=0):
        """Draw ``n`` points; deterministic under a fixed seed."""
        if n < 1:
            raise ValueError("n must be >= 1")
        rng = np.random.default_rng(seed)
        factor = _covariance_factor(self.cov)
        z = rng.standard_normal((int(n), self.dim))
        return self.mean + z @ factor.T


@dataclass(frozen=True)
class MixtureModel:
    """Weighted list of Gaussians sharing one dimension."""

    components: tuple
    priors: np.ndarray

    def __post_init__(self):
        comps = tuple(self.components)
        if not comps:
            raise ValueError("mixture needs at least one component")
        dim = comps[0].dim
        for c in comps:
            if c.dim != dim:
                raise ValueError("all components must share the same dimension")
        priors = as_vector(self.priors, "priors", len(comps))
        if np.any(priors < 0):
            raise ValueError("priors must be nonnegative")
        if abs(float(priors.sum()) - 1.0) > 1e-12:
            raise ValueError("priors must sum to 1 within 1e-12")
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "priors", _freeze(priors))

    @property
    def dim(self):
        return self.components[0].dim

    @property
    def n_components(self):
        return len(self.components)

    def component_logpdfs(self, X):
        """Per-component log densities, shape (n, K)."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.column_stack([c.logpdf(X) for c in self.components])

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        with np.errstate(divide="ignore"):
            log_w = np.log(self.priors)
        out = logsumexp(self.component_logpdfs(x) + log_w, axis=1)
        return float(out[0]) if single else out

    def pdf(self, x):
        return np.exp(self.logpdf(x))

    def marginal(self, dims):
        return MixtureModel(
            tuple(c.marginal(dims) for c in self.components), self.priors
        )

    def moment_matched(self):
        """The single Gaussian with the mixture's total mean and covariance."""
        means = np.array([c.mean for c in self.components])
        mean = self.priors @ means
        cov = np.zeros((self.dim, self.dim))
        for w, comp in zip(self.priors, self.components):
            cov += w * (comp.cov + np.outer(comp.mean, comp.mean))
        cov -= np.outer(mean, mean)
        return Gaussian(mean, 0.5 * (cov + cov.T))

    def sample(self, n, seed=0):
        """Draw ``n`` points: component by prior, then a Gaussian draw."""
        if n < 1:
            raise ValueError("n must be >= 1")
        n = int(n)
        rng = np.random.default_rng(seed)
        choice = rng.choice(self.n_components, size=n, p=self.priors)
        out = np.empty((n, self.dim))
        for k, comp in enumerate(self.components):
            mask = choice == k
            cnt = int(mask.sum())
            if cnt == 0:
                continue
            factor = _covariance_factor(comp.cov)
            z = rng.standard_normal((cnt, comp.dim))
            out[mask] = comp.mean + z @ factor.T
        return out


def moment_match(mixture):
    """Function form of :meth:`MixtureModel.moment_matched`."""
    return mixture.moment_matched()


# ---------------------------------------------------------------------------
# EM fitting
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EMResult:
    """Outcome of an EM run, including per-iteration diagnostics."""

    model: MixtureModel
    log_likelihoods: np.ndarray
    converged: bool
    n_reseeds: int


def _init_from_assignment(X, groups, n_components):
    means, covs, priors = [], [], []
    n = X.shape[0]
    for k in range(n_components):
        pts = X[groups == k]
        count = pts.shape[0]
        if count == 0:
            pts = X
        mu = pts.mean(axis=0)
        diff = pts - mu
        cov = diff.T @ diff / pts.shape[0]
        means.append(mu)
        covs.append(regularized(cov))
        priors.append(max(count, 1) / n)
    priors = np.asarray(priors)
    return means, covs, priors / priors.sum()


def _initial_parameters(X, n_components, init, seed):
    n = X.shape[0]
    if init == "time_binning":
        # Equal-size bins along the first coordinate (typically time).
        order = np.argsort(X[:, 0], kind="stable")
        groups = np.empty(n, dtype=int)
        for k, chunk in enumerate(np.array_split(order, n_components)):
            groups[chunk] = k
    elif init == "kmeans++":
        centers, _ = kmeans_plusplus(X, n_clusters=n_components, random_state=seed)
        d2 = ((X[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        groups = np.argmin(d2, axis=1)
    else:
        raise ValueError(f"unknown init strategy: {init!r}")
    return _init_from_assignment(X, groups, n_components)


def _log_responsibilities(X, means, covs, priors):
    logp = np.column_stack(
        [Gaussian(mu, cov).logpdf(X) for mu, cov in zip(means, covs)]
    )
    with np.errstate(divide="ignore"):
        weighted = logp + np.log(priors)
    norm = logsumexp(weighted, axis=1)
    return weighted - norm[:, None], norm


def em_fit(X, n_components, *, init="time_binning", seed=0, max_iter=200, tol=1e-8):
    """Fit a Gaussian mixture by expectation maximization.

    Responsibilities are computed in the log domain; each M-step covariance
    gets the scale-aware diagonal regularization.  An empty cluster is
    re-seeded at the datapoint with the lowest mixture log-density (the
    least-explained point), which is recorded in the diagnostics.

    Returns
    -------
    EMResult
        Fitted model, per-iteration total log-likelihood, convergence flag
        and the number of empty-cluster reseeds.
    """
    X = as_matrix(X, "X", allow_1d=True)
    n_components = int(n_components)
    if n_components < 1:
        raise ValueError("n_components must be >= 1")
    n, dim = X.shape
    if n < n_components:
        raise ValueError(f"need at least {n_components} points, got {n}")

    means, covs, priors = _initial_parameters(X, n_components, init, seed)

    log_likelihoods = []
    n_reseeds = 0
    converged = False
    for _ in range(int(max_iter)):
        log_resp, log_norm = _log_responsibilities(X, means, covs, priors)
        ll = float(log_norm.sum())
        log_likelihoods.append(ll)
        if len(log_likelihoods) > 1:
            prev = log_likelihoods[-2]
            if abs(ll - prev) <= tol * max(1.0, abs(prev)):
                converged = True
                break

        resp = np.exp(log_resp)
        counts = resp.sum(axis=0)
        for k in range(n_components):
            if counts[k] < 1e-10:
                # Re-seed at the least-explained point, deterministically.
                worst = int(np.argmin(log_norm))
                means[k] = X[worst].copy()
                diff = X - X.mean(axis=0)
                covs[k] = regularized(diff.T @ diff / n)
                priors[k] = 1.0 / n
                n_reseeds += 1
            else:
                mu = resp[:, k] @ X / counts[k]
                diff = X - mu
                cov = (resp[:, k] * diff.T) @ diff / counts[k]
                means[k] = mu
                covs[k] = regularized(0.5 * (cov + cov.T))
                priors[k] = counts[k] / n
        priors = priors / priors.sum()

    model = MixtureModel(
        tuple(Gaussian(mu, cov) for mu, cov in zip(means, covs)), priors
    )
    return EMResult(model, np.asarray(log_likelihoods), converged, n_reseeds)


class GaussianMixture(BaseEstimator):
    """Gaussian mixture estimator with a scikit-learn style interface.

    Parameters
    ----------
    n_components : int
        Number of mixture components.
    init : str
        ``"time_binning"`` (equal-size bins along the first coordinate,
        the default for time series) or ``"kmeans++"``.
    max_iter : int
    tol : float
        Relative log-likelihood improvement below which EM stops.
    seed : int
        Single source of randomness for init and sampling.
    """

    def __init__(self, n_components=3, init="time_binning", max_iter=200,
                 tol=1e-8, seed=0):
        self.n_components = n_components
        self.init = init
        self.max_iter = max_iter
        self.tol = tol
        self.seed = seed

    def fit(self, X, y=None):
        result = em_fit(
            X,
            self.n_components,
            init=self.init,
            seed=self.seed,
            max_iter=self.max_iter,
            tol=self.tol,
        )
        self.model_ = result.model
        self.log_likelihoods_ = result.log_likelihoods
        self.converged_ = result.converged
        self.n_reseeds_ = result.n_reseeds
        return self

    def score_samples(self, X):
        return self.model_.logpdf(as_matrix(X, "X", allow_1d=True))

    def sample(self, n, seed=None):
        return self.model_.sample(n, self.seed if seed is None else seed)


# ---------------------------------------------------------------------------
# Serialization ("gmm-v1")
# ---------------------------------------------------------------------------

def mixture_to_dict(model):
    return {
        "version": "gmm-v1",
        "dim": model.dim,
        "priors": model.priors.tolist(),
        "components": [
            {"mean": c.mean.tolist(), "cov": c.cov.tolist()}
            for c in model.components
        ],
    }


def mixture_from_dict(data):
    if data.get("version") != "gmm-v1":
        raise ValueError(f"expected a gmm-v1 model, got {data.get('version')!r}")
    comps = tuple(
        Gaussian(entry["mean"], entry["cov"]) for entry in data["components"]
    )
    model = MixtureModel(comps, np.asarray(data["priors"], dtype=float))
    if model.dim != int(data["dim"]):
        raise ValueError("dim field does not match component dimension")
    return model
