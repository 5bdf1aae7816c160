"""Gaussian mixture regression.

A joint mixture over selected input and output coordinates is conditioned
on an input value, giving either the multimodal conditional mixture or its
moment-matched Gaussian.  The per-component conditional covariances do not
depend on the input, so they are computed once per model/split pair; the
mixing weights are computed in the log domain.  Any subset of dimensions
can play the input role, which covers time-based regression, autonomous
dynamics over (position, velocity) and autoregressive windows alike.
"""

import math

import numpy as np
from scipy.linalg import cho_solve
from scipy.special import logsumexp
from sklearn.base import BaseEstimator

from .exceptions import FarFromSupportError
from .gaussians import (
    DimensionSplit,
    Gaussian,
    MixtureModel,
    _cholesky_regularized,
    em_fit,
)
from .validation import as_index_list, as_matrix, as_vector

# A query whose best per-component input log-density falls below this floor
# is rejected instead of silently extrapolating.
LOG_SUPPORT_FLOOR = math.log(1e-300)


class _PreparedSplit:
    """Per-(model, split) tables: gains, conditional covariances, inputs."""

    def __init__(self, model, split):
        split.validate(model.dim)
        self.model = model
        self.split = split
        in_idx = np.asarray(split.input_dims)
        out_idx = np.asarray(split.output_dims)
        self.input_marginals = []
        self.gains = []
        self.cond_covs = []
        for comp in model.components:
            cov_ii = comp.cov[np.ix_(in_idx, in_idx)]
            cov_oi = comp.cov[np.ix_(out_idx, in_idx)]
            cov_oo = comp.cov[np.ix_(out_idx, out_idx)]
            chol = _cholesky_regularized(cov_ii, "input-block covariance")
            gain = cho_solve((chol, True), cov_oi.T).T
            cond = cov_oo - gain @ cov_oi.T
            self.input_marginals.append(
                Gaussian(comp.mean[in_idx], comp.cov[np.ix_(in_idx, in_idx)])
            )
            self.gains.append(gain)
            self.cond_covs.append(0.5 * (cond + cond.T))
        self.mean_in = np.array([c.mean[in_idx] for c in model.components])
        self.mean_out = np.array([c.mean[out_idx] for c in model.components])
        with np.errstate(divide="ignore"):
            self.log_priors = np.log(model.priors)

    def responsibilities(self, x_in):
        logp = np.array([g.logpdf(x_in) for g in self.input_marginals])
        best = float(np.max(logp))
        if best < LOG_SUPPORT_FLOOR:
            raise FarFromSupportError(
                "query lies too far from the mixture's input support",
                max_log_density=best,
            )
        weighted = self.log_priors + logp
        return np.exp(weighted - logsumexp(weighted))

    def conditional_mixture(self, x_in):
        x_in = as_vector(x_in, "x_in", len(self.split.input_dims))
        h = self.responsibilities(x_in)
        comps = []
        for k in range(self.model.n_components):
            mean = self.mean_out[k] + self.gains[k] @ (x_in - self.mean_in[k])
            comps.append(Gaussian(mean, self.cond_covs[k]))
        return MixtureModel(tuple(comps), h / h.sum())


def condition_mixture(model, input_dims, output_dims, x_in):
    """Multimodal conditional of a joint mixture at one input value."""
    split = DimensionSplit(tuple(np.atleast_1d(input_dims)),
                           tuple(np.atleast_1d(output_dims)))
    return _PreparedSplit(model, split).conditional_mixture(x_in)


def condition_gaussian(model, input_dims, output_dims, x_in):
    """Moment-matched (unimodal) conditional of a joint mixture."""
    return condition_mixture(model, input_dims, output_dims, x_in).moment_matched()


class GMR(BaseEstimator):
    """Gaussian mixture regression estimator.

    Fits a joint mixture over the columns of ``X`` (or wraps a pre-fitted
    one through :meth:`from_model`) and answers conditional queries on an
    arbitrary input/output split of the coordinates.

    Parameters
    ----------
    n_components : int
    input_dims : tuple of int
        Indices of the conditioning coordinates (default: column 0).
    output_dims : tuple of int or None
        Indices of the predicted coordinates; ``None`` means all others.
    init, max_iter, tol, seed :
        Passed to the EM fit of the joint mixture.
    """

    def __init__(self, n_components=3, input_dims=(0,), output_dims=None,
                 init="time_binning", max_iter=200, tol=1e-8, seed=0):
        self.n_components = n_components
        self.input_dims = input_dims
        self.output_dims = output_dims
        self.init = init
        self.max_iter = max_iter
        self.tol = tol
        self.seed = seed

    @classmethod
    def from_model(cls, model, input_dims, output_dims=None):
        """Wrap an already fitted joint mixture."""
        est = cls(n_components=model.n_components, input_dims=input_dims,
                  output_dims=output_dims)
        est._attach(model)
        return est

    def _attach(self, model):
        in_idx = as_index_list(self.input_dims, model.dim, "input_dims")
        if self.output_dims is None:
            out_idx = tuple(d for d in range(model.dim) if d not in in_idx)
        else:
            out_idx = as_index_list(self.output_dims, model.dim, "output_dims")
        self.model_ = model
        self.split_ = DimensionSplit(in_idx, out_idx)
        self._prepared_ = _PreparedSplit(model, self.split_)

    def fit(self, X, y=None):
        result = em_fit(X, self.n_components, init=self.init, seed=self.seed,
                        max_iter=self.max_iter, tol=self.tol)
        self.log_likelihoods_ = result.log_likelihoods
        self.converged_ = result.converged
        self.n_reseeds_ = result.n_reseeds
        self._attach(result.model)
        return self

    def conditional_mixture(self, x_in):
        return self._prepared_.conditional_mixture(x_in)

    def conditional_gaussian(self, x_in):
        return self.conditional_mixture(x_in).moment_matched()

    def predict(self, X):
        """Moment-matched conditional means for each row of ``X``."""
        X = as_matrix(X, "X", n_cols=len(self.split_.input_dims), allow_1d=True)
        return np.array(
            [self.conditional_gaussian(x).mean for x in X]
        )


def dynamics_step(model, x, dt, input_dims=None, output_dims=None):
    """One Euler step of the autonomous system encoded by a joint
    (position, velocity) mixture: ``x + dt * E[velocity | position]``.

    By default the first half of the coordinates is the position block and
    the second half the velocity block.
    """
    if model.dim % 2 != 0 and (input_dims is None or output_dims is None):
        raise ValueError("model dimension must be even for the default split")
    half = model.dim // 2
    if input_dims is None:
        input_dims = tuple(range(half))
    if output_dims is None:
        output_dims = tuple(range(half, model.dim))
    x = as_vector(x, "x", len(tuple(np.atleast_1d(input_dims))))
    velocity = condition_gaussian(model, input_dims, output_dims, x).mean
    return x + float(dt) * velocity


def synthesize_autonomous(model, x0, dt, steps, input_dims=None, output_dims=None):
    """Iterate :func:`dynamics_step`; returns the (steps+1, D) trajectory."""
    x = as_vector(x0, "x0")
    out = [x.copy()]
    for _ in range(int(steps)):
        x = dynamics_step(model, x, dt, input_dims, output_dims)
        out.append(x.copy())
    return np.array(out)
