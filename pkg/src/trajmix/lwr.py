"""Weighted least squares and locally weighted regression.

K radial basis functions each weight one least-squares fit of a local
polynomial model; predictions blend the local models with *rescaled*
activations (a partition of unity), which is what makes constants and
in-span polynomials reproduce exactly.  The rescaling can be switched off
for the fitting weights, where it is optional.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from scipy.special import logsumexp
from sklearn.base import BaseEstimator, RegressorMixin

from .exceptions import SingularSystemError
from .validation import as_matrix, check_symmetric


def weighted_least_squares(X_in, X_out, weights, ridge=0.0):
    """Solve ``min_A tr((X_out - X_in A)^T W (X_out - X_in A))`` with a ridge.

    Returns the (d, p) coefficient matrix.  A rank-deficient normal matrix
    with ``ridge == 0`` raises :class:`SingularSystemError`.
    """
    X_in = as_matrix(X_in, "X_in", allow_1d=True)
    X_out = as_matrix(X_out, "X_out", allow_1d=True)
    weights = np.asarray(weights, dtype=float).ravel()
    if X_in.shape[0] != X_out.shape[0] or weights.shape[0] != X_in.shape[0]:
        raise ValueError("X_in, X_out and weights must agree on sample count")
    if np.any(weights < 0):
        raise ValueError("weights must be nonnegative")
    if not np.any(weights > 0):
        raise ValueError("weights must not all be zero")
    ridge = float(ridge)
    if ridge < 0:
        raise ValueError("ridge must be >= 0")

    XtW = X_in.T * weights
    normal = XtW @ X_in + ridge * np.eye(X_in.shape[1])
    try:
        factor = cho_factor(normal, lower=True)
    except np.linalg.LinAlgError:
        raise SingularSystemError(
            "normal matrix is rank deficient; add a ridge term"
        ) from None
    return cho_solve(factor, XtW @ X_out)


@dataclass(frozen=True)
class RbfSet:
    """Gaussian radial basis functions with full bandwidth matrices.

    ``rescaled=True`` normalizes the activations to sum to one at every
    input (partition of unity); normalization happens in the log domain so
    that far-away inputs never divide by zero.
    """

    centers: np.ndarray      # (K, d)
    bandwidths: np.ndarray   # (K, d, d), SPD
    rescaled: bool = True

    def __post_init__(self):
        centers = as_matrix(self.centers, "centers", allow_1d=True)
        bw = np.asarray(self.bandwidths, dtype=float)
        d = centers.shape[1]
        if bw.ndim == 0:
            bw = np.tile(float(bw) * np.eye(d), (centers.shape[0], 1, 1))
        elif bw.ndim == 2:
            bw = np.tile(bw, (centers.shape[0], 1, 1))
        if bw.shape != (centers.shape[0], d, d):
            raise ValueError("bandwidths must broadcast to (K, d, d)")
        for mat in bw:
            check_symmetric(mat, "bandwidth")
            try:
                np.linalg.cholesky(mat)
            except np.linalg.LinAlgError:
                raise ValueError("bandwidth matrices must be positive definite") from None
        centers = np.array(centers)
        centers.flags.writeable = False
        bw = np.array(bw)
        bw.flags.writeable = False
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "bandwidths", bw)

    @classmethod
    def uniform(cls, low, high, n_basis, bandwidth=None, rescaled=True):
        """Centers spread uniformly over a 1-D range with a shared isotropic
        bandwidth, by default ``((high - low) / K)^2``."""
        low, high = float(low), float(high)
        n_basis = int(n_basis)
        if n_basis < 1:
            raise ValueError("n_basis must be >= 1")
        if high <= low:
            raise ValueError("high must exceed low")
        centers = np.linspace(low, high, n_basis).reshape(-1, 1)
        if bandwidth is None:
            bandwidth = ((high - low) / n_basis) ** 2
        return cls(centers, float(bandwidth), rescaled=rescaled)

    @property
    def n_basis(self):
        return self.centers.shape[0]

    @property
    def dim(self):
        return self.centers.shape[1]

    def log_activations(self, X):
        X = as_matrix(X, "X", n_cols=self.dim, allow_1d=True)
        out = np.empty((X.shape[0], self.n_basis))
        for k in range(self.n_basis):
            diff = X - self.centers[k]
            sol = np.linalg.solve(self.bandwidths[k], diff.T)
            out[:, k] = -0.5 * np.sum(diff.T * sol, axis=0)
        return out

    def activations(self, X):
        """Unnormalized activations in (0, 1], shape (N, K)."""
        return np.exp(self.log_activations(X))

    def rescaled_activations(self, X):
        """Activations normalized to sum to 1 per row (log-domain safe)."""
        log_act = self.log_activations(X)
        return np.exp(log_act - logsumexp(log_act, axis=1, keepdims=True))

    def weights(self, X):
        """Fitting weights according to the ``rescaled`` flag."""
        return self.rescaled_activations(X) if self.rescaled else self.activations(X)


def polynomial_features(X, degree):
    """Per-dimension power expansion ``[1, x, x^2, ...]`` without cross terms."""
    X = as_matrix(X, "X", allow_1d=True)
    degree = int(degree)
    if degree < 0:
        raise ValueError("degree must be >= 0")
    cols = [np.ones((X.shape[0], 1))]
    cols.extend(X ** p for p in range(1, degree + 1))
    return np.hstack(cols)


class LWR(BaseEstimator, RegressorMixin):
    """Locally weighted polynomial regression estimator.

    Parameters
    ----------
    n_basis : int
        Number of radial basis functions (ignored when ``centers`` given).
    degree : int
        Degree of the local polynomial models.
    ridge : float or None
        Ridge added to every local normal matrix; ``None`` means the
        stabilizing default ``1e-9 * n_samples``.
    rescaled : bool
        Whether the *fitting* weights are normalized.  Predictions always
        blend with rescaled activations, which a weighted superposition
        needs in order to reproduce constants.
    centers, bandwidth : optional overrides
        Explicit centers (K, d) and a shared or per-basis bandwidth.
    """

    def __init__(self, n_basis=8, degree=1, ridge=None, rescaled=True,
                 centers=None, bandwidth=None):
        self.n_basis = n_basis
        self.degree = degree
        self.ridge = ridge
        self.rescaled = rescaled
        self.centers = centers
        self.bandwidth = bandwidth

    def _build_rbfs(self, X):
        if self.centers is not None:
            centers = as_matrix(self.centers, "centers", allow_1d=True)
            if self.bandwidth is None:
                span = X.max(axis=0) - X.min(axis=0)
                bandwidth = np.diag(
                    np.maximum(span / max(centers.shape[0], 1), 1e-12) ** 2
                )
            else:
                bandwidth = self.bandwidth
            return RbfSet(centers, np.asarray(bandwidth, dtype=float),
                          rescaled=self.rescaled)
        if X.shape[1] != 1:
            raise ValueError(
                "default uniform centers only cover 1-D inputs; pass "
                "explicit centers for multi-dimensional input"
            )
        return RbfSet.uniform(
            X.min(), X.max(), self.n_basis,
            bandwidth=self.bandwidth, rescaled=self.rescaled,
        )

    def fit(self, X, y):
        X = as_matrix(X, "X", allow_1d=True)
        y = np.asarray(y, dtype=float)
        self._y_was_1d = y.ndim == 1
        Y = y.reshape(-1, 1) if self._y_was_1d else as_matrix(y, "y")
        if Y.shape[0] != X.shape[0]:
            raise ValueError("X and y must agree on sample count")

        rbfs = self._build_rbfs(X)
        ridge = 1e-9 * X.shape[0] if self.ridge is None else float(self.ridge)
        features = polynomial_features(X, self.degree)
        weights = rbfs.weights(X)
        coef = np.empty((rbfs.n_basis, features.shape[1], Y.shape[1]))
        for k in range(rbfs.n_basis):
            try:
                coef[k] = weighted_least_squares(features, Y, weights[:, k], ridge)
            except SingularSystemError as err:
                raise SingularSystemError(f"basis {k}: {err}") from None
        self.rbfs_ = rbfs
        self.coef_ = coef
        self.ridge_ = ridge
        self.n_outputs_ = Y.shape[1]
        return self

    def predict(self, X):
        X = as_matrix(X, "X", n_cols=self.rbfs_.dim, allow_1d=True)
        act = self.rbfs_.rescaled_activations(X)
        features = polynomial_features(X, self.degree)
        out = np.einsum("nk,nf,kfp->np", act, features, self.coef_)
        return out.ravel() if self._y_was_1d and self.n_outputs_ == 1 else out


def lwr_to_dict(model):
    return {
        "version": "lwr-v1",
        "degree": int(model.degree),
        "rescaled": bool(model.rbfs_.rescaled),
        "centers": model.rbfs_.centers.tolist(),
        "bandwidths": model.rbfs_.bandwidths.tolist(),
        "coefficients": model.coef_.tolist(),
    }


def lwr_from_dict(data):
    if data.get("version") != "lwr-v1":
        raise ValueError(f"expected a lwr-v1 model, got {data.get('version')!r}")
    rbfs = RbfSet(
        np.asarray(data["centers"], dtype=float),
        np.asarray(data["bandwidths"], dtype=float),
        rescaled=bool(data["rescaled"]),
    )
    model = LWR(
        n_basis=rbfs.n_basis,
        degree=int(data["degree"]),
        rescaled=rbfs.rescaled,
    )
    model.rbfs_ = rbfs
    model.coef_ = np.asarray(data["coefficients"], dtype=float)
    model.n_outputs_ = model.coef_.shape[2]
    model._y_was_1d = False
    return model
