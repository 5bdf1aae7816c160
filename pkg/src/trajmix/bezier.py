"""Bernstein polynomials and Bezier curves of arbitrary degree.

Evaluation is available both as the direct basis-weighted sum and through
the pairwise-interpolation recursion; the recursion is the default because
it stays stable at high degree.  Binomial coefficients are built by the
multiplicative recurrence in floating point, since factorials overflow
integer arithmetic past n = 20.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import lstsq

from .exceptions import SingularSystemError
from .validation import as_matrix, check_unit_interval


def binomial_coefficients(n):
    """All binomial coefficients of order ``n`` as floats."""
    if n < 0:
        raise ValueError("n must be >= 0")
    out = np.empty(n + 1)
    out[0] = 1.0
    for i in range(1, n + 1):
        out[i] = out[i - 1] * (n - i + 1) / i
    return out


def bernstein(n, i, t):
    """Bernstein basis polynomial ``b_{i,n}`` at ``t`` (scalar or array)."""
    n = int(n)
    i = int(i)
    if not 0 <= i <= n:
        raise ValueError(f"index i={i} out of range for degree n={n}")
    t = check_unit_interval(t, "t")
    coeff = binomial_coefficients(n)[i]
    return coeff * (1.0 - t) ** (n - i) * t ** i


def bernstein_matrix(n, t):
    """Matrix of all ``n+1`` Bernstein polynomials at times ``t``, (T, n+1)."""
    t = np.atleast_1d(check_unit_interval(t, "t"))
    coeffs = binomial_coefficients(n)
    i = np.arange(n + 1)
    return coeffs * (1.0 - t[:, None]) ** (n - i) * t[:, None] ** i


def de_casteljau(points, t):
    """Evaluate by repeated pairwise linear interpolation of the polygon."""
    b = np.array(points, dtype=float)
    n = b.shape[0] - 1
    for _ in range(n):
        b = (1.0 - t) * b[:-1] + t * b[1:]
    return b[0]


@dataclass(frozen=True)
class BezierCurve:
    """Polynomial curve defined by an ordered control polygon."""

    control_points: np.ndarray  # (n+1, D)

    def __post_init__(self):
        pts = as_matrix(self.control_points, "control_points", allow_1d=False)
        if pts.shape[0] < 2:
            raise ValueError("a Bezier curve needs at least two control points")
        pts = np.array(pts)
        pts.flags.writeable = False
        object.__setattr__(self, "control_points", pts)

    @property
    def degree(self):
        return self.control_points.shape[0] - 1

    @property
    def dim(self):
        return self.control_points.shape[1]

    def evaluate(self, t, method="de_casteljau"):
        """Point on the curve at ``t`` in [0, 1].

        Scalar ``t`` gives a (D,) point, an array gives (T, D).  Values
        outside [0, 1] are rejected; the curve is not extrapolated.
        """
        t_arr = np.atleast_1d(check_unit_interval(t, "t"))
        if method == "direct":
            out = bernstein_matrix(self.degree, t_arr) @ self.control_points
        elif method == "de_casteljau":
            out = np.array([de_casteljau(self.control_points, ti) for ti in t_arr])
        else:
            raise ValueError(f"unknown evaluation method: {method!r}")
        return out[0] if np.ndim(t) == 0 else out

    def reversed(self):
        return BezierCurve(self.control_points[::-1])

    def elevated(self):
        """Equivalent curve of degree n+1 (convex-combination elevation)."""
        n = self.degree
        pts = self.control_points
        new = np.empty((n + 2, self.dim))
        new[0] = pts[0]
        new[n + 1] = pts[n]
        i = np.arange(1, n + 1)[:, None]
        new[1:-1] = i / (n + 1) * pts[:-1] + (1.0 - i / (n + 1)) * pts[1:]
        return BezierCurve(new)


def fit_bezier(times, points, degree, clamp_ends=False):
    """Least-squares control points for sampled positions.

    Time stamps are rescaled affinely to [0, 1] before fitting.  With
    ``clamp_ends`` the first and last control points are pinned to the first
    and last samples and only the interior polygon is solved for.
    """
    times = np.asarray(times, dtype=float).ravel()
    points = as_matrix(points, "points", allow_1d=True)
    degree = int(degree)
    if degree < 1:
        raise ValueError("degree must be >= 1")
    if times.shape[0] != points.shape[0]:
        raise ValueError("times and points must have the same length")
    if times.shape[0] < degree + 1:
        raise ValueError(f"need at least {degree + 1} samples for degree {degree}")
    span = times.max() - times.min()
    if span <= 0.0:
        raise SingularSystemError("all time stamps are identical")
    t = (times - times.min()) / span

    basis = bernstein_matrix(degree, t)
    if clamp_ends:
        first, last = points[0], points[-1]
        if degree == 1:
            return BezierCurve(np.vstack([first, last]))
        target = points - np.outer(basis[:, 0], first) - np.outer(basis[:, -1], last)
        interior, _, rank, _ = lstsq(basis[:, 1:-1], target)
        if rank < degree - 1:
            raise SingularSystemError("rank-deficient Bernstein design matrix")
        ctrl = np.vstack([first, interior, last])
    else:
        ctrl, _, rank, _ = lstsq(basis, points)
        if rank < degree + 1:
            raise SingularSystemError("rank-deficient Bernstein design matrix")
    return BezierCurve(ctrl)


def curve_to_dict(curve):
    return {
        "version": "bezier-v1",
        "control_points": curve.control_points.tolist(),
    }


def curve_from_dict(data):
    if data.get("version") != "bezier-v1":
        raise ValueError(f"expected a bezier-v1 model, got {data.get('version')!r}")
    return BezierCurve(np.asarray(data["control_points"], dtype=float))
