"""Input validation helpers used by the estimators and core types."""

import numpy as np


def as_vector(x, name="x", dim=None):
    """Coerce to a 1-D float array, optionally checking its length."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be a vector, got shape {arr.shape}")
    if dim is not None and arr.shape[0] != dim:
        raise ValueError(f"{name} must have length {dim}, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def as_matrix(X, name="X", n_cols=None, allow_1d=False):
    """Coerce to a 2-D float array of shape (n_samples, n_cols)."""
    arr = np.asarray(X, dtype=float)
    if arr.ndim == 1 and allow_1d:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {arr.shape}")
    if n_cols is not None and arr.shape[1] != n_cols:
        raise ValueError(f"{name} must have {n_cols} columns, got {arr.shape[1]}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def check_symmetric(S, name="matrix", rtol=1e-12):
    """Raise if ``S`` deviates from symmetry by more than ``rtol`` relatively."""
    scale = max(1.0, float(np.max(np.abs(S))))
    if float(np.max(np.abs(S - S.T))) > rtol * scale:
        raise ValueError(f"{name} is not symmetric within relative tolerance {rtol}")


def as_index_list(dims, n_dims, name="dims"):
    """Coerce to a tuple of unique, in-range dimension indices."""
    idx = tuple(int(d) for d in np.atleast_1d(dims))
    if len(idx) == 0:
        raise ValueError(f"{name} must not be empty")
    if len(set(idx)) != len(idx):
        raise ValueError(f"{name} contains duplicate indices: {idx}")
    for d in idx:
        if d < 0 or d >= n_dims:
            raise ValueError(f"{name} index {d} out of range for dimension {n_dims}")
    return idx


def check_unit_interval(t, name="t"):
    """Raise unless every value of ``t`` lies in [0, 1]."""
    arr = np.asarray(t, dtype=float)
    if np.any(arr < 0.0) or np.any(arr > 1.0):
        raise ValueError(f"{name} must lie in [0, 1]")
    return arr


def check_positive(value, name="value"):
    value = float(value)
    if not value > 0:
        raise ValueError(f"{name} must be positive, got {value}")
    return value
