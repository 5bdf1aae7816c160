"""Demonstration containers and synthetic dataset generators.

The generators are deterministic under their seed and produce the shapes
used across the docs and tests: multi-phase sines, a planar spiral, and a
loopy handwriting-like stroke.
"""

from dataclasses import dataclass

import numpy as np

from .validation import as_matrix, as_vector


@dataclass(frozen=True)
class TrajectorySet:
    """A list of demonstrations, each ``(T_m, D)`` with its time stamps."""

    times: tuple    # of (T_m,) arrays, strictly increasing each
    values: tuple   # of (T_m, D) arrays

    def __post_init__(self):
        times = tuple(as_vector(t, "times") for t in self.times)
        values = tuple(as_matrix(v, "values", allow_1d=True) for v in self.values)
        if len(times) != len(values) or not times:
            raise ValueError("need matching, non-empty times and values lists")
        dim = values[0].shape[1]
        for t, v in zip(times, values):
            if t.shape[0] != v.shape[0]:
                raise ValueError("times and values length mismatch in a demo")
            if v.shape[1] != dim:
                raise ValueError("all demos must share the same dimension")
            if np.any(np.diff(t) <= 0):
                raise ValueError("time stamps must be strictly increasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    @property
    def n_demos(self):
        return len(self.values)

    @property
    def dim(self):
        return self.values[0].shape[1]

    @classmethod
    def from_array(cls, values, times=None):
        """Build from an (M, T, D) stack with shared (or default) stamps."""
        values = np.asarray(values, dtype=float)
        if values.ndim == 2:
            values = values[None]
        if values.ndim != 3:
            raise ValueError("values must be (M, T, D)")
        if times is None:
            times = np.linspace(0.0, 1.0, values.shape[1])
        times = as_vector(times, "times", values.shape[1])
        return cls(tuple(times for _ in values), tuple(v for v in values))

    def stacked(self):
        """All rows as one (sum_m T_m, 1 + D) array of (t, x) points."""
        return np.vstack(
            [np.column_stack([t, v]) for t, v in zip(self.times, self.values)]
        )


def _sine_signal(t, dim):
    # Dimension d is a quarter-period phase shift of the base sine.
    phases = np.pi / 2.0 * np.arange(dim)
    return np.sin(2.0 * np.pi * t[:, None] + phases)


def _spiral_signal(t):
    radius = 0.1 + 0.8 * t
    angle = 4.0 * np.pi * t
    return np.column_stack([radius * np.cos(angle), radius * np.sin(angle)])


def _loops_signal(t):
    x = 2.0 * t - 1.0 + 0.1 * np.cos(6.0 * np.pi * t)
    y = 0.25 * np.sin(6.0 * np.pi * t) + 0.1 * np.sin(2.0 * np.pi * t)
    return np.column_stack([x, y])


def make_trajectories(shape, n_demos, n_steps, dim=2, noise=0.0, seed=0):
    """Generate a demonstration set of the given shape.

    ``sine`` supports any dimension; ``spiral`` and ``loops`` are planar.
    ``noise`` is the standard deviation of i.i.d. Gaussian perturbations
    added to every sample.
    """
    n_demos = int(n_demos)
    n_steps = int(n_steps)
    dim = int(dim)
    if n_demos < 1 or n_steps < 2:
        raise ValueError("need n_demos >= 1 and n_steps >= 2")
    if shape == "handwriting-like-loops":
        shape = "loops"
    if shape == "sine":
        if dim < 1:
            raise ValueError("sine needs dim >= 1")
        base = lambda t: _sine_signal(t, dim)
    elif shape == "spiral":
        if dim != 2:
            raise ValueError("spiral is planar; use dim=2")
        base = _spiral_signal
    elif shape == "loops":
        if dim != 2:
            raise ValueError("loops is planar; use dim=2")
        base = _loops_signal
    else:
        raise ValueError(f"unknown shape: {shape!r}")

    rng = np.random.default_rng(int(seed))
    t = np.linspace(0.0, 1.0, n_steps)
    demos = []
    for _ in range(n_demos):
        signal = base(t)
        if noise > 0.0:
            signal = signal + rng.normal(0.0, noise, size=signal.shape)
        demos.append(signal)
    return TrajectorySet(tuple(t for _ in demos), tuple(demos))
