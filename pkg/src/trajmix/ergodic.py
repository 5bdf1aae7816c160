"""Single-agent spectral-multiscale ergodic controller.

The controller drives a point agent with velocity commands so that the
running spectral statistics of its trajectory match the coefficients of a
target spatial density.  The mismatch is measured by a Sobolev-like weighted
quadratic metric over the coefficient array; the control law is the analytic
minimizer of the one-step-ahead metric, clamped to a maximum speed.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .fourier import FourierDomain, basis_vector, grad_basis_matrix, mixture_coeffs
from .gaussians import mixture_from_dict, mixture_to_dict
from .validation import as_vector, check_positive

# Below this norm the raw command is treated as zero instead of normalized.
ZERO_COMMAND_NORM = 1e-12


def sobolev_weights(dom):
    """Per-coefficient weights ``(1 + |k|^2)^(-(D+1)/2)``.

    They emphasize low spatial frequencies; the zero index gets weight 1 and
    the weights decrease monotonically with the index norm.
    """
    idx = dom.index_set()
    return (1.0 + (idx ** 2).sum(axis=1)) ** (-(dom.dim + 1) / 2.0)


@dataclass(frozen=True)
class ErgodicConfig:
    """Static configuration of one ergodic-control run.

    ``dt`` may be zero (a stationary run); ``u_max`` is the speed of every
    nonzero command.  ``weights`` defaults to :func:`sobolev_weights`.
    """

    domain: FourierDomain
    target_coeffs: np.ndarray
    u_max: float
    dt: float
    steps: int
    weights: np.ndarray = None
    seed: int = 0

    def __post_init__(self):
        check_positive(self.u_max, "u_max")
        if float(self.dt) < 0:
            raise ValueError("dt must be >= 0")
        if int(self.steps) < 0:
            raise ValueError("steps must be >= 0")
        target = as_vector(self.target_coeffs, "target_coeffs", self.domain.n_total)
        weights = self.weights
        if weights is None:
            weights = sobolev_weights(self.domain)
        weights = as_vector(weights, "weights", self.domain.n_total)
        if np.any(weights <= 0.0) or np.any(weights > 1.0 + 1e-12):
            raise ValueError("weights must lie in (0, 1]")
        object.__setattr__(self, "target_coeffs", target)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "u_max", float(self.u_max))
        object.__setattr__(self, "dt", float(self.dt))
        object.__setattr__(self, "steps", int(self.steps))
        object.__setattr__(self, "seed", int(self.seed))


@dataclass
class ErgodicState:
    """Mutable per-run state: position, step counter and running coefficients.

    ``traj_coeffs`` is the running average of the basis vector over all
    positions folded in so far (the zero array before the first update).
    """

    position: np.ndarray
    step: int
    traj_coeffs: np.ndarray
    history: list = field(default_factory=list)

    @classmethod
    def initial(cls, dom, x0, keep_history=True):
        x0 = as_vector(x0, "x0", dom.dim)
        if not dom.contains(x0):
            raise ValueError("x0 must lie inside [-L/2, L/2]^D")
        return cls(
            position=x0.copy(),
            step=0,
            traj_coeffs=np.zeros(dom.n_total),
            history=[] if keep_history else None,
        )


def update_coeffs(state, x_new, dom):
    """Fold a new position into the running coefficient average (in place).

    Positions outside the domain are clamped with a warning.  Returns the
    updated state for convenience.
    """
    x_new = as_vector(x_new, "x_new", dom.dim)
    if not dom.contains(x_new):
        warnings.warn("position outside the domain was clamped", stacklevel=2)
        x_new = np.clip(x_new, -dom.half_width, dom.half_width)
    phi = basis_vector(x_new, dom)
    t = state.step
    state.traj_coeffs = (t * state.traj_coeffs + phi) / (t + 1)
    state.step = t + 1
    state.position = x_new.copy()
    if state.history is not None:
        state.history.append(x_new.copy())
    return state


def ergodic_metric(traj_coeffs, target_coeffs, weights):
    """Weighted half squared distance between the coefficient arrays."""
    diff = np.asarray(traj_coeffs) - np.asarray(target_coeffs)
    return 0.5 * float(np.sum(np.asarray(weights) * diff * diff))


def control_step(state, cfg):
    """Velocity command at the current state, plus the current metric.

    The raw command is the negative weighted-gradient combination of the
    coefficient gaps; any nonzero command is rescaled to speed ``u_max``.
    Before the first coefficient update the running array is all zeros.
    """
    w = state.traj_coeffs
    gap = cfg.weights * (w - cfg.target_coeffs)
    grad = grad_basis_matrix(state.position, cfg.domain)  # (n_total, D)
    raw = -grad.T @ gap
    norm = float(np.linalg.norm(raw))
    if norm < ZERO_COMMAND_NORM:
        u = np.zeros(cfg.domain.dim)
    else:
        u = raw * (cfg.u_max / norm)
    return u, ergodic_metric(w, cfg.target_coeffs, cfg.weights)


@dataclass(frozen=True)
class SimulationResult:
    positions: np.ndarray   # (steps, D)
    metrics: np.ndarray     # (steps,) metric after each coefficient update
    state: ErgodicState


def simulate(cfg, x0, keep_history=True):
    """Run the closed loop: command, Euler step, clamp, coefficient update.

    Row ``s`` of the result holds the position after step ``s+1`` and the
    metric of the running coefficients over the first ``s+1`` positions.
    Fully deterministic for a given configuration and start point.
    """
    state = ErgodicState.initial(cfg.domain, x0, keep_history=keep_history)
    half = cfg.domain.half_width
    positions = np.empty((cfg.steps, cfg.domain.dim))
    metrics = np.empty(cfg.steps)
    for s in range(cfg.steps):
        u, _ = control_step(state, cfg)
        x = np.clip(state.position + cfg.dt * u, -half, half)
        update_coeffs(state, x, cfg.domain)
        positions[s] = x
        metrics[s] = ergodic_metric(state.traj_coeffs, cfg.target_coeffs, cfg.weights)
    return SimulationResult(positions, metrics, state)


# ---------------------------------------------------------------------------
# Run configuration files ("ergodic-v1")
# ---------------------------------------------------------------------------

def run_to_dict(cfg, x0, target_mixture):
    return {
        "version": "ergodic-v1",
        "dim": cfg.domain.dim,
        "period": cfg.domain.period,
        "n_coeffs": cfg.domain.n_coeffs,
        "u_max": cfg.u_max,
        "dt": cfg.dt,
        "steps": cfg.steps,
        "seed": cfg.seed,
        "x0": list(np.asarray(x0, dtype=float)),
        "target": mixture_to_dict(target_mixture),
    }


def run_from_dict(data):
    """Build (config, x0) from an ergodic-v1 document; the target
    coefficients are computed from the embedded mixture."""
    if data.get("version") != "ergodic-v1":
        raise ValueError(f"expected an ergodic-v1 config, got {data.get('version')!r}")
    dom = FourierDomain(float(data["period"]), int(data["dim"]),
                        int(data["n_coeffs"]))
    target = mixture_from_dict(data["target"])
    cfg = ErgodicConfig(
        domain=dom,
        target_coeffs=mixture_coeffs(target, dom),
        u_max=float(data["u_max"]),
        dt=float(data["dt"]),
        steps=int(data["steps"]),
        seed=int(data.get("seed", 0)),
    )
    return cfg, np.asarray(data["x0"], dtype=float)
