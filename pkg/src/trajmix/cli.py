"""Command-line front end tying the library into file-based workflows.

Exit codes: 0 on success, 2 on validation/usage errors, 3 on numerical
errors.  Every output is byte-deterministic for a fixed seed and inputs.
"""

import sys
from pathlib import Path

import click
import numpy as np

from . import bezier, ergodic, fourier, gaussians, gmr, io, lwr, plots, promp
from .datasets import TrajectorySet, make_trajectories
from .exceptions import NumericalError


@click.group()
@click.option("--seed", type=int, default=0, help="Seed for stochastic commands.")
@click.option("--out", "out_path", type=click.Path(), default=None,
              help="Default output path (overridable per command).")
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]),
              default="csv", help="Table output format.")
@click.option("--quiet", is_flag=True, help="Suppress progress messages.")
@click.option("--diagnostics", is_flag=True,
              help="Emit machine-readable JSON diagnostics on stderr.")
@click.pass_context
def cli(ctx, seed, out_path, fmt, quiet, diagnostics):
    """Mixture-model toolkit for continuous time series."""
    ctx.obj = {
        "seed": seed,
        "out": out_path,
        "format": fmt,
        "quiet": quiet,
        "diagnostics": diagnostics,
    }


def _info(ctx, message):
    if not ctx.obj["quiet"]:
        click.echo(message, err=True)


def _resolve_out(ctx, out):
    return out if out is not None else ctx.obj["out"]


def _emit_text(ctx, text, out):
    path = _resolve_out(ctx, out)
    if path is None:
        click.echo(text, nl=False)
    else:
        Path(path).write_text(text, encoding="utf-8")
        _info(ctx, f"wrote {path}")


def _emit_table(ctx, header, rows, out):
    if ctx.obj["format"] == "json":
        payload = {"header": list(header), "rows": [list(map(float, r)) for r in rows]}
        _emit_text(ctx, io.dumps_json(payload), out)
    else:
        _emit_text(ctx, io.format_table_csv(header, rows), out)


def _emit_model(ctx, model, out):
    _emit_text(ctx, io.dumps_json(io.model_to_dict(model)), out)


def _parse_dims(text):
    try:
        return tuple(int(v) for v in str(text).split(","))
    except ValueError:
        raise ValueError(f"could not parse dimension list {text!r}") from None


def _parse_range(text):
    try:
        lo, hi = (float(v) for v in str(text).split(":"))
    except ValueError:
        raise ValueError(f"could not parse range {text!r}; expected lo:hi") from None
    if hi <= lo:
        raise ValueError("range upper bound must exceed the lower bound")
    return lo, hi


def _data_matrix(path, with_time):
    ts = io.read_trajectories_csv(path)
    stacked = ts.stacked()
    return (stacked if with_time else stacked[:, 1:]), ts


# ---------------------------------------------------------------------------
# dataset
# ---------------------------------------------------------------------------

@cli.group()
def dataset():
    """Synthetic demonstration sets."""


@dataset.command("gen")
@click.option("--shape",
              type=click.Choice(["sine", "spiral", "handwriting-like-loops",
                                 "loops"]),
              default="sine")
@click.option("--demos", "n_demos", type=int, default=5)
@click.option("--steps", "n_steps", type=int, default=100)
@click.option("--dim", type=int, default=2)
@click.option("--noise", type=float, default=0.0)
@click.option("--out", type=click.Path(), default=None)
@click.pass_context
def dataset_gen(ctx, shape, n_demos, n_steps, dim, noise, out):
    """Generate a trajectory CSV."""
    ts = make_trajectories(shape, n_demos, n_steps, dim=dim, noise=noise,
                           seed=ctx.obj["seed"])
    _emit_text(ctx, io.format_trajectories_csv(ts), out)


# ---------------------------------------------------------------------------
# gmm / gmr
# ---------------------------------------------------------------------------

@cli.group()
def gmm():
    """Gaussian mixture models."""


@gmm.command("fit")
@click.option("--data", type=click.Path(exists=True), required=True)
@click.option("--k", "n_components", type=int, default=3)
@click.option("--init", type=click.Choice(["time_binning", "kmeans++"]),
              default="time_binning")
@click.option("--max-iter", type=int, default=200)
@click.option("--tol", type=float, default=1e-8)
@click.option("--with-time/--no-time", default=True,
              help="Prepend the time stamp as datapoint dimension 0.")
@click.option("--out", type=click.Path(), default=None)
@click.pass_context
def gmm_fit(ctx, data, n_components, init, max_iter, tol, with_time, out):
    """Fit a joint GMM to the rows of a trajectory CSV."""
    X, _ = _data_matrix(data, with_time)
    result = gaussians.em_fit(X, n_components, init=init, seed=ctx.obj["seed"],
                              max_iter=max_iter, tol=tol)
    _info(ctx, f"log-likelihood {result.log_likelihoods[-1]:.6g} "
               f"after {len(result.log_likelihoods)} iterations")
    _emit_model(ctx, result.model, out)


@cli.group("gmr")
def gmr_group():
    """Gaussian mixture regression."""


@gmr_group.command("predict")
@click.option("--model", "model_path", type=click.Path(exists=True), required=True)
@click.option("--in", "in_dims", default="0",
              help="Input dimension indices, e.g. '0' or '0,1'.")
@click.option("--out", "out_dims", default=None,
              help="Output dimension indices; default: all remaining.")
@click.option("--query", type=click.Path(exists=True), default=None,
              help="Headerless CSV of query points (one per row).")
@click.option("--grid", type=int, default=None,
              help="Number of uniform 1-D query points over --range.")
@click.option("--range", "grid_range", default="0:1")
@click.pass_context
def gmr_predict(ctx, model_path, in_dims, out_dims, query, grid, grid_range):
    """Conditional means and standard deviations of a joint GMM.

    The table destination is the global --out option.
    """
    model = io.load_model(model_path)
    if not isinstance(model, gaussians.MixtureModel):
        raise ValueError("gmr predict needs a gmm-v1 model")
    input_dims = _parse_dims(in_dims)
    output_dims = _parse_dims(out_dims) if out_dims is not None else None
    est = gmr.GMR.from_model(model, input_dims, output_dims)
    if query is not None:
        rows = [line.split(",") for line in
                Path(query).read_text(encoding="utf-8").splitlines() if line]
        X = np.asarray([[float(v) for v in row] for row in rows])
    elif grid is not None:
        if len(input_dims) != 1:
            raise ValueError("--grid needs a single input dimension")
        lo, hi = _parse_range(grid_range)
        X = np.linspace(lo, hi, grid).reshape(-1, 1)
    else:
        raise ValueError("provide either --query or --grid")
    header = (
        [f"in{d}" for d in est.split_.input_dims]
        + [f"mean{d}" for d in est.split_.output_dims]
        + [f"std{d}" for d in est.split_.output_dims]
    )
    rows = []
    for x in X:
        g = est.conditional_gaussian(x)
        rows.append(list(x) + list(g.mean) + list(np.sqrt(np.diag(g.cov))))
    _emit_table(ctx, header, rows, None)


# ---------------------------------------------------------------------------
# lwr
# ---------------------------------------------------------------------------

@cli.group("lwr")
def lwr_group():
    """Locally weighted regression."""


@lwr_group.command("fit")
@click.option("--data", type=click.Path(exists=True), required=True)
@click.option("--k", "n_basis", type=int, default=8)
@click.option("--degree", type=int, default=1)
@click.option("--ridge", type=float, default=None)
@click.option("--rescaled/--no-rescaled", default=True)
@click.option("--out", type=click.Path(), default=None)
@click.pass_context
def lwr_fit(ctx, data, n_basis, degree, ridge, rescaled, out):
    """Fit time -> value locally weighted regression on a trajectory CSV."""
    ts = io.read_trajectories_csv(data)
    stacked = ts.stacked()
    model = lwr.LWR(n_basis=n_basis, degree=degree, ridge=ridge,
                    rescaled=rescaled)
    model.fit(stacked[:, :1], stacked[:, 1:])
    _emit_model(ctx, model, out)


@lwr_group.command("predict")
@click.option("--model", "model_path", type=click.Path(exists=True), required=True)
@click.option("--grid", type=int, default=200)
@click.option("--range", "grid_range", default="0:1")
@click.option("--out", type=click.Path(), default=None)
@click.pass_context
def lwr_predict(ctx, model_path, grid, grid_range, out):
    """Evaluate a fitted model on a uniform grid."""
    model = io.load_model(model_path)
    if not isinstance(model, lwr.LWR):
        raise ValueError("lwr predict needs a lwr-v1 model")
    lo, hi = _parse_range(grid_range)
    t = np.linspace(lo, hi, grid).reshape(-1, 1)
    pred = np.atleast_2d(model.predict(t))
    header = ["t"] + [f"y{d + 1}" for d in range(pred.shape[1])]
    rows = [list(ti) + list(row) for ti, row in zip(t, pred)]
    _emit_table(ctx, header, rows, out)


# ---------------------------------------------------------------------------
# bezier
# ---------------------------------------------------------------------------

@cli.group("bezier")
def bezier_group():
    """Bezier curves."""


@bezier_group.command("eval")
@click.option("--curve", "curve_path", type=click.Path(exists=True), required=True)
@click.option("--samples", type=int, default=200)
@click.option("--method", type=click.Choice(["de_casteljau", "direct"]),
              default="de_casteljau")
@click.option("--out", type=click.Path(), default=None)
@click.pass_context
def bezier_eval(ctx, curve_path, samples, method, out):
    """Sample a curve uniformly on [0, 1]."""
    curve = io.load_model(curve_path)
    if not isinstance(curve, bezier.BezierCurve):
        raise ValueError("bezier eval needs a bezier-v1 model")
    t = np.linspace(0.0, 1.0, samples)
    pts = curve.evaluate(t, method=method)
    header = ["t"] + [f"x{d + 1}" for d in range(curve.dim)]
    rows = [[ti, *row] for ti, row in zip(t, pts)]
    _emit_table(ctx, header, rows, out)


@bezier_group.command("fit")
@click.option("--data", type=click.Path(exists=True), required=True)
@click.option("--degree", type=int, default=3)
@click.option("--traj-id", type=int, default=0)
@click.option("--clamp-ends", is_flag=True)
@click.option("--out", type=click.Path(), default=None)
@click.pass_context
def bezier_fit(ctx, data, degree, traj_id, clamp_ends, out):
    """Fit control points to one trajectory of a CSV."""
    ts = io.read_trajectories_csv(data)
    if not 0 <= traj_id < ts.n_demos:
        raise ValueError(f"traj-id {traj_id} out of range [0, {ts.n_demos})")
    curve = bezier.fit_bezier(ts.times[traj_id], ts.values[traj_id], degree,
                              clamp_ends=clamp_ends)
    _emit_model(ctx, curve, out)


# ---------------------------------------------------------------------------
# fourier / ergodic
# ---------------------------------------------------------------------------

@cli.group("fourier")
def fourier_group():
    """Fourier decompositions of mixture densities."""


@fourier_group.command("coeffs")
@click.option("--model", "model_path", type=click.Path(exists=True), required=True)
@click.option("--period", type=float, required=True)
@click.option("--k", "n_coeffs", type=int, default=9)
@click.option("--out", type=click.Path(), default=None)
@click.pass_context
def fourier_coeffs(ctx, model_path, period, n_coeffs, out):
    """Analytic coefficients of the mirrored mixture density."""
    model = io.load_model(model_path)
    if not isinstance(model, gaussians.MixtureModel):
        raise ValueError("fourier coeffs needs a gmm-v1 model")
    dom = fourier.FourierDomain(period, model.dim, n_coeffs)
    coeffs = fourier.mixture_coeffs(model, dom)
    _emit_text(ctx, io.format_coeffs_csv(coeffs, dom), out)


@cli.group("ergodic")
def ergodic_group():
    """Spectral ergodic control."""


@ergodic_group.command("simulate")
@click.option("--config", "config_path", type=click.Path(exists=True),
              required=True)
@click.option("--out", type=click.Path(), default=None,
              help="Trajectory CSV (step, x1..xD, epsilon).")
@click.option("--coeffs", "coeffs_path", type=click.Path(), default=None,
              help="Also write the final trajectory coefficients as CSV.")
@click.option("--plot", "plot_path", type=click.Path(), default=None,
              help="Also write an SVG of the trajectory.")
@click.pass_context
def ergodic_simulate(ctx, config_path, out, coeffs_path, plot_path):
    """Run the closed-loop controller described by a config JSON."""
    cfg, x0 = ergodic.run_from_dict(io.load_json(config_path))
    result = ergodic.simulate(cfg, x0)
    header = (["step"] + [f"x{d + 1}" for d in range(cfg.domain.dim)]
              + ["epsilon"])
    rows = [
        [float(s + 1), *result.positions[s], result.metrics[s]]
        for s in range(cfg.steps)
    ]
    _emit_table(ctx, header, rows, out)
    if coeffs_path is not None:
        io.write_coeffs_csv(result.state.traj_coeffs, cfg.domain, coeffs_path)
        _info(ctx, f"wrote {coeffs_path}")
    if plot_path is not None:
        ts = TrajectorySet(
            (np.arange(1, cfg.steps + 1, dtype=float),),
            (result.positions,),
        )
        plots.save_figure(plots.trajectory_figure(ts, title="ergodic trajectory"),
                          plot_path)
        _info(ctx, f"wrote {plot_path}")


# ---------------------------------------------------------------------------
# promp
# ---------------------------------------------------------------------------

@cli.group("promp")
def promp_group():
    """Probabilistic movement primitives."""


def _parse_via(spec):
    try:
        head, _, noise_part = spec.partition("@")
        target, _, value_part = head.partition("=")
        t_part, _, dim_part = target.partition(":")
        t_index = int(t_part)
        dims = tuple(int(v) for v in dim_part.split(","))
        values = tuple(float(v) for v in value_part.split(","))
        noise = float(noise_part) if noise_part else 1e-10
    except ValueError:
        raise ValueError(
            f"could not parse via-point {spec!r}; expected t:dim=value@noise"
        ) from None
    if len(dims) != len(values):
        raise ValueError(f"via-point {spec!r}: {len(dims)} dims but "
                         f"{len(values)} values")
    return promp.ViaPoint(t_index, dims, np.asarray(values), noise)


@promp_group.command("fit")
@click.option("--data", type=click.Path(exists=True), required=True)
@click.option("--basis", type=click.Choice(["radial", "bernstein", "fourier"]),
              default="radial")
@click.option("--k", "n_basis", type=int, default=10)
@click.option("--steps", "n_timesteps", type=int, default=None)
@click.option("--out", type=click.Path(), default=None)
@click.pass_context
def promp_fit(ctx, data, basis, n_basis, n_timesteps, out):
    """Fit a movement primitive to all demos of a trajectory CSV."""
    ts = io.read_trajectories_csv(data)
    model = promp.ProMP(basis=basis, n_basis=n_basis, n_timesteps=n_timesteps)
    model.fit(ts)
    _emit_model(ctx, model, out)


@promp_group.command("sample")
@click.option("--model", "model_path", type=click.Path(exists=True), required=True)
@click.option("--n", "n_samples", type=int, default=5)
@click.option("--out", type=click.Path(), default=None)
@click.pass_context
def promp_sample(ctx, model_path, n_samples, out):
    """Draw trajectories from a fitted movement primitive."""
    model = io.load_model(model_path)
    if not isinstance(model, promp.ProMP):
        raise ValueError("promp sample needs a promp-v1 model")
    draws = model.sample(n_samples, seed=ctx.obj["seed"])
    ts = TrajectorySet(tuple(model.times_ for _ in draws), tuple(draws))
    _emit_text(ctx, io.format_trajectories_csv(ts), out)


@promp_group.command("condition")
@click.option("--model", "model_path", type=click.Path(exists=True), required=True)
@click.option("--via", "via_specs", multiple=True, required=True,
              help="Repeatable constraint t_index:dim=value@noise.")
@click.option("--out", type=click.Path(), default=None)
@click.pass_context
def promp_condition(ctx, model_path, via_specs, out):
    """Condition on via-points; emits the mean and std per time step."""
    model = io.load_model(model_path)
    if not isinstance(model, promp.ProMP):
        raise ValueError("promp condition needs a promp-v1 model")
    constraints = [_parse_via(spec) for spec in via_specs]
    dist = model.condition_via_points(constraints)
    mean = dist.mean.reshape(model.T_, model.D_)
    std = np.sqrt(np.diag(dist.cov)).reshape(model.T_, model.D_)
    header = (["t"] + [f"x{d + 1}" for d in range(model.D_)]
              + [f"std{d + 1}" for d in range(model.D_)])
    rows = [
        [model.times_[i], *mean[i], *std[i]] for i in range(model.T_)
    ]
    _emit_table(ctx, header, rows, out)


@promp_group.command("mixture")
@click.option("--data", type=click.Path(exists=True), required=True)
@click.option("--j", "n_components", type=int, default=2)
@click.option("--basis", type=click.Choice(["radial", "bernstein", "fourier"]),
              default="radial")
@click.option("--k", "n_basis", type=int, default=10)
@click.option("--steps", "n_timesteps", type=int, default=None)
@click.option("--out", type=click.Path(), default=None)
@click.pass_context
def promp_mixture_cmd(ctx, data, n_components, basis, n_basis, n_timesteps, out):
    """Fit a mixture of movement primitives."""
    ts = io.read_trajectories_csv(data)
    mix = promp.fit_promp_mixture(ts, n_components, basis=basis,
                                  n_basis=n_basis, n_timesteps=n_timesteps,
                                  seed=ctx.obj["seed"])
    payload = {
        "version": "promp-mixture-v1",
        "priors": mix.priors.tolist(),
        "components": [io.model_to_dict(c) for c in mix.components],
    }
    _emit_text(ctx, io.dumps_json(payload), out)


# ---------------------------------------------------------------------------
# plot
# ---------------------------------------------------------------------------

@cli.command("plot")
@click.option("--kind", type=click.Choice(
    ["trajectory", "coeff-heatmap", "basis-functions", "covariance-matrix"]),
    required=True)
@click.option("--data", type=click.Path(exists=True), default=None,
              help="Trajectory or coefficient CSV, depending on --kind.")
@click.option("--model", "model_path", type=click.Path(exists=True), default=None,
              help="Model JSON for covariance-matrix plots.")
@click.option("--basis", type=click.Choice(["radial", "bernstein", "fourier"]),
              default="radial")
@click.option("--k", "n_basis", type=int, default=5)
@click.option("--out", type=click.Path(), default=None)
@click.pass_context
def plot_cmd(ctx, kind, data, model_path, basis, n_basis, out):
    """Render an SVG figure."""
    path = _resolve_out(ctx, out)
    if path is None:
        raise ValueError("plot needs an output path (--out)")
    if kind == "trajectory":
        if data is None:
            raise ValueError("--kind trajectory needs --data")
        ts = io.read_trajectories_csv(data, allow_empty=True)
        svg = plots.trajectory_figure(ts)
    elif kind == "coeff-heatmap":
        if data is None:
            raise ValueError("--kind coeff-heatmap needs --data")
        values, ks = io.read_coeffs_csv(data)
        svg = plots.coefficients_figure(values, ks)
    elif kind == "basis-functions":
        family = promp.make_basis(basis, n_basis)
        svg = plots.basis_figure(family)
    else:  # covariance-matrix
        if model_path is None:
            raise ValueError("--kind covariance-matrix needs --model")
        model = io.load_model(model_path)
        if isinstance(model, promp.ProMP):
            cov = model.trajectory_distribution().cov
        elif isinstance(model, gaussians.MixtureModel):
            cov = model.moment_matched().cov
        else:
            raise ValueError("covariance-matrix supports promp-v1 and gmm-v1")
        svg = plots.heatmap_figure(cov, title="trajectory covariance")
    plots.save_figure(svg, path)
    _info(ctx, f"wrote {path}")


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def _diagnostics_requested(argv):
    args = sys.argv[1:] if argv is None else argv
    return "--diagnostics" in args


def _emit_diagnostics(argv, status, kind, message, code):
    if _diagnostics_requested(argv):
        payload = {"status": status, "kind": kind, "message": message,
                   "exit_code": code}
        click.echo(io.dumps_json(payload), nl=False, err=True)


def main(argv=None):
    """Console entry point returning the process exit code."""
    try:
        cli.main(args=argv, prog_name="trajmix", standalone_mode=False)
    except click.UsageError as err:
        err.show()
        _emit_diagnostics(argv, "error", "usage", err.format_message(), 2)
        return 2
    except click.ClickException as err:
        err.show()
        _emit_diagnostics(argv, "error", "usage", err.format_message(), 2)
        return 2
    except click.exceptions.Abort:
        return 1
    except ValueError as err:
        click.echo(f"error: {err}", err=True)
        _emit_diagnostics(argv, "error", "validation", str(err), 2)
        return 2
    except NumericalError as err:
        click.echo(f"numerical error: {err}", err=True)
        _emit_diagnostics(argv, "error", "numerical", str(err), 3)
        return 3
    _emit_diagnostics(argv, "ok", "none", "", 0)
    return 0


if __name__ == "__main__":
    sys.exit(main())
