"""Batch command-line interface.

Subcommands cover the individual pipeline stages (``simulate``, ``ingest``,
``analyze``, ``reconstruct``, ``plotdata``) and a one-shot ``run`` that
executes everything and writes a manifest sufficient to reproduce the run
bit-for-bit.  Exit codes: 0 success, 2 configuration error, 3 data error,
4 numeric failure.
"""

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from ._validation import midpoints
from .clustering import cluster_transitions, detect_gap, embed, kmeans
from .dictionaries import make_gaussian, make_indicator
from .errors import (
    ConfigError,
    DataError,
    DegeneracyError,
    GraphonLearnError,
    NumericError,
    SymmetryError,
)
from .estimators import TransferOperatorEDMD
from .graphons import BUILTIN_GRAPHONS, Graphon, degree_profile, invariant_density, make_graphon, transition_density
from .operators import SpectralModel
from .reconstruction import (
    asymmetric_rank_r,
    negativity_report,
    reconstruct_p,
    reconstruct_w,
    row_normalization_report,
    symmetric_rank_r,
)
from .sampling import SdeConfig, Trajectory, sde_walk, walk
from .signals import ingest_signal

DEFAULTS = {
    "pipeline": "symmetric",
    "graphon": None,
    "a": 0.8,
    "b": 0.2,
    "c": 0.5,
    "grid_csv": None,
    "signal": None,
    "signal_column": 0,
    "dictionary": "gaussian",
    "n": 20,
    "sigma": 0.05,
    "m": 20000,
    "seed": 7,
    "burn_in": 100,
    "method": "inverse-transform",
    "symmetrize": False,
    "r": "auto",
    "r_max": 10,
    "epsilon": "auto",
    "rank": "auto",
    "reconstruction_grid": 200,
    "wells": 5,
    "beta": 2.0,
    "lag": 0.1,
    "dt": 0.005,
    "out": "run",
}

_BOOL_KEYS = {"symmetrize"}
_INT_KEYS = {"n", "m", "seed", "burn_in", "r_max", "reconstruction_grid", "wells"}
_FLOAT_KEYS = {"a", "b", "c", "sigma", "beta", "lag", "dt"}


def _coerce(key, value):
    if value is None or not isinstance(value, str):
        return value
    if key in _BOOL_KEYS:
        return value.strip().lower() in ("1", "true", "yes", "on")
    if key in _INT_KEYS:
        return int(value)
    if key in _FLOAT_KEYS:
        return float(value)
    if key in ("r", "rank", "epsilon") and value != "auto":
        return int(value) if key in ("r", "rank") else float(value)
    return value


def read_config_file(path):
    """Parse a config file: JSON, or plain ``key = value`` lines."""
    text = Path(path).read_text()
    try:
        data = json.loads(text)
        if isinstance(data, dict):
            # a manifest can be replayed directly: its config is nested
            return data.get("config", data)
        raise ConfigError(f"config file {path} must contain a JSON object")
    except json.JSONDecodeError:
        pass
    config = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{line_no}: expected 'key = value', got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        config[key] = value
    return config


@dataclass
class RunConfig:
    """Fully resolved configuration of one pipeline run."""

    values: dict = field(default_factory=dict)

    @classmethod
    def resolve(cls, file_config=None, overrides=None, require_source=True):
        values = dict(DEFAULTS)
        explicit = set()
        # the output directory is the only setting with an env override;
        # precedence: CLI flag > environment > config file > default
        env_out = os.environ.get("GRAPHONLEARN_OUT")
        sources = [file_config or {}]
        if env_out:
            sources.append({"out": env_out})
        sources.append(overrides or {})
        for source in sources:
            for key, val in source.items():
                if key not in DEFAULTS:
                    raise ConfigError(f"unknown config key {key!r}")
                if val is not None:
                    values[key] = _coerce(key, val)
                    explicit.add(key)
        # real-data runs assume reversibility unless told otherwise
        if (
            values["signal"] is not None
            and values["pipeline"] == "symmetric"
            and "symmetrize" not in explicit
        ):
            values["symmetrize"] = True
        cfg = cls(values=values)
        cfg.validate(require_source=require_source)
        return cfg

    def __getattr__(self, key):
        try:
            return self.__dict__["values"][key]
        except KeyError:
            raise AttributeError(key) from None

    def validate(self, require_source=True):
        v = self.values
        sources = [v["graphon"] is not None, v["signal"] is not None, v["grid_csv"] is not None]
        if require_source and sum(sources) != 1:
            raise ConfigError(
                "exactly one data source required: a builtin graphon, a grid CSV, or a signal file"
            )
        if v["pipeline"] not in ("symmetric", "asymmetric"):
            raise ConfigError(f"pipeline must be symmetric or asymmetric, got {v['pipeline']!r}")
        if v["symmetrize"] and v["pipeline"] != "symmetric":
            raise ConfigError("symmetrize is only valid with the symmetric pipeline")
        if v["dictionary"] not in ("gaussian", "indicator"):
            raise ConfigError(f"dictionary must be gaussian or indicator, got {v['dictionary']!r}")
        if v["graphon"] is not None and v["graphon"] != "lemon-slice" and v["graphon"] not in BUILTIN_GRAPHONS:
            raise ConfigError(
                f"unknown builtin {v['graphon']!r}; available: {sorted(BUILTIN_GRAPHONS) + ['lemon-slice']}"
            )
        if v["m"] < 2:
            raise ConfigError("m must be at least 2")


def _make_basis(cfg, periodic):
    if cfg.dictionary == "indicator":
        return make_indicator(cfg.n)
    return make_gaussian(cfg.n, cfg.sigma, periodic=periodic)


def _builtin_graphon(cfg):
    name = cfg.graphon
    if name == "two-block":
        return make_graphon(name, a=cfg.a, b=cfg.b)
    if name == "constant":
        return make_graphon(name, c=cfg.c)
    return make_graphon(name)


def _simulate(cfg):
    if cfg.graphon == "lemon-slice":
        sde = SdeConfig(wells=cfg.wells, beta=cfg.beta, lag=cfg.lag, dt=cfg.dt)
        return sde_walk(sde, cfg.m, seed=cfg.seed, burn_in=cfg.burn_in)
    if cfg.grid_csv is not None:
        graphon = Graphon.from_csv(cfg.grid_csv)
    else:
        graphon = _builtin_graphon(cfg)
    density = transition_density(graphon)
    return walk(density, cfg.m, seed=cfg.seed, method=cfg.method, burn_in=cfg.burn_in)


def _obtain_trajectory(cfg):
    if cfg.signal is not None:
        series = ingest_signal(cfg.signal, column=cfg.signal_column)
        return series.to_trajectory(), series
    return _simulate(cfg), None


def _write_matrix(path, matrix):
    np.savetxt(path, np.asarray(matrix), delimiter=",")


def _analyze(cfg, trajectory, out):
    basis = _make_basis(cfg, trajectory.periodic)
    edmd = TransferOperatorEDMD(
        basis=basis,
        pipeline=cfg.pipeline,
        symmetrize=cfg.symmetrize,
        regularization=cfg.epsilon,
    ).fit(trajectory)
    values = edmd.spectral_values()
    gap = detect_gap(values, r_max=cfg.r_max)
    n_clusters = gap.n_clusters if cfg.r == "auto" else int(cfg.r)
    points = edmd.forward_pairs_.x
    embedding = embed(edmd.spectral_model_, points, n_clusters)
    clusters = kmeans(
        embedding, n_clusters, seed=cfg.seed, restarts=10, periodic=trajectory.periodic
    )
    transitions = cluster_transitions(clusters, edmd.forward_pairs_)

    np.savetxt(out / "eigenvalues.csv", np.column_stack([np.real(edmd.eigenvalues_), np.imag(edmd.eigenvalues_)]), delimiter=",")
    if cfg.pipeline == "asymmetric":
        np.savetxt(out / "singular_values.csv", edmd.singular_values_, delimiter=",")
    _write_matrix(out / "koopman.csv", edmd.operators_.koopman)
    _write_matrix(out / "reweighted_pf.csv", edmd.operators_.reweighted_pf)
    _write_matrix(out / "forward_backward.csv", edmd.operators_.forward_backward)
    (out / "spectral.json").write_text(json.dumps(edmd.spectral_model_.to_payload(), indent=2))
    rows = np.column_stack([np.arange(len(points)), points, clusters.labels])
    np.savetxt(out / "clusters.csv", rows, delimiter=",", header="index,x,label", comments="")
    _write_matrix(out / "transitions.csv", transitions)
    summary = {
        "n_clusters": int(n_clusters),
        "gap_ratio": float(gap.ratio),
        "gap_warning": bool(gap.warned),
        "boundaries": None if clusters.boundaries is None else clusters.boundaries.tolist(),
        "inertia": clusters.inertia,
        "seed": cfg.seed,
        "spectral_values": values.tolist(),
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2))
    return edmd, clusters, summary


def _reconstruct(cfg, spectral, out, graphon=None):
    summary = json.loads((out / "summary.json").read_text())
    rank = summary["n_clusters"] if cfg.rank == "auto" else int(cfg.rank)
    rank = min(rank, spectral.n_components)
    grid_size = cfg.reconstruction_grid
    sidecar = {"rank": int(rank), "grid_size": int(grid_size)}
    if cfg.pipeline == "symmetric":
        if graphon is not None:
            profile = degree_profile(graphon)
            stationary = invariant_density(profile)
            normalization = stationary.normalization
        else:
            stationary = spectral.densities["stationary"]
            # the kernel scale is not identifiable from data alone
            normalization = 1.0
        model = symmetric_rank_r(spectral, stationary, rank, normalization=normalization)
        table = reconstruct_p(model, grid_size=grid_size)
        w_table, scale = reconstruct_w(model, grid_size=grid_size)
        _write_matrix(out / "w_hat.csv", w_table)
        sidecar["mode"] = "symmetric-eigen"
        sidecar["normalization"] = scale
        sidecar["values"] = model.values.tolist()
    else:
        model = asymmetric_rank_r(spectral, spectral.densities["y"], rank)
        table = reconstruct_p(model, grid_size=grid_size)
        sidecar["mode"] = "asymmetric-svd"
        sidecar["values"] = model.values.tolist()
    _write_matrix(out / "p_hat.csv", table)
    report = row_normalization_report(table)
    sidecar["negativity"] = negativity_report(table)
    sidecar["row_normalization"] = {
        "max_deviation": report.max_deviation,
        "mean_deviation": report.mean_deviation,
    }
    (out / "reconstruction.json").write_text(json.dumps(sidecar, indent=2))
    return sidecar


def _emit_plot_data(out):
    """Write plot-ready CSV files for a completed run directory."""
    payload = json.loads((out / "spectral.json").read_text())
    model = SpectralModel.from_payload(payload)
    summary = json.loads((out / "summary.json").read_text())
    values = np.asarray(summary["spectral_values"], dtype=float)
    np.savetxt(
        out / "plot_spectrum.csv",
        np.column_stack([np.arange(1, len(values) + 1), values]),
        delimiter=",",
        header="index,value",
        comments="",
    )
    grid = midpoints(1000)
    r = min(summary["n_clusters"], model.n_components)
    funcs = np.real(model.evaluate(grid, n_components=r))
    header = "x," + ",".join(f"f{i+1}" for i in range(r))
    np.savetxt(out / "plot_functions.csv", np.column_stack([grid, funcs]), delimiter=",", header=header, comments="")
    if model.mode == "singular":
        left = model.evaluate_left(grid, n_components=r)
        np.savetxt(out / "plot_functions_left.csv", np.column_stack([grid, left]), delimiter=",", header=header, comments="")
    elif "stationary" in model.densities:
        stationary = model.densities["stationary"]
        scaled = funcs * np.asarray(stationary(grid))[:, None]
        np.savetxt(out / "plot_functions_density.csv", np.column_stack([grid, scaled]), delimiter=",", header=header, comments="")
    clusters = np.loadtxt(out / "clusters.csv", delimiter=",", skiprows=1)
    np.savetxt(out / "plot_trajectory.csv", clusters, delimiter=",", header="index,x,label", comments="")
    return out


def run_pipeline(cfg, out_dir=None):
    """Execute the full pipeline and write all artifacts plus a manifest."""
    out = Path(out_dir if out_dir is not None else cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    timings = {}
    manifest = {
        "config": cfg.values,
        "seed": cfg.seed,
        "versions": _versions(),
        "status": "running",
    }
    started = time.perf_counter()
    try:
        t0 = time.perf_counter()
        trajectory, series = _obtain_trajectory(cfg)
        timings["data"] = time.perf_counter() - t0
        trajectory.to_csv(out / "trajectory.csv")
        if series is not None:
            manifest["signal_scaling"] = {"min": series.vmin, "max": series.vmax, "name": series.name}

        t0 = time.perf_counter()
        edmd, clusters, summary = _analyze(cfg, trajectory, out)
        timings["analyze"] = time.perf_counter() - t0

        graphon = None
        if cfg.pipeline == "symmetric" and cfg.graphon not in (None, "lemon-slice") and not cfg.symmetrize:
            graphon = _builtin_graphon(cfg) if cfg.grid_csv is None else Graphon.from_csv(cfg.grid_csv)
            if not graphon.symmetric:
                graphon = None
        t0 = time.perf_counter()
        _reconstruct(cfg, edmd.spectral_model_, out, graphon=graphon)
        timings["reconstruct"] = time.perf_counter() - t0

        t0 = time.perf_counter()
        _emit_plot_data(out)
        timings["plotdata"] = time.perf_counter() - t0

        manifest["status"] = "ok"
        manifest["summary"] = summary
    except Exception as exc:
        manifest["status"] = "error"
        manifest["error"] = f"{type(exc).__name__}: {exc}"
        raise
    finally:
        timings["total"] = time.perf_counter() - started
        manifest["timings"] = timings
        manifest["outputs"] = sorted({p.name for p in out.iterdir()} | {"manifest.json"})
        (out / "manifest.json").write_text(json.dumps(manifest, indent=2))
    return out


def _versions():
    import scipy
    import sklearn

    return {
        "graphonlearn": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "scikit-learn": sklearn.__version__,
    }


# -- argument parsing ---------------------------------------------------------


def _add_config_args(parser, keys):
    parser.add_argument("--config", help="config file (JSON or key = value lines)")
    for key in keys:
        flag = "--" + key.replace("_", "-")
        parser.add_argument(flag, dest=key, default=None, help=f"override {key!r}")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="graphonlearn",
        description="Learn transfer operators, clusters, and kernels from stochastic signals on [0, 1].",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a trajectory from a builtin graphon or the SDE")
    _add_config_args(p, ["graphon", "grid_csv", "a", "b", "c", "m", "seed", "burn_in", "method", "wells", "beta", "lag", "dt", "out"])

    p = sub.add_parser("ingest", help="scale a CSV signal onto [0, 1] and store it as a trajectory")
    _add_config_args(p, ["signal", "signal_column", "out"])

    p = sub.add_parser("analyze", help="estimate operators and clusters from a trajectory file")
    p.add_argument("--trajectory", required=True, help="trajectory CSV produced by simulate/ingest")
    _add_config_args(p, ["pipeline", "dictionary", "n", "sigma", "symmetrize", "r", "r_max", "epsilon", "seed", "out"])

    p = sub.add_parser("reconstruct", help="rank-r reconstruction tables for a completed analysis")
    p.add_argument("--run", required=True, help="run directory with spectral.json")
    _add_config_args(p, ["pipeline", "rank", "reconstruction_grid"])

    p = sub.add_parser("plotdata", help="emit plot-ready CSV files for a completed run")
    p.add_argument("--run", required=True, help="run directory")

    p = sub.add_parser("run", help="full pipeline: data, analysis, reconstruction, plot data")
    _add_config_args(p, list(DEFAULTS))
    return parser


def _overrides_from_args(args, keys):
    return {k: getattr(args, k) for k in keys if getattr(args, k, None) is not None}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _dispatch(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (DataError, DegeneracyError, SymmetryError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except (NumericError, GraphonLearnError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 4


def _dispatch(args):
    file_config = read_config_file(args.config) if getattr(args, "config", None) else {}
    overrides = _overrides_from_args(args, DEFAULTS)
    if args.command == "simulate":
        cfg = RunConfig.resolve(file_config, overrides)
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        trajectory = _simulate(cfg)
        trajectory.to_csv(out / "trajectory.csv")
        print(out / "trajectory.csv")
        return 0
    if args.command == "ingest":
        merged = {**file_config, **overrides}
        if merged.get("signal") is None:
            raise ConfigError("ingest requires --signal")
        cfg = RunConfig.resolve(file_config, overrides)
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        series = ingest_signal(cfg.signal, column=cfg.signal_column)
        series.to_trajectory().to_csv(out / "trajectory.csv")
        print(out / "trajectory.csv")
        return 0
    if args.command == "analyze":
        cfg = RunConfig.resolve(file_config, overrides, require_source=False)
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        trajectory = Trajectory.from_csv(args.trajectory)
        _analyze(cfg, trajectory, out)
        print(out / "summary.json")
        return 0
    if args.command == "reconstruct":
        run_dir = Path(args.run)
        cfg = RunConfig.resolve(file_config, overrides, require_source=False)
        payload = json.loads((run_dir / "spectral.json").read_text())
        model = SpectralModel.from_payload(payload)
        cfg.values["pipeline"] = "asymmetric" if model.mode == "singular" else "symmetric"
        _reconstruct(cfg, model, run_dir)
        print(run_dir / "reconstruction.json")
        return 0
    if args.command == "plotdata":
        out = _emit_plot_data(Path(args.run))
        print(out)
        return 0
    if args.command == "run":
        cfg = RunConfig.resolve(file_config, overrides)
        out = run_pipeline(cfg)
        print(out / "manifest.json")
        return 0
    raise ConfigError(f"unknown command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())
