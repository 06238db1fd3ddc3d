"""Command-line entry point: ``simulate``, ``analyze`` and ``reproduce``.

Config files are plain ``key = value`` lines using the ``WalkConfig`` field
names (``#`` starts a comment); vector values are comma separated. Flags
override the file. A ``manifest.json`` written by this tool is also accepted
as a config source.
"""

import argparse
import json
import sys
import time
from dataclasses import fields
from pathlib import Path

import numpy as np

from . import __version__, analysis, csvio
from .errors import ConfigError, InsufficientDataError, WalkError
from .simulator import WalkConfig, derive_replica_seed, run_replicas, run_walk

FIGURES = ("fig3", "fig4", "fig5", "fig6")
# replica counts per figure and scale; fig3/fig4 panels are single runs
REPLICAS = {
    "fig3": {"desk": 1, "paper": 1},
    "fig4": {"desk": 1, "paper": 1},
    "fig5": {"desk": 20, "paper": 1000},
    "fig6": {"desk": 10, "paper": 100},
}
FIG5_GAMMAS = (-0.08, -0.04, 0.0, 0.13)
PANEL_GAMMAS = (-1.0, 0.0, 1.0)

_FIELDS = {f.name for f in fields(WalkConfig)}
_VECTOR_KEYS = {"anchor", "initial_position"}
_INT_KEYS = {"n", "steps", "burn_in", "master_seed"}
_STR_KEYS = {"mode", "beta_mode"}
_ALIASES = {"lambda": "lam", "seed": "master_seed", "lmax": "l_max", "beta": "beta_mode", "sim": "mode"}


def _mode(value):
    v = str(value).strip()
    return {"1": "sim1", "2": "sim2"}.get(v, v)


def _beta(value):
    return "onehot" if str(value).strip() in ("onehot", "one-hot") else str(value).strip()


def _coerce(key, value):
    try:
        if key in _VECTOR_KEYS:
            if value is None or str(value).strip().lower() in ("", "none"):
                return None
            if isinstance(value, (list, tuple)):
                return tuple(float(v) for v in value)
            return tuple(float(v) for v in str(value).split(","))
        if key in _INT_KEYS:
            return int(value)
        if key == "mode":
            return _mode(value)
        if key == "beta_mode":
            return _beta(value)
        return float(value)
    except (TypeError, ValueError):
        raise ConfigError(key, f"invalid value for {key}: {value!r}") from None


def parse_config_text(text):
    """Parse ``key = value`` lines into a dict (``replicas`` allowed alongside fields)."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(line, f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        key = _ALIASES.get(key, key)
        if key == "replicas":
            try:
                out[key] = int(value)
            except ValueError:
                raise ConfigError(key, f"invalid value for replicas: {value!r}") from None
            continue
        if key not in _FIELDS:
            raise ConfigError(key, f"unknown config key {key!r}")
        out[key] = _coerce(key, value)
    return out


def load_config_file(path):
    path = Path(path)
    text = path.read_text()
    if path.suffix == ".json":
        doc = json.loads(text)
        cfg = doc.get("config", doc)
        out = {}
        for key, value in cfg.items():
            if key not in _FIELDS:
                raise ConfigError(key, f"unknown config key {key!r}")
            out[key] = _coerce(key, value) if value is not None else None
        if "replicas" in doc:
            out["replicas"] = int(doc["replicas"])
        return out
    return parse_config_text(text)


def format_config(cfg):
    lines = []
    for f in fields(WalkConfig):
        v = getattr(cfg, f.name)
        if v is None:
            v = "none"
        elif isinstance(v, tuple):
            v = ",".join(repr(float(a)) for a in v)
        elif isinstance(v, float):
            v = repr(v)
        lines.append(f"{f.name} = {v}")
    return "\n".join(lines) + "\n"


def _flag_overrides(args):
    mapping = {
        "seed": "master_seed", "gamma": "gamma", "alpha": "alpha", "lmax": "l_max",
        "sim": "mode", "lam": "lam", "sigma": "sigma", "steps": "steps",
        "burn_in": "burn_in", "beta": "beta_mode", "dim": "n",
    }
    out = {}
    for attr, key in mapping.items():
        v = getattr(args, attr, None)
        if v is not None:
            out[key] = _coerce(key, v)
    return out


def resolve_config(args):
    """Config file (if any) overlaid with explicit flags; returns (config, replicas)."""
    values = load_config_file(args.config) if getattr(args, "config", None) else {}
    values.update(_flag_overrides(args))
    replicas = getattr(args, "replicas", None)
    if replicas is None:
        replicas = values.pop("replicas", 1)
    else:
        values.pop("replicas", None)
    if replicas < 1:
        raise ConfigError("replicas", "replicas must be >= 1")
    return WalkConfig(**values), int(replicas)


def write_manifest(out, command, cfg, replicas, analyses, started, outputs, extra=None, name="manifest.json"):
    doc = {
        "tool": "destwalk",
        "version": __version__,
        "command": command,
        "config": cfg.to_dict() if cfg is not None else None,
        "replicas": replicas,
        "analyses": list(analyses),
        "outputs": sorted(outputs),
        "started": time.strftime("%Y-%m-%dT%H:%M:%S%z", time.localtime(started)),
        "elapsed_s": round(time.time() - started, 3),
    }
    if extra:
        doc.update(extra)
    (Path(out) / name).write_text(json.dumps(doc, indent=2) + "\n")


def _shared_flags(p):
    p.add_argument("--config", help="key = value config file or manifest.json")
    p.add_argument("--seed", type=int, help="master seed (64-bit)")
    p.add_argument("--gamma", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--lmax", type=float)
    p.add_argument("--sim", choices=["1", "2"])
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--sigma", type=float)
    p.add_argument("--steps", type=int)
    p.add_argument("--burn-in", dest="burn_in", type=int)
    p.add_argument("--replicas", type=int)
    p.add_argument("--beta", choices=["simplex", "onehot"])
    p.add_argument("--dim", type=int, help="space dimension N (default 2)")
    p.add_argument("--workers", type=int, default=1, help="replica threads; output does not depend on it")
    p.add_argument("--out", default=".", help="output directory")


# ---------------------------------------------------------------- simulate


def cmd_simulate(args):
    started = time.time()
    cfg, replicas = resolve_config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    names = []

    def one(i):
        return run_walk(cfg, derive_replica_seed(cfg.master_seed, i))

    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=max(1, args.workers)) as ex:
        for i, traj in enumerate(ex.map(one, range(replicas))):
            name = "trajectory.csv" if replicas == 1 else f"trajectory_{i:03d}.csv"
            csvio.write_trajectory(traj, out / name)
            names.append(name)
    (out / "config.txt").write_text(format_config(cfg) + f"replicas = {replicas}\n")
    write_manifest(out, "simulate", cfg, replicas, [], started, names + ["config.txt"])
    return 0


# ----------------------------------------------------------------- analyze


def _trajectory_files(path):
    path = Path(path)
    if path.is_dir():
        files = sorted(path.glob("trajectory*.csv"))
        if not files:
            raise ValueError(f"{path}: no trajectory*.csv files")
        return path, files
    return path.parent, [path]


def _manifest_burn_in(folder):
    mf = folder / "manifest.json"
    if mf.exists():
        cfg = json.loads(mf.read_text()).get("config") or {}
        return int(cfg.get("burn_in", 0))
    return 0


def _safe_corr(f, *a):
    try:
        return f(*a)
    except (WalkError, ValueError):
        return float("nan")


def cmd_analyze(args):
    started = time.time()
    folder, files = _trajectory_files(args.input)
    burn_in = args.burn_in if args.burn_in is not None else _manifest_burn_in(folder)
    out = Path(args.out) if args.out else folder
    out.mkdir(parents=True, exist_ok=True)
    wanted = {k for k in ("rank", "fit", "corr", "radial", "grid") if getattr(args, k)}
    if not wanted:
        wanted = {"rank", "fit", "corr", "radial", "grid"}

    trajs = [csvio.read_trajectory(f) for f in files]
    masks = [tr.after(burn_in) for tr in trajs]
    if not any(m.any() for m in masks):
        raise ValueError(f"no records after burn-in {burn_in}")
    lengths = np.concatenate([tr.l[m] for tr, m in zip(trajs, masks)])
    positive = lengths[lengths > 0]
    written = []

    if "rank" in wanted or "fit" in wanted:
        rp = analysis.rank_plot(positive)
        if "rank" in wanted:
            csvio.write_rank_plot(rp, out / "rank_plot.csv")
            written.append("rank_plot.csv")
    if "fit" in wanted:
        try:
            fit = analysis.fit_tail(positive, tuple(args.window))
        except InsufficientDataError as exc:
            if args.fit:
                raise
            print(f"destwalk: warning: tail fit skipped: {exc}", file=sys.stderr)
        else:
            csvio.write_fit(fit, out / "fit.csv")
            written.append("fit.csv")
    if "corr" in wanted:
        rows = []
        for f, tr, m in zip(files, trajs, masks):
            l, r0 = tr.l[m], tr.r0[m]
            lag = _safe_corr(analysis.lag_log_correlation, l, args.lag)
            rl = _safe_corr(lambda a, b: analysis.pearson(np.log(a), np.log(b)), r0, l)
            rows.append([f.name, lag, rl])
        rows.append(["mean", float(np.nanmean([r[1] for r in rows])) if rows else float("nan"),
                     float(np.nanmean([r[2] for r in rows])) if rows else float("nan")])
        csvio.write_rows(out / "correlations.csv", ["source", f"lag{args.lag}_log_corr", "r0_l_log_corr"], rows)
        written.append("correlations.csv")
    if "radial" in wanted:
        r0 = np.concatenate([tr.r0[m] for tr, m in zip(trajs, masks)])
        hist = analysis.radial_occupancy_from_r0(r0, args.delta_r0, tuple(args.r_range))
        csvio.write_radial(hist, out / "radial.csv")
        written.append("radial.csv")
    if "grid" in wanted and trajs[0].positions.shape[1] == 2:
        pos = np.concatenate([tr.positions[m] for tr, m in zip(trajs, masks)])
        grid = analysis.occupancy_grid(pos, args.cell, tuple(args.extent))
        csvio.write_grid(grid, out / "grid.csv")
        written.append("grid.csv")
    elif args.grid:
        raise ValueError("occupancy grid needs 2-D trajectories")

    if args.plot:
        from .plotting import loglog_plot

        if "rank" in wanted:
            loglog_plot(out / "rank_plot.svg", [("steps", rp.lengths, rp.ranks)], "l", "rank", ref_slope=-1.0)
            written.append("rank_plot.svg")
        if "radial" in wanted:
            loglog_plot(out / "radial.svg", [("P", hist.r0, hist.probabilities)], "r0", "probability", ref_slope=-1.0)
            written.append("radial.svg")
    write_manifest(out, "analyze", None, len(files), sorted(wanted), started, written,
                   extra={"inputs": [str(f) for f in files], "burn_in": burn_in},
                   name="analysis_manifest.json")
    return 0


# --------------------------------------------------------------- reproduce


def _gtag(g):
    return f"{g:+.2f}".replace("+", "p").replace("-", "m")


def _fit_or_tail(lengths, l_max):
    positive = lengths[lengths > 0]
    try:
        return analysis.fit_tail(positive, (0.01, l_max))
    except InsufficientDataError:
        return analysis.fit_tail(positive, analysis.quantile_window(positive, 0.99, l_max))


def _reproduce_panels(fig, base, out, plot):
    sim = "sim1" if fig == "fig3" else "sim2"
    written, fit_rows, series = [], [], []
    for g in PANEL_GAMMAS:
        cfg = base.with_(mode=sim, gamma=g)
        tr = run_walk(cfg)
        tag = _gtag(g)
        csvio.write_rows(out / f"trajectory_gamma{tag}.csv", ["t", "x1", "x2"],
                         zip(tr.t.tolist(), tr.positions[:, 0].tolist(), tr.positions[:, 1].tolist()))
        keep = tr.after(cfg.burn_in)
        l = tr.l[keep]
        rp = analysis.rank_plot(l[l > 0])
        csvio.write_rank_plot(rp, out / f"rank_gamma{tag}.csv")
        f = _fit_or_tail(l, cfg.l_max)
        fit_rows.append([g, f.slope, f.mu_mle, f.window[0], f.window[1], f.n_points, f.r_squared])
        written += [f"trajectory_gamma{tag}.csv", f"rank_gamma{tag}.csv"]
        series.append((f"gamma={g:g}", rp.lengths, rp.ranks))
    csvio.write_rows(out / "fits.csv", ["gamma", "slope", "mu_mle", "l_lo", "l_hi", "n", "r2"], fit_rows)
    written.append("fits.csv")
    if plot:
        from .plotting import loglog_plot

        loglog_plot(out / "rank_plot.svg", series[1:2] + series[:1] + series[2:], "l", "rank",
                    ref_slope=-1.0, title=f"{fig}: step length-rank")
        written.append("rank_plot.svg")
    return written


def _reproduce_fig5(base, out, replicas, workers, plot):
    written, series = [], []
    for g in FIG5_GAMMAS:
        cfg = base.with_(mode="sim2", gamma=g)
        grid = (0.02, (-10.0, 10.0)) if g == 0.0 else None
        agg = run_replicas(cfg, replicas, workers=workers, pool=False,
                           radial=(0.01, (0.01, 10.0)), grid=grid)
        tag = _gtag(g)
        csvio.write_radial(agg.radial, out / f"radial_gamma{tag}.csv")
        written.append(f"radial_gamma{tag}.csv")
        series.append((f"gamma={g:g}", agg.radial.r0, agg.radial.probabilities))
        if grid is not None:
            csvio.write_grid(agg.grid, out / "grid_gamma0.csv", scale=float(replicas))
            written.append("grid_gamma0.csv")
    if plot:
        from .plotting import loglog_plot

        order = [2, 0, 1, 3]  # gamma = 0 first so the reference line follows it
        loglog_plot(out / "radial.svg", [series[k] for k in order], "r0", "probability",
                    ref_slope=-1.0, title="fig5(b): radial occupancy")
        written.append("radial.svg")
    return written


def _reproduce_fig6(base, out, replicas, workers, plot):
    cfg = base.with_(mode="sim2", gamma=0.0)
    tr = run_walk(cfg)
    keep = tr.after(cfg.burn_in)
    l, r0 = tr.l[keep], tr.r0[keep]
    csvio.write_rows(out / "timeseries.csv", ["t", "r0", "l"], zip(tr.t[keep].tolist(), r0.tolist(), l.tolist()))
    corr = [
        ["log_r0_vs_log_l", analysis.pearson(np.log(r0), np.log(l))],
        ["log_l_lag1", analysis.lag_log_correlation(l, 1)],
    ]
    csvio.write_rows(out / "correlations.csv", ["quantity", "pearson"], corr)
    gammas = np.round(np.linspace(-1.0, 1.0, 21), 10)
    rows = []
    for g in gammas:
        row = [float(g)]
        for sim in ("sim1", "sim2"):
            agg = run_replicas(base.with_(mode=sim, gamma=float(g)), replicas, workers=workers, pool=False)
            row.append(float(np.nanmean(agg.lag1_log_corr)))
        rows.append(row)
    csvio.write_rows(out / "gamma_sweep.csv", ["gamma", "sim1_lag1", "sim2_lag1"], rows)
    written = ["timeseries.csv", "correlations.csv", "gamma_sweep.csv"]
    if plot:
        import matplotlib.pyplot as plt

        from .plotting import _META

        fig, ax = plt.subplots(figsize=(5, 4))
        a = np.array(rows)
        ax.plot(a[:, 0], a[:, 1], "o-", label="Simulation 1")
        ax.plot(a[:, 0], a[:, 2], "s-", label="Simulation 2")
        ax.set_xlabel("gamma")
        ax.set_ylabel("corr(log l(t), log l(t+1))")
        ax.legend()
        fig.tight_layout()
        fig.savefig(out / "gamma_sweep.svg", format="svg", metadata=_META)
        plt.close(fig)
        written.append("gamma_sweep.svg")
    return written


def cmd_reproduce(args):
    started = time.time()
    if args.figure not in FIGURES:
        raise ValueError(f"unknown figure {args.figure!r}; valid ids: {', '.join(FIGURES)}")
    base, _ = resolve_config(args)
    if base.n != 2:
        raise ConfigError("n", "figure recipes are two-dimensional")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    replicas = args.replicas or REPLICAS[args.figure][args.scale]
    if args.figure in ("fig3", "fig4"):
        written = _reproduce_panels(args.figure, base, out, args.plot)
    elif args.figure == "fig5":
        written = _reproduce_fig5(base, out, replicas, args.workers, args.plot)
    else:
        written = _reproduce_fig6(base, out, replicas, args.workers, args.plot)
    write_manifest(out, f"reproduce {args.figure}", base, replicas, [args.figure], started, written,
                   extra={"scale": args.scale})
    return 0


# -------------------------------------------------------------------- main


def build_parser():
    p = argparse.ArgumentParser(prog="destwalk", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"destwalk {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run walks and write trajectory CSVs")
    _shared_flags(s)
    s.set_defaults(func=cmd_simulate)

    a = sub.add_parser("analyze", help="rank plots, tail fits, correlations, occupancy")
    a.add_argument("input", help="trajectory CSV or a directory of trajectory*.csv")
    a.add_argument("--out", default=None, help="output directory (default: input folder)")
    a.add_argument("--burn-in", dest="burn_in", type=int, default=None,
                   help="override the burn-in recorded in manifest.json")
    a.add_argument("--rank", action="store_true")
    a.add_argument("--fit", action="store_true")
    a.add_argument("--corr", action="store_true")
    a.add_argument("--radial", action="store_true")
    a.add_argument("--grid", action="store_true")
    a.add_argument("--plot", action="store_true", help="also write SVG log-log plots")
    a.add_argument("--window", nargs=2, type=float, default=[0.01, 10.0], metavar=("LO", "HI"))
    a.add_argument("--lag", type=int, default=1)
    a.add_argument("--delta-r0", dest="delta_r0", type=float, default=0.01)
    a.add_argument("--r-range", dest="r_range", nargs=2, type=float, default=[0.01, 10.0])
    a.add_argument("--cell", type=float, default=0.02)
    a.add_argument("--extent", nargs=2, type=float, default=[-10.0, 10.0])
    a.set_defaults(func=cmd_analyze)

    r = sub.add_parser("reproduce", help="figure data for fig3..fig6")
    r.add_argument("figure", help=f"one of {', '.join(FIGURES)}")
    r.add_argument("--scale", choices=["desk", "paper"], default="desk")
    r.add_argument("--no-plot", dest="plot", action="store_false")
    _shared_flags(r)
    r.set_defaults(func=cmd_reproduce)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"destwalk: error: {exc} (key: {exc.key})", file=sys.stderr)
        return 2
    except (WalkError, ValueError, OSError) as exc:
        print(f"destwalk: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
