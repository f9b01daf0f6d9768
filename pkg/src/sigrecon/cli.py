"""Command-line front end.

Every subcommand writes its artifacts into ``--out DIR`` (CSV for numbers,
JSON for models and provenance, SVG when ``--plot`` is given).  Exit codes:
0 on success, 2 on usage errors, 1 on runtime errors.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import io, plotting
from .bench import bench_curves, default_sample_counts
from .density import (
    DEFAULT_C,
    DEFAULT_DELTA,
    SampleSet,
    bandlimited_density,
    draw_samples,
    recommended_sample_count,
    uniform_density,
    universal_density,
)
from .errors import ReconError
from .measure import Bandlimited, prior_from_dict
from .operator_lab import (
    DEFAULT_GRID_N,
    alpha_for,
    analytic_stat_dim_bound,
    discretize,
    eig_count,
    hard_instance,
    leverage_from_spectrum,
    stat_dim,
)
from .recon import ReconModel, evaluate_batch, fit
from .signals import (
    TableSignal,
    mean_sq_error,
    noise_from_dict,
    query,
    random_synthetic,
    signal_from_dict,
)

# refuse to build dense systems beyond this many samples
MAX_SAMPLES = 20000


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # one line, naming the offending flag as argparse reports it
        self.exit(2, f"{self.prog}: error: {message}\n")


def _json_arg(text: str):
    """Inline JSON or a path to a JSON file."""
    p = Path(text)
    if not text.lstrip().startswith("{") and p.exists():
        return io.read_json(p)
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise argparse.ArgumentTypeError(f"not a JSON object or readable file: {text!r}") from exc


def _positive(kind):
    def conv(text):
        val = kind(text)
        if not val > 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return val
    return conv


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--out", default=".", help="output directory (default: .)")
    common.add_argument("--plot", action="store_true", help="also render SVG figures")

    prior = _Parser(add_help=False)
    prior.add_argument("--prior", type=_json_arg, required=True, help="prior JSON object or file")
    prior.add_argument("--T", type=_positive(float), default=1.0, help="window length in seconds")

    eps = _Parser(add_help=False)
    eps.add_argument("--epsilon", type=_positive(float), default=1e-3, help="ridge parameter")

    grid = _Parser(add_help=False)
    grid.add_argument("--grid-n", type=int, default=DEFAULT_GRID_N, help="grid size")

    seed = _Parser(add_help=False)
    seed.add_argument("--seed", type=int, default=0)

    sampling = _Parser(add_help=False)
    sampling.add_argument("--density", choices=["universal", "bandlimited", "uniform"],
                          default="universal")
    sampling.add_argument("--alpha", type=float, help="explicit alpha (implies --alpha-source explicit)")
    sampling.add_argument("--alpha-source", choices=["analytic-bound", "numeric-statdim", "explicit"],
                          default=None)
    sampling.add_argument("--beta", type=_positive(float), default=256.0,
                          help="alpha = beta * statistical-dimension bound")
    count = sampling.add_mutually_exclusive_group()
    count.add_argument("--samples", type=_positive(int), help="sample count s")
    count.add_argument("--c", type=_positive(float), default=None, help=f"count constant (default {DEFAULT_C:g})")
    sampling.add_argument("--delta", type=_positive(float), default=None,
                          help=f"failure probability (default {DEFAULT_DELTA:g})")

    parser = _Parser(prog="sigrecon", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("kernel", parents=[common, prior], help="tabulate the kernel")
    p.add_argument("--dt-max", type=_positive(float), default=2.0)
    p.add_argument("--points", type=_positive(int), default=401)

    sub.add_parser("sample", parents=[common, prior, eps, seed, sampling, grid],
                   help="draw a weighted sample set")

    p = sub.add_parser("synth", parents=[common, prior, seed, grid], help="random unit-energy signal")
    p.add_argument("--atoms", type=_positive(int), default=8)
    p.add_argument("--real", action="store_true", help="real coefficients")

    p = sub.add_parser("fit", parents=[common, prior, eps, seed, sampling, grid],
                       help="sample, query and fit a model")
    p.add_argument("--in", dest="input", required=True, help="signal JSON or table CSV (t,re,im)")
    p.add_argument("--noise", type=_json_arg, default={"type": "none"}, help="noise JSON")

    p = sub.add_parser("eval", parents=[common, grid], help="evaluate a fitted model on a grid")
    p.add_argument("--in", dest="input", required=True, help="model JSON")

    sub.add_parser("statdim", parents=[common, prior, eps, grid], help="statistical dimension")
    sub.add_parser("leverage", parents=[common, prior, eps, grid], help="ridge leverage profile")
    sub.add_parser("hard", parents=[common, prior, eps, grid, seed], help="hard instance")

    p = sub.add_parser("bench", parents=[common, prior, eps, seed, sampling, grid],
                       help="error versus sample count")
    p.add_argument("--sample-list", default=None, help="comma separated sample counts")
    p.add_argument("--trials", type=_positive(int), default=5)
    p.add_argument("--noise", type=_json_arg, default={"type": "none"}, help="noise JSON")

    p = sub.add_parser("plot", parents=[common], help="CSV to SVG line chart")
    p.add_argument("--in", dest="input", required=True, help="CSV file")
    p.add_argument("--x", required=True, help="x column")
    p.add_argument("--y", default=None, help="comma separated y columns (default: all others)")
    p.add_argument("--logx", action="store_true")
    p.add_argument("--logy", action="store_true")
    return parser


# -- helpers --------------------------------------------------------------

def _prior(args):
    return prior_from_dict(args.prior)


def _alpha_info(args, prior) -> dict:
    source = args.alpha_source
    if source is None:
        source = "explicit" if args.alpha is not None else "analytic-bound"
    if source == "explicit" and args.alpha is None:
        raise UsageError("--alpha-source explicit requires --alpha")
    return alpha_for(prior, args.T, args.epsilon, source, args.beta, args.grid_n, args.alpha)


def _sampling(args, prior) -> tuple:
    """Density, sample count and the provenance describing both."""
    info: dict = {"density_kind": args.density}
    if args.density == "universal":
        info.update(_alpha_info(args, prior))
        dens = universal_density(info["alpha"], args.T)
    elif args.density == "bandlimited":
        if not isinstance(prior, Bandlimited):
            raise UsageError("--density bandlimited needs a bandlimited --prior")
        dens = bandlimited_density(prior.F, args.T, min(args.epsilon, 1.0))
    else:
        dens = uniform_density(args.T)
    if args.samples is not None:
        s = args.samples
        info["count_source"] = "explicit"
    else:
        c = DEFAULT_C if args.c is None else args.c
        delta = DEFAULT_DELTA if args.delta is None else args.delta
        s = recommended_sample_count(max(dens.mass, 1.0), delta, c)
        info.update({"count_source": "recommended", "c": c, "delta": delta})
    info["s"] = int(s)
    if s > MAX_SAMPLES:
        raise ReconError(
            f"sample count {s} exceeds the dense-solver limit {MAX_SAMPLES}; pass --samples"
        )
    return dens, int(s), info


def _grid(T: float, n: int) -> np.ndarray:
    return np.linspace(0.0, T, n)


def _complex_rows(ts, vals):
    return ((t, v.real, v.imag) for t, v in zip(ts, vals))


def _load_signal(path: str):
    p = Path(path)
    if p.suffix.lower() == ".csv":
        _, rows = io.read_csv(p)
        t = np.array([float(r[0]) for r in rows])
        v = np.array([complex(float(r[1]), float(r[2])) for r in rows])
        return TableSignal(t, v)
    return signal_from_dict(io.read_json(p))


# -- subcommands ----------------------------------------------------------

def cmd_kernel(args, out: Path):
    prior = _prior(args)
    dt = np.linspace(-args.dt_max, args.dt_max, args.points)
    k = prior.kernel(dt)
    io.write_csv(out / "kernel.csv", ["dt", "re", "im"], _complex_rows(dt, k))
    if args.plot:
        plotting.line_chart(out / "kernel.svg", dt, {"Re k": k.real, "Im k": k.imag},
                            xlabel="dt (s)", ylabel="k(dt)")


def cmd_sample(args, out: Path):
    prior = _prior(args)
    dens, s, info = _sampling(args, prior)
    samples = draw_samples(dens, s, args.seed)
    samples = SampleSet(samples.times, samples.weights, dens, samples.seed, info)
    samples.to_csv(out / "samples.csv")
    if args.plot:
        _density_figure(out / "samples.svg", dens, samples.times)


def _density_figure(path, dens, times):
    T = dens.T
    edges = np.linspace(0.0, T, 51)
    counts, _ = np.histogram(times, bins=edges)
    centers = 0.5 * (edges[1:] + edges[:-1])
    emp = counts / (len(times) * (edges[1] - edges[0]))
    t = np.linspace(T / 400, T - T / 400, 399)
    plotting.line_chart(path, {"normalized density": t, "sample histogram": centers},
                        {"normalized density": dens.density(t) / dens.mass, "sample histogram": emp},
                        xlabel="t (s)", ylabel="probability density", logy=True)


def cmd_synth(args, out: Path):
    prior = _prior(args)
    sig = random_synthetic(prior, args.T, args.atoms, args.seed, real=args.real)
    io.write_json(out / "signal.json", {**sig.to_dict(), "energy": sig.energy, "seed": args.seed})
    ts = _grid(args.T, args.grid_n)
    vals = sig(ts)
    io.write_csv(out / "signal.csv", ["t", "re", "im"], _complex_rows(ts, vals))
    if args.plot:
        plotting.line_chart(out / "signal.svg", ts, {"Re y": vals.real, "Im y": vals.imag},
                            xlabel="t (s)")


def cmd_fit(args, out: Path):
    prior = _prior(args)
    signal = _load_signal(args.input)
    noise = noise_from_dict(args.noise)
    dens, s, info = _sampling(args, prior)
    drawn = draw_samples(dens, s, args.seed)
    samples = SampleSet(drawn.times, drawn.weights, dens, drawn.seed, info)
    obs = query(signal, noise, samples.times)
    model = fit(prior, samples, obs, args.epsilon)
    samples.to_csv(out / "samples.csv")
    model.save(out / "model.json")
    ts = _grid(args.T, args.grid_n)
    y, yt = signal(ts), evaluate_batch(model, ts)
    prov = {
        "command": "fit",
        "prior": prior.to_dict(),
        "T": args.T,
        "epsilon": args.epsilon,
        "seed": args.seed,
        "noise": noise.to_dict(),
        "noise_energy": noise.energy(args.T),
        "signal_energy": getattr(signal, "energy", None) if not isinstance(signal, TableSignal) else None,
        "sampling": info,
        "density": dens.params(),
        "mse": mean_sq_error(signal, model, args.T).value if not isinstance(signal, TableSignal) else None,
    }
    io.write_json(out / "model.provenance.json", prov)
    io.write_csv(out / "fit.csv", ["t", "y_re", "y_im", "fit_re", "fit_im"],
                 ((t, a.real, a.imag, b.real, b.imag) for t, a, b in zip(ts, y, yt)))
    if args.plot:
        plotting.line_chart(out / "fit.svg", {"signal": ts, "reconstruction": ts, "samples": samples.times},
                            {"signal": y.real, "reconstruction": yt.real, "samples": obs.real},
                            xlabel="t (s)", ylabel="Re y(t)",
                            style={"samples": {"linestyle": "none", "marker": ".", "markersize": 3},
                                   "reconstruction": {"linestyle": "--"}})


def cmd_eval(args, out: Path):
    model = ReconModel.load(args.input)
    ts = _grid(model.T, args.grid_n)
    vals = evaluate_batch(model, ts)
    io.write_csv(out / "eval.csv", ["t", "re", "im"], _complex_rows(ts, vals))
    if args.plot:
        plotting.line_chart(out / "eval.svg", ts, {"Re": vals.real, "Im": vals.imag}, xlabel="t (s)")


def cmd_statdim(args, out: Path):
    prior = _prior(args)
    sp = discretize(prior, args.T, args.grid_n, vectors=False)
    sp2 = discretize(prior, args.T, 2 * args.grid_n, vectors=False)
    s1, s2 = stat_dim(sp, args.epsilon), stat_dim(sp2, args.epsilon)
    report = {
        "prior": prior.to_dict(), "T": args.T, "epsilon": args.epsilon, "grid_n": args.grid_n,
        "stat_dim": s1, "stat_dim_2n": s2, "rel_discrepancy": abs(s2 - s1) / s2,
        "eig_count": eig_count(sp, args.epsilon),
        "analytic_bound": analytic_stat_dim_bound(prior, args.T, args.epsilon),
        "trace": sp.trace,
    }
    io.write_json(out / "statdim.json", report)
    io.write_csv(out / "spectrum.csv", ["index", "lambda"], enumerate(sp.eigenvalues))
    if args.plot:
        lam = np.maximum(sp.eigenvalues, 1e-300)
        idx = np.arange(1, len(lam) + 1)
        plotting.line_chart(out / "spectrum.svg", idx, {"eigenvalue": lam,
                            "epsilon": np.full(len(lam), args.epsilon)},
                            xlabel="index", ylabel="lambda", logy=True)


def cmd_leverage(args, out: Path):
    prior = _prior(args)
    prof = leverage_from_spectrum(discretize(prior, args.T, args.grid_n), args.epsilon)
    io.write_csv(out / "leverage.csv", ["t", "tau_hat"], zip(prof.grid_times, prof.tau_hat))
    alpha = max(128.0, 256.0 * prof.stat_dim)
    io.write_json(out / "leverage.json", {
        "prior": prior.to_dict(), "T": args.T, "epsilon": args.epsilon, "grid_n": args.grid_n,
        "stat_dim": prof.stat_dim, "integral": prof.integral(), "alpha": alpha,
    })
    if args.plot:
        t = prof.grid_times
        m = np.minimum(t, args.T - t)
        plotting.line_chart(out / "leverage.svg", t, {
            "tau_hat": prof.tau_hat,
            "gap bound": prof.stat_dim / m,
            "universal density": universal_density(alpha, args.T).density(t),
        }, xlabel="t (s)", ylabel="1/s", logy=True)


def cmd_hard(args, out: Path):
    prior = _prior(args)
    sp = discretize(prior, args.T, args.grid_n)
    sig = hard_instance(sp, args.epsilon, args.seed)
    vals = sig.meta["grid_values"]
    io.write_csv(out / "hard.csv", ["t", "re", "im"], _complex_rows(sp.grid_times, vals))
    io.write_json(out / "hard.json", {
        "prior": prior.to_dict(), "T": args.T, "epsilon": args.epsilon, "grid_n": args.grid_n,
        "seed": args.seed, "m": sig.meta["m"], "energy": sig.meta["energy_estimate"],
        "mean_square": float(np.mean(np.abs(vals) ** 2)),
    })
    if args.plot:
        plotting.line_chart(out / "hard.svg", sp.grid_times, {"Re y": vals.real}, xlabel="t (s)")


def cmd_bench(args, out: Path):
    prior = _prior(args)
    counts = ([int(x) for x in args.sample_list.split(",")] if args.sample_list
              else default_sample_counts())
    info = _alpha_info(args, prior)
    rows = bench_curves(prior, args.T, args.epsilon, counts, args.trials, args.seed,
                        info["alpha"], noise_from_dict(args.noise))
    cols = ["method", "s", "median_mse", "q1_mse", "q3_mse"]
    io.write_csv(out / "bench.csv", cols, ([r[c] for c in cols] for r in rows))
    io.write_json(out / "bench.json", {"prior": prior.to_dict(), "T": args.T, "epsilon": args.epsilon,
                                       "seed": args.seed, "trials": args.trials, **info})
    if args.plot:
        methods = sorted({r["method"] for r in rows})
        xs = {m: [r["s"] for r in rows if r["method"] == m] for m in methods}
        ys = {m: [max(r["median_mse"], 1e-300) for r in rows if r["method"] == m] for m in methods}
        plotting.line_chart(out / "bench.svg", xs, ys, xlabel="samples", ylabel="median MSE",
                            logx=True, logy=True)


def cmd_plot(args, out: Path):
    ycols = args.y.split(",") if args.y else None
    try:
        plotting.plot_csv(args.input, out / (Path(args.input).stem + ".svg"), args.x, ycols,
                          logx=args.logx, logy=args.logy)
    except KeyError as exc:
        raise UsageError(f"--x/--y: {exc.args[0]}") from exc


COMMANDS = {
    "kernel": cmd_kernel, "sample": cmd_sample, "synth": cmd_synth, "fit": cmd_fit,
    "eval": cmd_eval, "statdim": cmd_statdim, "leverage": cmd_leverage, "hard": cmd_hard,
    "bench": cmd_bench, "plot": cmd_plot,
}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        COMMANDS[args.command](args, out)
    except UsageError as exc:
        print(f"sigrecon {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (ReconError, OSError, ValueError, KeyError) as exc:
        print(f"sigrecon {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
