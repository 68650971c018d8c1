"""Command-line entry point ``rmt``.

Every command writes CSV (header row, round-trip floats) or a JSON summary
``{command, params, seed, metrics, pass}``. Stochastic commands need
``--seed``. Options may also come from a flat ``key = value`` file given by
``--config``; explicit flags win over the file, which wins over defaults.
With ``--plot`` a PNG is rendered next to the ``--out`` file.
"""
from __future__ import annotations

import argparse
import contextlib
import io
import json
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import checks, coulomb, core, density, determinants, eigenvectors, resolvent, sampling

__all__ = ["main", "dispatch", "build_parser", "emit_overlay", "RunConfig", "ValidationError", "parse_grid",
           "read_config"]

GLOBAL_KEYS = ("seed", "out", "format", "threads", "config", "plot")
STOCHASTIC = {"sample", "spacing", "coulomb", "eigvec", "check"}


class ValidationError(ValueError):
    """Bad user input; reported with the offending field and exit code 2."""

    def __init__(self, name: str, message: str):
        super().__init__(f"{name}: {message}")
        self.name = name


@dataclass
class RunConfig:
    command: str
    params: dict
    seed: int | None
    out: str | None
    format: str = "csv"
    threads: int | None = None
    plot: bool = False


@dataclass
class Output:
    columns: dict | None = None
    metrics: dict = field(default_factory=dict)
    passed: bool = True
    text: str | None = None
    overlay: tuple | None = None  # (hist GridFunction, theory values, samples, cdf)
    plot: Callable | None = None


# ---- parsing helpers --------------------------------------------------------------

def parse_grid(text: str) -> np.ndarray:
    """``lo:hi:steps`` -> ``linspace(lo, hi, steps)``."""
    parts = str(text).split(":")
    if len(parts) != 3:
        raise ValidationError("grid", f"expected lo:hi:steps, got {text!r}")
    try:
        lo, hi, steps = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ValidationError("grid", f"cannot parse {text!r}") from None
    if not lo < hi or steps < 2:
        raise ValidationError("grid", "need lo < hi and at least 2 steps")
    return np.linspace(lo, hi, steps)


def read_config(path) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment, dashes in keys become underscores."""
    out = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ValidationError("config", str(exc)) from None
    for num, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError("config", f"line {num}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = val
    return out


def _positive_int(name, v, minimum=1):
    if v is None or int(v) != v or v < minimum:
        raise ValidationError(name, f"must be an integer >= {minimum}, got {v}")
    return int(v)


def _in_open_unit(name, v):
    if v is None or not 0 < v < 1:
        raise ValidationError(name, f"must lie in (0, 1), got {v}")
    return float(v)


def _need_seed(cfg: RunConfig):
    if cfg.seed is None:
        raise ValidationError("seed", f"required for the stochastic command {cfg.command!r}")
    if not 0 <= cfg.seed < 2**64:
        raise ValidationError("seed", "must be a 64-bit unsigned integer")
    return cfg.seed


# ---- overlay emission -------------------------------------------------------------

def _sidecar(path) -> Path:
    return Path(path).with_suffix(".json")


def overlay_metrics(hist: core.GridFunction, theory, samples=None, cdf=None) -> dict:
    """Sup distance and KS statistic between a histogram and a theory curve."""
    ys = np.asarray(hist.ys, dtype=float)
    th = np.asarray(theory(hist.xs) if callable(theory) else theory, dtype=float)
    if th.shape != ys.shape:
        raise ValueError("theory values do not match the histogram grid")
    if hist.meta.get("count", 1) == 0 or not np.any(ys > 0):
        raise ValueError("empty histogram")
    if not np.any((th > 0) & (ys > 0)):
        raise ValueError("disjoint supports")
    width = hist.meta.get("width", float(np.mean(np.diff(hist.xs))))
    if samples is not None and cdf is not None:
        ks = core.ks_distance(samples, cdf)
    else:
        # KS between the two binned distributions
        ch, ct = np.cumsum(ys * width), np.cumsum(th * width)
        ks = float(np.max(np.abs(ch - ct)))
    return {"sup_distance": float(np.max(np.abs(ys - th))), "ks": float(ks),
            "bins": int(len(ys)), "count": int(hist.meta.get("count", 0))}


def emit_overlay(histogram: core.GridFunction, curve, path, samples=None, cdf=None) -> dict:
    """Write ``x,hist,theory`` CSV plus a JSON sidecar with sup-distance and KS.

    ``curve`` may be a GridFunction (resampled onto the bin centers), a
    callable, or an array of theory values on the bin centers.
    """
    if isinstance(curve, core.GridFunction):
        lo, hi = curve.xs[0], curve.xs[-1]
        if hi <= histogram.xs[0] or lo >= histogram.xs[-1]:
            raise ValueError("disjoint supports")
        theory = curve(histogram.xs)
    elif callable(curve):
        theory = np.asarray(curve(histogram.xs), dtype=float)
    else:
        theory = np.asarray(curve, dtype=float)
    metrics = overlay_metrics(histogram, theory, samples, cdf)
    core.write_csv(path, {"x": histogram.xs, "hist": histogram.ys, "theory": theory})
    core.write_json(_sidecar(path), metrics)
    return metrics


# ---- commands ---------------------------------------------------------------------

_GAUSSIAN_BETA = {"goe": 1, "gue": 2, "gse": 4}


def cmd_sample(cfg: RunConfig, p: dict) -> Output:
    seed = _need_seed(cfg)
    n = _positive_int("n", p["n"])
    count = _positive_int("count", p["count"])
    ens = p["ensemble"]
    m, beta = p.get("m"), p.get("beta")
    if ens == "wishart":
        m = _positive_int("m", m)
        if beta not in (1, 2, 4):
            raise ValidationError("beta", "wishart needs --beta 1, 2 or 4")
    else:
        if beta is not None and beta != _GAUSSIAN_BETA[ens]:
            raise ValidationError("beta", f"{ens} has beta={_GAUSSIAN_BETA[ens]}")
        beta = _GAUSSIAN_BETA[ens]
    vals = sampling.sample_eigenvalues(ens, n, count, seed, m=m, beta=beta)
    draw = np.repeat(np.arange(count), vals.shape[1])
    metrics = {"values": int(vals.size), "mean": float(vals.mean()), "variance": float(vals.var())}

    def plot(path):
        from .plotting import plot_samples

        plot_samples(vals, path, xlabel="eigenvalue", title=f"{ens} N={n}")

    return Output({"draw": draw, "x": vals.ravel()}, metrics, plot=plot)


def _gaussian_curve(ens: str, n: int, gse_scale: float):
    if ens == "goe":
        if n % 2:
            raise ValidationError("n", "the GOE finite-N density is available for even N")
        return lambda x: density.goe_density_finite(n, x)
    if ens == "gue":
        return lambda x: density.gue_density_finite(n, x)
    return lambda x: density.gse_density_sampled(n, x, gse_scale)


def cmd_density(cfg: RunConfig, p: dict) -> Output:
    n = _positive_int("n", p["n"])
    ens = p["ensemble"]
    curve = _gaussian_curve(ens, n, p["gse_scale"])
    if p.get("mc_check"):
        seed = _need_seed(cfg)
        count = _positive_int("mc_check", p["mc_check"])
        vals = sampling.sample_eigenvalues(ens, n, count, seed).ravel()
        sd = float(np.std(vals))
        bins = _positive_int("bins", p["bins"])
        hist = core.build_histogram(vals, core.HistogramSpec(-5 * sd, 5 * sd, bins))
        return Output(overlay=(hist, curve(hist.xs), None, None), metrics={"draws": count})
    xs = parse_grid(p["grid"])
    ys = curve(xs)

    def plot(path):
        from .plotting import plot_curve

        plot_curve(xs, ys, path, ylabel="density", title=f"{ens} N={n}")

    return Output({"x": xs, "y": ys}, {"integral": float(np.trapezoid(ys, xs))}, plot=plot)


_LAWS = {
    "semicircle": (lambda x, c: density.semicircle(x), "-1.5:1.5:301"),
    "mp": (lambda x, c: density.marchenko_pastur(x, c), "0:6:601"),
    "surmise": (lambda x, c: density.wigner_surmise(x), "0:5:501"),
    "surmise-rescaled": (lambda x, c: density.wigner_surmise_rescaled(x), "0:4:401"),
    "exponential": (lambda x, c: np.exp(-x), "0:6:601"),
}


def cmd_law(cfg: RunConfig, p: dict) -> Output:
    name = p["name"]
    c = p.get("c")
    if name == "mp":
        c = _in_open_unit("c", c) if c != 1 else 1.0
    f, default_grid = _LAWS[name]
    xs = parse_grid(p.get("grid") or default_grid)
    if name.startswith("surmise") or name == "exponential":
        if xs[0] < 0:
            raise ValidationError("grid", f"{name} is defined for nonnegative arguments")
    ys = f(xs, c)

    def plot(path):
        from .plotting import plot_curve

        plot_curve(xs, ys, path, ylabel="density", title=name)

    return Output({"x": xs, "y": ys}, {"integral": float(np.trapezoid(ys, xs))}, plot=plot)


def cmd_spacing(cfg: RunConfig, p: dict) -> Output:
    seed = _need_seed(cfg)
    count = _positive_int("count", p["count"])
    bins = _positive_int("bins", p["bins"])
    if p["source"] == "goe2":
        vals = sampling.sample_eigenvalues("goe", 2, count, seed)
        s = np.diff(vals, axis=1).ravel()
        pdf, cdf = density.wigner_surmise, density.wigner_surmise_cdf
    else:
        n = _positive_int("n", p["n"], 2)
        if p["parent"] not in sampling.PARENTS:
            raise ValidationError("parent", f"choose from {sorted(sampling.PARENTS)}")
        s = sampling.iid_gap_samples(n, count, p["parent"], seed)
        pdf, cdf = (lambda x: np.exp(-x)), (lambda x: -np.expm1(-np.maximum(x, 0)))
    hi = float(np.quantile(s, 0.999))
    hist = core.build_histogram(s, core.HistogramSpec(0.0, hi, bins))
    return Output(overlay=(hist, pdf(hist.xs), s, cdf), metrics={"spacings": int(s.size)})


def cmd_coulomb(cfg: RunConfig, p: dict) -> Output:
    seed = _need_seed(cfg)
    n = _positive_int("n", p["n"], 2)
    steps = _positive_int("steps", p["steps"])
    if p["beta"] <= 0:
        raise ValidationError("beta", "must be positive")
    if p["potential"] == "wishart":
        c = _in_open_unit("c", p["c"])
        pot = coulomb.wishart_potential(c)
        theory = lambda x: density.marchenko_pastur(x, c)  # noqa: E731
        lo, hi = 0.0, density.mp_edges(c)[1] + 0.5
    else:
        pot = coulomb.gaussian_potential()
        theory = density.semicircle
        lo, hi = -2.0, 2.0
    st = coulomb.metropolis_run(pot, n, p["beta"], steps, seed)
    hist = core.build_histogram(st.samples, core.HistogramSpec(lo, hi, _positive_int("bins", p["bins"])))
    metrics = {"acceptance": st.acceptance, "step_width": st.step_width,
               "energy": float(st.energy_trace[-1]) if st.energy_trace.size else None}
    if p["potential"] == "gaussian":
        metrics["F0"] = coulomb.F0_SEMICIRCLE
    return Output(overlay=(hist, core.bin_average(theory, hist), None, None), metrics=metrics)


def _quartic(g):
    return lambda t: t + g * t**3


def cmd_tricomi(cfg: RunConfig, p: dict) -> Output:
    npts = _positive_int("npts", p["npts"], 8)
    pot = p["potential"]
    if pot == "gaussian":
        gfun, guess = (lambda t: t), (-1.0, 1.0)
    elif pot == "quartic":
        gfun, guess = _quartic(p["g"]), (-1.0, 1.0)
    else:
        c = _in_open_unit("c", p["c"])
        gfun, guess = coulomb.wishart_potential(c).Vprime, density.mp_edges(c)
        guess = (0.5 * guess[0] + 0.1, 0.9 * guess[1])
    try:
        a, b = coulomb.solve_support(gfun, guess=guess)
        sol = coulomb.tricomi_solve(gfun, a, b, npts=npts)
    except (RuntimeError, ValueError) as exc:
        raise ValidationError("potential", str(exc)) from None
    res = coulomb.tricomi_residual(sol, gfun)
    metrics = {"a": a, "b": b, "residual": res}

    def plot(path):
        from .plotting import plot_curve

        plot_curve(sol.xs, sol.ys, path, ylabel="density", title=f"{pot} equilibrium density")

    return Output({"x": sol.xs, "y": sol.ys}, metrics, passed=res <= 1e-5, plot=plot)


def cmd_free_add(cfg: RunConfig, p: dict) -> Output:
    pw = p["p"]
    if not 0 <= pw <= 1:
        raise ValidationError("p", "must lie in [0, 1]")
    c = _in_open_unit("c", p["c"])
    if p.get("mc_check"):
        seed = _need_seed(cfg)
        try:
            n, count = (int(v) for v in str(p["mc_check"]).split(","))
        except ValueError:
            raise ValidationError("mc_check", "expected N,T") from None
        _positive_int("mc_check", n, 2)
        _positive_int("mc_check", count)
        ev = resolvent.sample_free_sum(pw, c, n, count, seed)
        hist = core.build_histogram(ev, core.HistogramSpec(ev.min() - 0.05, ev.max() + 0.05,
                                                           _positive_int("bins", p["bins"])))
        theory = core.bin_average(lambda x: resolvent.free_add_density(pw, c, x), hist)
        return Output(overlay=(hist, theory, None, None), metrics={"n": n, "draws": count})
    xs = parse_grid(p["grid"])
    ys = resolvent.free_add_density(pw, c, xs)

    def plot(path):
        from .plotting import plot_curve

        plot_curve(xs, ys, path, ylabel="density", title=f"p={pw}, c={c}")

    return Output({"x": xs, "y": ys}, {"integral": float(np.trapezoid(ys, xs))}, plot=plot)


def cmd_signprob(cfg: RunConfig, p: dict) -> Output:
    n = p["n"]
    if n is None or not 1 <= n <= 12:
        raise ValidationError("n", "must lie in 1..12")
    probs = determinants.sign_count_probs(n, exact=p["exact"])
    fl = [float(v) for v in probs]
    resid = abs(float(determinants.sign_count_gf(n, 1)) - 1)
    ks = range(n + 1) if p.get("k") is None else [p["k"]]
    for k in ks:
        if not 0 <= k <= n:
            raise ValidationError("k", f"must lie in 0..{n}")
    lines = []
    for k in ks:
        exact = f"  [{probs[k]}]" if p["exact"] else ""
        lines.append(f"P(N+={k}) = {fl[k]!r}{exact}")
    lines.append(f"normalization residual |phi_N(1) - 1| = {resid!r}")
    metrics = {"normalization_residual": resid, "probabilities": {str(k): fl[k] for k in ks}}
    return Output({"k": list(ks), "probability": [fl[k] for k in ks]}, metrics, passed=resid <= 1e-8,
                  text="\n".join(lines))


def cmd_eigvec(cfg: RunConfig, p: dict) -> Output:
    seed = _need_seed(cfg)
    n = _positive_int("n", p["n"], 2)
    count = _positive_int("count", p["count"])
    comp = p["component"]
    if not 0 <= comp < n:
        raise ValidationError("component", f"must lie in 0..{n - 1}")
    beta = {"goe": 1, "gue": 2}[p["ensemble"]]
    s = eigenvectors.component_samples(p["ensemble"], n, count, seed, comp)
    metrics = {
        "ks_finite_n": core.ks_distance(s.y, lambda y: eigenvectors.p_component_cdf(y, n, beta)),
        "ks_porter_thomas": core.ks_distance(s.eta, lambda e: eigenvectors.porter_thomas_cdf(e, beta)),
        "mean_y": float(np.mean(s.y)),
    }

    def plot(path):
        from .plotting import plot_overlay

        hist = core.build_histogram(s.eta, core.HistogramSpec(0.0, float(np.quantile(s.eta, 0.99)), 50))
        theory = core.bin_average(lambda e: eigenvectors.porter_thomas(np.maximum(e, 1e-12), beta), hist)
        plot_overlay(hist.xs, hist.ys, theory, path, xlabel="eta = N |c|^2", title="Porter-Thomas")

    return Output({"y": s.y, "eta": s.eta}, metrics, plot=plot)


def cmd_check(cfg: RunConfig, p: dict) -> Output:
    seed = _need_seed(cfg)
    names = p["names"] or ["all"]
    known = {"all", "invariants", "acceptance", *checks.INVARIANTS, *checks.ACCEPTANCE}
    for name in names:
        if name not in known:
            raise ValidationError("names", f"unknown check {name!r}; choose from {sorted(known)}")
    results = checks.run_checks(names, seed=seed)
    ok = all(r.passed for r in results)
    summary = f"{sum(r.passed for r in results)}/{len(results)} checks passed"
    metrics = {r.name: {"value": r.value, "tol": r.tol, "pass": r.passed, "seconds": r.seconds,
                        "detail": r.detail} for r in results}
    return Output({"check": [r.name for r in results], "value": [r.value for r in results],
                   "tol": [r.tol for r in results], "pass": [int(r.passed) for r in results]},
                  metrics, passed=ok, text=checks.format_table(results) + "\n" + summary)


COMMANDS = {
    "sample": cmd_sample, "density": cmd_density, "law": cmd_law, "spacing": cmd_spacing,
    "coulomb": cmd_coulomb, "tricomi": cmd_tricomi, "free-add": cmd_free_add,
    "signprob": cmd_signprob, "eigvec": cmd_eigvec, "check": cmd_check,
}


# ---- parser -----------------------------------------------------------------------

def _global_flags() -> argparse.ArgumentParser:
    g = argparse.ArgumentParser(add_help=False)
    g.add_argument("--seed", type=int, help="64-bit seed (required for stochastic commands)")
    g.add_argument("--out", help="output file (stdout when omitted)")
    g.add_argument("--format", choices=("csv", "json"), default="csv")
    g.add_argument("--threads", type=int, help="upper bound on BLAS threads")
    g.add_argument("--config", help="flat key = value file; flags take precedence")
    g.add_argument("--plot", action="store_true", help="also render a PNG next to --out")
    return g


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rmt", description="Random-matrix numerical laboratory.")
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True
    g = [_global_flags()]

    sp = sub.add_parser("sample", parents=g, help="eigenvalues of sampled matrices")
    sp.add_argument("--ensemble", choices=("goe", "gue", "gse", "wishart"), required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--m", type=int)
    sp.add_argument("--beta", type=int)
    sp.add_argument("--count", type=int, default=1)

    sp = sub.add_parser("density", parents=g, help="finite-N spectral density")
    sp.add_argument("--ensemble", choices=("goe", "gue", "gse"), required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--grid", default="-6:6:601")
    sp.add_argument("--gse-scale", type=float, default=density.GSE_SAMPLING_SCALE)
    sp.add_argument("--mc-check", type=int, help="overlay a histogram of this many draws")
    sp.add_argument("--bins", type=int, default=60)

    sp = sub.add_parser("law", parents=g, help="limiting laws")
    sp.add_argument("name", choices=sorted(_LAWS))
    sp.add_argument("--c", type=float, default=0.5)
    sp.add_argument("--grid")

    sp = sub.add_parser("spacing", parents=g, help="spacing histograms")
    sp.add_argument("--source", choices=("goe2", "iid"), default="goe2")
    sp.add_argument("--parent", default="uniform")
    sp.add_argument("--n", type=int, default=1000)
    sp.add_argument("--count", type=int, default=100_000)
    sp.add_argument("--bins", type=int, default=60)

    sp = sub.add_parser("coulomb", parents=g, help="Metropolis Coulomb gas")
    sp.add_argument("--potential", choices=("gaussian", "wishart"), default="gaussian")
    sp.add_argument("--c", type=float, default=0.5)
    sp.add_argument("--n", type=int, default=100)
    sp.add_argument("--beta", type=float, default=2.0)
    sp.add_argument("--steps", type=int, default=300_000)
    sp.add_argument("--bins", type=int, default=40)

    sp = sub.add_parser("tricomi", parents=g, help="equilibrium density from the singular equation")
    sp.add_argument("--potential", choices=("gaussian", "wishart", "quartic"), default="gaussian")
    sp.add_argument("--c", type=float, default=0.5)
    sp.add_argument("--g", type=float, default=1.0, help="quartic coupling in V' = x + g x^3")
    sp.add_argument("--npts", type=int, default=200)

    sp = sub.add_parser("free-add", parents=g, help="density of p H + (1-p) W")
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--c", type=float, default=0.5)
    sp.add_argument("--grid", default="-2:7:451")
    sp.add_argument("--mc-check", help="N,T: overlay T sampled N x N sums")
    sp.add_argument("--bins", type=int, default=60)

    sp = sub.add_parser("signprob", parents=g, help="probability of k positive GUE eigenvalues")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--k", type=int)
    sp.add_argument("--exact", action="store_true", help="symbolic arithmetic path")

    sp = sub.add_parser("eigvec", parents=g, help="eigenvector component statistics")
    sp.add_argument("--ensemble", choices=("goe", "gue"), required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--count", type=int, default=100)
    sp.add_argument("--component", type=int, default=0)

    sp = sub.add_parser("check", parents=g, help="invariant and acceptance suites")
    sp.add_argument("names", nargs="*", help="all, invariants, acceptance, a module name or A1..A13")
    return parser


def _coerce(action: argparse.Action, value: str):
    if isinstance(action, argparse._StoreTrueAction):
        low = value.lower()
        if low not in ("1", "0", "true", "false", "yes", "no"):
            raise ValidationError(action.dest, f"expected a boolean, got {value!r}")
        return low in ("1", "true", "yes")
    if action.nargs in ("*", "+"):
        return value.split()
    conv = action.type or str
    try:
        out = conv(value)
    except (TypeError, ValueError):
        raise ValidationError(action.dest, f"cannot parse {value!r}") from None
    if action.choices is not None and out not in action.choices:
        raise ValidationError(action.dest, f"must be one of {sorted(action.choices)}")
    return out


def _glue_negative_values(argv: list[str]) -> list[str]:
    """``--grid -2:2:401`` -> ``--grid=-2:2:401`` so argparse does not read a flag."""
    out = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        nxt = argv[i + 1] if i + 1 < len(argv) else None
        if tok.startswith("--") and "=" not in tok and nxt is not None and re.match(r"^-\.?\d", nxt):
            out.append(f"{tok}={nxt}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def _config_path(argv: list[str]) -> str | None:
    for i, tok in enumerate(argv):
        if tok == "--config" and i + 1 < len(argv):
            return argv[i + 1]
        if tok.startswith("--config="):
            return tok.split("=", 1)[1]
    return None


def _apply_config(parser: argparse.ArgumentParser, command: str, path) -> None:
    """Install config-file values as subparser defaults; flags still override them."""
    sub = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction)).choices[command]
    actions = {a.dest: a for a in sub._actions if a.dest not in ("help", "config")}
    values = {}
    for key, raw in read_config(path).items():
        if key not in actions:
            raise ValidationError(key, f"unknown option for {command!r} in config file")
        values[key] = _coerce(actions[key], raw)
    for a in sub._actions:
        if a.required and a.dest in values:
            a.required = False
    sub.set_defaults(**values)


def _parse(argv: list[str]) -> RunConfig:
    argv = _glue_negative_values(argv)
    parser = build_parser()
    path = _config_path(argv)
    command = next((t for t in argv if t in COMMANDS), None)
    if path and command:
        _apply_config(parser, command, path)
    args = parser.parse_args(argv)
    params = {k: v for k, v in vars(args).items() if k not in GLOBAL_KEYS + ("command",)}
    if args.threads is not None and args.threads < 1:
        raise ValidationError("threads", "must be >= 1")
    return RunConfig(args.command, params, args.seed, args.out, args.format, args.threads, args.plot)


def _summary(cfg: RunConfig, out: Output) -> dict:
    return {"command": cfg.command, "params": cfg.params, "seed": cfg.seed, "metrics": out.metrics,
            "pass": bool(out.passed)}


def _write(cfg: RunConfig, out: Output, stdout) -> None:
    if out.overlay is not None:
        hist, theory, samples, cdf = out.overlay
        if cfg.out:
            out.metrics.update(emit_overlay(hist, theory, cfg.out, samples, cdf))
        else:
            out.metrics.update(overlay_metrics(hist, theory, samples, cdf))
            out.columns = {"x": hist.xs, "hist": hist.ys, "theory": theory}
        if cfg.plot and cfg.out:
            from .plotting import figure_path, plot_overlay

            plot_overlay(hist.xs, hist.ys, theory, figure_path(cfg.out), width=hist.meta.get("width"),
                         title=cfg.command)
        if cfg.out and cfg.format == "csv":
            return
    elif cfg.plot and cfg.out and out.plot is not None:
        from .plotting import figure_path

        out.plot(figure_path(cfg.out))
    if cfg.format == "json":
        payload = _summary(cfg, out)
        if cfg.out:
            core.write_json(cfg.out, payload)
        else:
            json.dump(core._jsonable(payload), stdout, indent=2, sort_keys=True)
            stdout.write("\n")
        return
    if out.text is not None and cfg.out is None:
        stdout.write(out.text + "\n")
        return
    if out.columns is not None:
        if cfg.out:
            core.write_csv(cfg.out, out.columns)
            if out.text is not None:
                stdout.write(out.text + "\n")
        else:
            buf = io.StringIO()
            names = list(out.columns)
            buf.write(",".join(names) + "\n")
            for row in zip(*(np.asarray(out.columns[k]) for k in names)):
                buf.write(",".join(core.format_float(v) for v in row) + "\n")
            stdout.write(buf.getvalue())


def _thread_limit(threads):
    if threads is None:
        return contextlib.nullcontext()
    try:
        from threadpoolctl import threadpool_limits
    except ImportError:
        return contextlib.nullcontext()
    return threadpool_limits(limits=threads)


def dispatch(argv=None, stdout=None, stderr=None) -> int:
    """Run one command; returns the exit code (0 ok, 1 failed check or runtime error, 2 bad input)."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        with contextlib.redirect_stderr(stderr):
            cfg = _parse(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except ValidationError as exc:
        stderr.write(f"rmt: error: {exc}\n")
        return 2
    try:
        with _thread_limit(cfg.threads):
            out = COMMANDS[cfg.command](cfg, cfg.params)
            _write(cfg, out, stdout)
    except ValidationError as exc:
        stderr.write(f"rmt: error: {exc}\n")
        return 2
    except (ValueError, RuntimeError, FloatingPointError, OSError) as exc:
        stderr.write(f"rmt: {cfg.command} failed: {type(exc).__name__}: {exc}\n")
        return 1
    return 0 if out.passed else 1


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
