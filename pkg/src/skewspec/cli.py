"""Command-line front end.

    skewspec <command> [--config FILE] [options]

Commands: sample, sop, kernel, cauchy, massive, verify, density.

Options can also come from a flat ``key = value`` config file (``#`` starts a
comment, keys may use ``-`` or ``_``); flags given on the command line win.
A key that the command does not accept is an error.  JSON output carries
``"schema": 1`` and is validated against ``schema/report.schema.json`` before
it is written; CSV output always starts with a header row.

Exit status: 0 on success (for ``verify``: iff every selected check passed),
1 when a verification check fails, 2 on usage, configuration or parameter
errors.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources

import numpy as np

from .ensembles import EnsembleSpec, Model, make_rng, sample_chiral, sample_ginibre, sample_spectrum
from .errors import SkewSpecError, ValidationError
from .massive import (
    MassiveContext,
    massive_even_sop,
    massive_kernel,
    massive_norm,
    massive_odd_sop_normalized,
    massive_partition_ratio,
)
from .sop import SkewPolyFamily, cauchy_transform
from .weights import MassConvention, QuadratureSpec

__all__ = ["main", "build_parser", "load_config", "resolve_threads", "validate_report", "SCHEMA_VERSION"]

SCHEMA_VERSION = 1
COMMANDS = ("sample", "sop", "kernel", "cauchy", "massive", "verify", "density")


class UsageError(Exception):
    pass


# ---------------------------------------------------------------- option table


def _bool(s):
    if isinstance(s, bool):
        return s
    v = str(s).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _complex(s) -> complex:
    return complex(str(s).strip().replace(" ", "").replace("i", "j"))


def _list(conv):
    def parse(s):
        if isinstance(s, list):
            return s
        parts = [p for p in str(s).split(",") if p.strip()]
        return [conv(p.strip()) for p in parts]

    parse.__name__ = f"list_of_{conv.__name__}"
    return parse


@dataclass(frozen=True)
class Opt:
    key: str
    conv: object
    default: object
    help: str
    choices: tuple | None = None


_OPTS = {
    o.key: o
    for o in [
        Opt("model", str, "ginibre", "ensemble", ("ginibre", "chiral")),
        Opt("n", int, 2, "matrix size N (sample, density)"),
        Opt("nu", int, 0, "chiral index nu"),
        Opt("mu", float, 0.5, "chiral non-Hermiticity mu in (0, 1)"),
        Opt("tau", float, 0.5, "elliptic non-Hermiticity tau in [0, 1)"),
        Opt("c", float, 0.0, "free constant of the odd polynomials"),
        Opt("masses", _list(float), [], "comma separated flavour masses"),
        Opt("convention", str, "minus", "mass-factor sign", ("minus", "plus")),
        Opt("abs_tol", float, 1e-12, "quadrature absolute tolerance"),
        Opt("rel_tol", float, 1e-9, "quadrature relative tolerance"),
        Opt("real_cutoff", float, None, "truncate the real line to [-L, L]"),
        Opt("radius", float, None, "truncate the complex region to |z| <= R"),
        Opt("max_subdiv", int, 5, "quadrature refinement steps"),
        Opt("samples", int, 100_000, "number of sampled matrices"),
        Opt("seed", int, 0, "random seed"),
        Opt("threads", int, None, "worker threads (default: SKEWSPEC_THREADS or all cores)"),
        Opt("format", str, "json", "output format", ("json", "csv")),
        Opt("output", str, "-", "output file ('-' for stdout)"),
        Opt("what", str, None, "quantity to tabulate"),
        Opt("k_max", int, 5, "largest polynomial degree or norm index"),
        Opt("points", _list(_complex), [0.0, 0.5, 1.0], "comma separated evaluation points (e.g. 1,2+0.5j)"),
        Opt("n_eigs", int, 2, "even number of eigenvalues 2N"),
        Opt("z", _list(_complex), [0.5], "first kernel arguments"),
        Opt("u", _list(_complex), [-0.5], "second kernel arguments"),
        Opt("degree", int, 0, "index n of t_n"),
        Opt("kappa", _list(_complex), [10j], "comma separated Cauchy arguments"),
        Opt("method", str, "quad", "evaluation route", ("quad", "mc", "both")),
        Opt("suite", _list(str), ["all"], "comma separated suites"),
        Opt("full", _bool, False, "acceptance-size grids"),
        Opt("bins", int, 40, "histogram bins per axis"),
        Opt("extent", float, None, "half width of the histogram window"),
        Opt("prefix", str, "density", "output path prefix for density files"),
        Opt("png", _bool, False, "also render a PNG with matplotlib"),
        Opt("matrices", _bool, False, "include the sampled matrices (JSON only)"),
    ]
}

_ENS = ["model", "nu", "mu", "tau", "c"]
_QUAD = ["abs_tol", "rel_tol", "real_cutoff", "radius", "max_subdiv"]
_OUT = ["format", "output"]
_MC = ["samples", "seed", "threads"]

_COMMAND_KEYS = {
    # threads is accepted everywhere; commands without a parallel loop ignore it
    "sample": ["model", "n", "nu", "mu", "tau", "seed", "samples", "matrices", "threads"] + _OUT,
    "sop": _ENS + ["what", "k_max", "points", "threads"] + _OUT,
    "kernel": _ENS + ["n_eigs", "z", "u", "threads"] + _OUT,
    "cauchy": _ENS + _QUAD + _MC + ["degree", "kappa", "method"] + _OUT,
    "massive": _ENS + ["masses", "convention", "n_eigs", "what", "points", "u", "threads"] + _OUT,
    "verify": _MC + ["suite", "full"] + _OUT,
    "density": ["model", "n", "nu", "mu", "tau", "bins", "extent", "prefix", "png"] + _MC + _OUT,
}

_WHAT = {
    "sop": ("values", "norms", "coeffs"),
    "massive": ("even", "odd", "kernel", "norm", "ratio"),
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="skewspec", description=__doc__.split("\n\n")[0])
    sub = p.add_subparsers(dest="command", metavar="command")
    sub.required = True
    for cmd in COMMANDS:
        sp = sub.add_parser(cmd, help=f"{cmd} command", argument_default=argparse.SUPPRESS)
        sp.add_argument("--config", help="flat key = value configuration file")
        for key in _COMMAND_KEYS[cmd]:
            o = _OPTS[key]
            flag = "--" + key.replace("_", "-")
            choices = _WHAT.get(cmd) if key == "what" else o.choices
            if o.conv is _bool:
                sp.add_argument(flag, dest=key, nargs="?", const=True, type=_bool, help=o.help)
            else:
                sp.add_argument(flag, dest=key, type=o.conv, choices=choices, help=o.help)
    return p


def load_config(path: str, command: str) -> dict:
    """Parse a flat key = value file, rejecting keys the command does not accept."""
    allowed = set(_COMMAND_KEYS[command])
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (s.strip() for s in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in allowed:
                raise UsageError(f"{path}:{lineno}: unknown key {key!r} for command {command!r}")
            o = _OPTS[key]
            try:
                v = o.conv(value)
            except ValueError as exc:
                raise UsageError(f"{path}:{lineno}: bad value for {key}: {exc}") from None
            choices = _WHAT.get(command) if key == "what" else o.choices
            if choices and v not in choices:
                raise UsageError(f"{path}:{lineno}: {key} must be one of {', '.join(choices)}")
            out[key] = v
    return out


def resolve_threads(value) -> int:
    """--threads, then SKEWSPEC_THREADS, then the number of available cores."""
    if value is None:
        env = os.environ.get("SKEWSPEC_THREADS")
        if env:
            try:
                value = int(env)
            except ValueError:
                raise UsageError(f"SKEWSPEC_THREADS must be an integer, got {env!r}") from None
        else:
            value = os.cpu_count() or 1
    if value < 1:
        raise UsageError("threads must be at least 1")
    return int(value)


def _resolve(args: argparse.Namespace) -> dict:
    cmd = args.command
    cfg = {k: _OPTS[k].default for k in _COMMAND_KEYS[cmd]}
    given = vars(args)
    if given.get("config"):
        try:
            cfg.update(load_config(given["config"], cmd))
        except OSError as exc:
            raise UsageError(f"cannot read config: {exc}") from None
    cfg.update({k: v for k, v in given.items() if k in cfg})
    if "what" in cfg and cfg["what"] is None:
        cfg["what"] = _WHAT[cmd][0]
    if "threads" in cfg:
        cfg["threads"] = resolve_threads(cfg["threads"])
    return cfg


# ---------------------------------------------------------------- output


def _schema():
    text = resources.files("skewspec").joinpath("schema/report.schema.json").read_text()
    return json.loads(text)


def validate_report(report: dict) -> None:
    import jsonschema

    try:
        jsonschema.validate(report, _schema())
    except jsonschema.ValidationError as exc:
        raise ValidationError(f"report does not match the schema: {exc.message}") from None


def _num(v):
    if isinstance(v, (complex, np.complexfloating)):
        raise TypeError("complex values must be split before output")
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if np.isfinite(v) else None
    return v


def _emit(text: str, path: str):
    if path in ("-", "", None):
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def _json_text(report: dict) -> str:
    validate_report(report)
    return json.dumps(report, indent=2, allow_nan=False) + "\n"


def _csv_text(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(columns)
    for r in rows:
        w.writerow(["" if v is None else (repr(v) if isinstance(v, float) else v) for v in r])
    return buf.getvalue()


def _write_table(cfg, command, params, columns, rows):
    rows = [[_num(v) for v in r] for r in rows]
    if cfg["format"] == "csv":
        _emit(_csv_text(columns, rows), cfg["output"])
    else:
        report = {"schema": SCHEMA_VERSION, "command": command, "params": params,
                  "table": {"columns": list(columns), "rows": rows}}
        _emit(_json_text(report), cfg["output"])


def _c(z):
    z = complex(z)
    return [float(z.real), float(z.imag)]


# ---------------------------------------------------------------- commands


def _family(cfg) -> SkewPolyFamily:
    if cfg["model"] == "chiral":
        return SkewPolyFamily.laguerre(cfg["nu"], cfg["mu"], cfg["c"])
    return SkewPolyFamily.hermite(cfg["tau"], cfg["c"])


def _ens_params(cfg) -> dict:
    p = {"model": cfg["model"]}
    if cfg["model"] == "chiral":
        p.update(nu=cfg["nu"], mu=cfg["mu"])
    else:
        p["tau"] = cfg["tau"]
    if "c" in cfg:
        p["c"] = cfg["c"]
    return p


def _spec(cfg, n) -> EnsembleSpec:
    if cfg["model"] == "chiral":
        return EnsembleSpec.chiral(n, cfg["nu"], cfg["mu"])
    return EnsembleSpec.ginibre(n, cfg["tau"])


def cmd_sample(cfg):
    spec = _spec(cfg, cfg["n"])
    if cfg["samples"] < 0:
        raise ValidationError("samples must be nonnegative")
    rng = make_rng(cfg["seed"])
    records = []
    for i in range(cfg["samples"]):
        if cfg["matrices"]:
            state = rng.bit_generator.state
        s = sample_spectrum(spec, rng)
        rec = {"index": i, "real_eigs": [float(x) for x in s.real_eigs],
               "pair_reps": [_c(z) for z in s.pair_reps], "zero_modes": s.zero_modes}
        if cfg["matrices"]:
            # redraw the same matrix from the saved state
            replay = np.random.Generator(type(rng.bit_generator)())
            replay.bit_generator.state = state
            if spec.model is Model.CHIRAL:
                A, B = sample_chiral(spec, replay)
                rec["matrix"] = {"A": A.tolist(), "B": B.tolist()}
            else:
                rec["matrix"] = sample_ginibre(spec, replay).tolist()
        records.append(rec)
    params = _ens_params(cfg)
    params.pop("c", None)
    params.update(n=cfg["n"], samples=cfg["samples"], seed=cfg["seed"])
    if cfg["format"] == "csv":
        if cfg["matrices"]:
            raise ValidationError("--matrices needs JSON output")
        rows = []
        for r in records:
            rows.extend([r["index"], "real", x, 0.0, r["zero_modes"]] for x in r["real_eigs"])
            rows.extend([r["index"], "pair", z[0], z[1], r["zero_modes"]] for z in r["pair_reps"])
        _emit(_csv_text(("sample", "kind", "re", "im", "zero_modes"), rows), cfg["output"])
    else:
        report = {"schema": SCHEMA_VERSION, "command": "sample", "params": params, "records": records}
        _emit(_json_text(report), cfg["output"])
    return 0


def cmd_sop(cfg):
    fam = _family(cfg)
    kmax = cfg["k_max"]
    if kmax < 0:
        raise ValidationError("k_max must be nonnegative")
    params = _ens_params(cfg)
    params.update(what=cfg["what"], k_max=kmax)
    if cfg["what"] == "norms":
        cols = ("k", "h")
        rows = [(k, fam.norm(k)) for k in range(kmax + 1)]
    elif cfg["what"] == "coeffs":
        cols = ("k", "power", "coefficient", "value")
        rows = []
        for k in range(kmax + 1):
            for j, a in enumerate(fam.coeffs(k)):
                a = Fraction(a)
                rows.append((k, j, str(a), float(a)))
    else:
        pts = cfg["points"]
        params["points"] = [_c(z) for z in pts]
        Q = fam.q_all(kmax, np.asarray(pts, dtype=complex))
        cols = ("k", "z_re", "z_im", "q_re", "q_im")
        rows = [(k, z.real, z.imag, Q[k, i].real, Q[k, i].imag) for k in range(kmax + 1) for i, z in enumerate(pts)]
    _write_table(cfg, "sop", params, cols, rows)
    return 0


def cmd_kernel(cfg):
    fam = _family(cfg)
    n = cfg["n_eigs"]
    params = _ens_params(cfg)
    params.update(n_eigs=n, z=[_c(z) for z in cfg["z"]], u=[_c(u) for u in cfg["u"]])
    rows = []
    for z in cfg["z"]:
        for u in cfg["u"]:
            k = complex(fam.kernel(n, complex(z), complex(u)))
            rows.append((z.real, z.imag, u.real, u.imag, k.real, k.imag))
    _write_table(cfg, "kernel", params, ("z_re", "z_im", "u_re", "u_im", "K_re", "K_im"), rows)
    return 0


def cmd_cauchy(cfg):
    from .verify.mc import mc_cauchy

    fam = _family(cfg)
    n = cfg["degree"]
    if n < 0:
        raise ValidationError("degree must be nonnegative")
    q = QuadratureSpec(cfg["abs_tol"], cfg["rel_tol"], cfg["real_cutoff"], cfg["radius"], cfg["max_subdiv"])
    params = _ens_params(cfg)
    params.update(degree=n, method=cfg["method"], kappa=[_c(k) for k in cfg["kappa"]])
    if cfg["method"] != "quad":
        params.update(samples=cfg["samples"], seed=cfg["seed"])
    cols = ("kappa_re", "kappa_im", "t_re", "t_im", "mc_re", "mc_im", "mc_std_error", "sigma_distance")
    rows = []
    spec = fam.ensemble(0)
    for kap in cfg["kappa"]:
        t = complex(cauchy_transform(fam, n, kap, q)) if cfg["method"] != "mc" else None
        m = [None, None, None, None]
        if cfg["method"] != "quad":
            mode, n_eigs = ("even", n + 2) if n % 2 == 0 else ("odd", n + 1)
            rep = mc_cauchy(spec, n_eigs, kappa=kap, mode=mode, c=cfg["c"], samples=cfg["samples"],
                            seed=cfg["seed"], threads=cfg["threads"], quad=q)
            m = [rep.estimate.real, rep.estimate.imag, rep.std_error, rep.sigma_distance]
        rows.append([kap.real, kap.imag, None if t is None else t.real, None if t is None else t.imag] + m)
    _write_table(cfg, "cauchy", params, cols, rows)
    return 0


def cmd_massive(cfg):
    fam = _family(cfg)
    conv = MassConvention.MINUS if cfg["convention"] == "minus" else MassConvention.PLUS
    ctx = MassiveContext(fam, tuple(cfg["masses"]), cfg["n_eigs"], conv)
    what = cfg["what"]
    params = _ens_params(cfg)
    params.update(masses=list(ctx.masses), convention=conv.value, n_eigs=ctx.n_eigs, what=what)
    if what in ("norm", "ratio"):
        if what == "norm":
            cols, rows = ("k", "h_re", "h_im"), []
            for k in range(ctx.N):
                v = complex(massive_norm(ctx, k))
                rows.append((k, v.real, v.imag))
        else:
            v = complex(massive_partition_ratio(ctx))
            cols, rows = ("ratio_re", "ratio_im"), [(v.real, v.imag)]
    elif what == "kernel":
        params.update(points=[_c(z) for z in cfg["points"]], u=[_c(u) for u in cfg["u"]])
        cols, rows = ("z_re", "z_im", "u_re", "u_im", "K_re", "K_im"), []
        for z in cfg["points"]:
            for u in cfg["u"]:
                v = complex(massive_kernel(ctx, z, u))
                rows.append((z.real, z.imag, u.real, u.imag, v.real, v.imag))
    else:
        params["points"] = [_c(z) for z in cfg["points"]]
        f = massive_even_sop if what == "even" else (lambda c, z: massive_odd_sop_normalized(c, z, cfg["c"]))
        cols, rows = ("z_re", "z_im", "q_re", "q_im"), []
        for z in cfg["points"]:
            v = complex(f(ctx, z))
            rows.append((z.real, z.imag, v.real, v.imag))
    _write_table(cfg, "massive", params, cols, rows)
    return 0


def cmd_verify(cfg):
    from .verify.suites import SUITES, SuiteOptions, run_suites

    names = cfg["suite"]
    for s in names:
        if s != "all" and s not in SUITES:
            raise UsageError(f"unknown suite {s!r}; choose from {', '.join(SUITES)} or all")
    opt = SuiteOptions(samples=cfg["samples"], seed=cfg["seed"], threads=cfg["threads"], full=cfg["full"])
    results = run_suites(names, opt)
    passed = all(r["verdict"] == "pass" for r in results)
    params = {"suite": names, "samples": cfg["samples"], "seed": cfg["seed"], "full": cfg["full"]}
    if cfg["format"] == "csv":
        rows = [(r.get("suite", ""), r["check"], r["verdict"], json.dumps(r["params"], sort_keys=True))
                for r in results]
        _emit(_csv_text(("suite", "check", "verdict", "params"), rows), cfg["output"])
    else:
        report = {"schema": SCHEMA_VERSION, "command": "verify", "params": params,
                  "results": results, "passed": passed}
        _emit(_json_text(report), cfg["output"])
    return 0 if passed else 1


def cmd_density(cfg):
    from . import plotting
    from .verify.density import mc_density_histogram, mirror_chi2

    spec = _spec(cfg, cfg["n"])
    if cfg["bins"] < 1:
        raise ValidationError("bins must be positive")
    hist = mc_density_histogram(spec, cfg["samples"], cfg["bins"], seed=cfg["seed"], extent=cfg["extent"],
                                threads=cfg["threads"])
    prefix = cfg["prefix"]
    d = os.path.dirname(prefix)
    if d:
        os.makedirs(d, exist_ok=True)
    p2, pr, gp, png = (f"{prefix}_2d.csv", f"{prefix}_real.csv", f"{prefix}.gp", f"{prefix}.png")
    plotting.write_density_csv(hist, p2, pr)
    title = f"{spec.model.value} N={spec.n}"
    with open(gp, "w", newline="") as fh:
        fh.write(plotting.gnuplot_script(p2, pr, png, title))
    files = [p2, pr, gp]
    if cfg["png"]:
        try:
            plotting.render_png(hist, png, title)
        except ImportError:
            raise ValidationError("--png needs matplotlib (pip install 'artifact[plot]')") from None
        files.append(png)
    params = _ens_params(cfg)
    params.update(n=cfg["n"], samples=cfg["samples"], seed=cfg["seed"], bins=cfg["bins"])
    mirror = mirror_chi2(hist)
    summary = {"real_fraction": hist.real_fraction, "extent": float(hist.x_edges[-1]),
               "x_bins": int(hist.counts2d.shape[0]), "y_bins": int(hist.counts2d.shape[1]),
               "mirror_chi2": mirror["chi2"], "mirror_dof": mirror["dof"]}
    if cfg["format"] == "csv":
        rows = [(k, _num(v)) for k, v in summary.items()]
        _emit(_csv_text(("key", "value"), rows), cfg["output"])
    else:
        report = {"schema": SCHEMA_VERSION, "command": "density", "params": params,
                  "summary": summary, "files": files}
        _emit(_json_text(report), cfg["output"])
    return 0


_DISPATCH = {
    "sample": cmd_sample,
    "sop": cmd_sop,
    "kernel": cmd_kernel,
    "cauchy": cmd_cauchy,
    "massive": cmd_massive,
    "verify": cmd_verify,
    "density": cmd_density,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _resolve(args)
        return _DISPATCH[args.command](cfg)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"skewspec {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (SkewSpecError, OSError) as exc:
        print(f"skewspec {args.command}: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
