"""Command-line interface: ``casimir-fluct {eta,gamma,fit-asymptotes,verify}``.

Exit codes: 0 success, 1 verification failure, 2 at least one flagged
(unconverged) estimate, 64 usage error, 65 bad input data, 74 I/O error.

Configuration precedence is flags > ``--config`` JSON > built-in defaults.
Each CSV carries ``#`` header lines with the merged configuration and its
sha256; with ``--out FILE`` a ``FILE.manifest.json`` sidecar adds the wall
time, thread count and backend.  Values do not depend on ``--threads``.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
import time
import warnings

import numpy as np

from . import __version__

EXIT_OK, EXIT_VERIFY, EXIT_FLAGGED = 0, 1, 2
EXIT_USAGE, EXIT_DATA, EXIT_IO = 64, 65, 74

DEFAULTS = {
    "eta": {"zmin": 1e-3, "zmax": 1e2, "points": 60, "eps_bg": 1.0, "n_alpha_s": 0.0, "tol": 1e-4},
    "gamma": {
        "order": 1,
        "zmin": 1e-2,
        "zmax": 1e2,
        "points": 17,
        "budget": 1 << 18,
        "replications": 16,
        "seed": 20160601,
        "n_alpha_s": 1e-2,
        "n_lambda3": 1.0,
        "target_rel_error": 0.02,
        "reading": "projected",
        "weights": "derived",
        "coherent_factor": 1.0,
    },
}

# plateau windows in z/lambda for fit-asymptotes
REGIME_WINDOWS = {"short": (1e-2, 1e-1), "long": (10.0, 100.0)}


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser():
    p = _Parser(prog="casimir-fluct", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    e = sub.add_parser("eta", help="reduction factor eta/(n alpha_s) on a log grid")
    _grid_args(e)
    e.add_argument("--eps-bg", type=float, dest="eps_bg")
    e.add_argument("--n-alpha-s", type=float, dest="n_alpha_s",
                   help="0 (default) selects the first-order coefficient")
    e.add_argument("--tol", type=float, help="absolute tolerance on eta/(n alpha_s)")
    _io_args(e)

    g = sub.add_parser("gamma", help="scaled relative fluctuations on a log grid")
    g.add_argument("--order", type=int, choices=(1, 2))
    _grid_args(g)
    g.add_argument("--budget", type=int, help="points per randomization (power of two)")
    g.add_argument("--replications", type=int)
    g.add_argument("--seed", type=int)
    g.add_argument("--n-alpha-s", type=float, dest="n_alpha_s")
    g.add_argument("--n-lambda3", type=float, dest="n_lambda3")
    g.add_argument("--target-rel-error", type=float, dest="target_rel_error")
    g.add_argument("--reading", choices=("projected", "literal"), help="order 2 only")
    g.add_argument("--weights", choices=("derived", "squared"), help="order 2 only")
    g.add_argument("--coherent-factor", type=float, dest="coherent_factor", help="order 2 only")
    g.add_argument("--threads", type=int, help="worker threads (default: $CASIMIR_THREADS or 1)")
    g.add_argument("--backend", choices=("cython", "numpy"))
    _io_args(g)

    f = sub.add_parser("fit-asymptotes", help="plateau constant from a gamma CSV")
    f.add_argument("--input", required=True)
    f.add_argument("--regime", required=True, choices=("short", "long"))
    f.add_argument("--zrange", type=float, nargs=2, metavar=("ZLO", "ZHI"))

    v = sub.add_parser("verify", help="run the oracle suite")
    v.add_argument("--level", choices=("fast", "full"), default="fast")
    return p


def _grid_args(p):
    p.add_argument("--zmin", type=float)
    p.add_argument("--zmax", type=float)
    p.add_argument("--points", type=int)


def _io_args(p):
    p.add_argument("--out", help="CSV path (default: stdout)")
    p.add_argument("--config", help="JSON file with default values for the flags")


# ------------------------------------------------------------ configuration


def merge_config(command, args):
    """Defaults, then the JSON config file, then explicit flags."""
    cfg = dict(DEFAULTS[command])
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                filecfg = json.load(fh)
        except OSError as exc:
            raise OSError(f"cannot read config {args.config}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise DataError(f"config {args.config} is not valid JSON: {exc}") from exc
        if not isinstance(filecfg, dict):
            raise DataError("config must be a JSON object")
        unknown = set(filecfg) - set(cfg)
        if unknown:
            raise UsageError(f"unknown config keys for {command}: {sorted(unknown)}")
        cfg.update(filecfg)
    for key in cfg:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    return cfg


def config_hash(cfg) -> str:
    return hashlib.sha256(json.dumps(cfg, sort_keys=True).encode()).hexdigest()


def z_grid(cfg):
    zmin, zmax, points = cfg["zmin"], cfg["zmax"], int(cfg["points"])
    if not (zmin > 0 and zmax > zmin):
        raise UsageError("need 0 < zmin < zmax")
    if points < 2:
        raise UsageError("--points must be >= 2")
    return np.logspace(math.log10(zmin), math.log10(zmax), points)


def _fmt(x):
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    if isinstance(x, str):
        return x
    return f"{float(x):.12g}"


def render_csv(command, cfg, columns, rows, backend=None):
    buf = io.StringIO()
    buf.write(f"# casimir-fluct {__version__} {command}\n")
    buf.write(f"# config-sha256: {config_hash(cfg)}\n")
    buf.write(f"# config: {json.dumps(cfg, sort_keys=True)}\n")
    if backend:
        buf.write(f"# backend: {backend}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(x) for x in r])
    return buf.getvalue()


def read_csv(path):
    """Parse a CSV written by this tool; returns (header dict, columns, rows)."""
    header, lines = {}, []
    with open(path) as fh:
        for line in fh:
            if line.startswith("#"):
                body = line[1:].strip()
                if body.startswith("config:"):
                    header["config"] = json.loads(body[len("config:"):])
                elif ":" in body:
                    k, v = body.split(":", 1)
                    header[k.strip()] = v.strip()
                else:
                    header["tool"] = body
            elif line.strip():
                lines.append(line)
    if not lines:
        raise DataError(f"{path}: no data")
    rd = list(csv.reader(lines))
    return header, rd[0], rd[1:]


def _emit(text, out, manifest):
    if out is None:
        sys.stdout.write(text)
        return
    with open(out, "w") as fh:
        fh.write(text)
    with open(out + ".manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _manifest(command, cfg, t0, **extra):
    m = {
        "tool": "casimir-fluct",
        "version": __version__,
        "command": command,
        "config": cfg,
        "config_sha256": config_hash(cfg),
        "wall_time_s": round(time.perf_counter() - t0, 3),
    }
    m.update(extra)
    return m


# --------------------------------------------------------------- commands


def cmd_eta(args):
    from .empotential import eta
    from .units import ModelParams

    cfg = merge_config("eta", args)
    zs = z_grid(cfg)
    t0 = time.perf_counter()
    linear = cfg["n_alpha_s"] == 0 and cfg["eps_bg"] == 1.0
    rows, flagged = [], False
    for z in zs:
        try:
            p = ModelParams(float(z), n_alpha_s=cfg["n_alpha_s"], eps_bg=cfg["eps_bg"])
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        pt = eta(p, tol=cfg["tol"], linearized=linear)
        flagged |= not pt.converged
        rows.append((z, pt.eta_over_nalphas, pt.abs_error, pt.eta, "ok" if pt.converged else "flagged"))
    text = render_csv("eta", cfg, ["z_over_lambda", "eta_over_nalphas", "abs_error", "eta", "status"], rows)
    _emit(text, args.out, _manifest("eta", cfg, t0, first_order=linear))
    return EXIT_FLAGGED if flagged else EXIT_OK


def cmd_gamma(args):
    from . import kernels
    from .quadrature import QuadSpec, default_workers
    from .units import ModelParams
    from .variance_double import DoubleOptions, gamma_double
    from .variance_single import gamma_single

    cfg = merge_config("gamma", args)
    zs = z_grid(cfg)
    threads = args.threads
    if threads is not None and threads < 1:
        raise UsageError("--threads must be >= 1")
    backend = args.backend or kernels.BACKEND
    try:
        kernels.get_backend(backend)
    except ImportError as exc:
        raise UsageError(str(exc)) from exc
    order = int(cfg["order"])
    try:
        spec = QuadSpec(
            dim=7 if order == 1 else 9,
            budget=int(cfg["budget"]),
            replications=int(cfg["replications"]),
            seed=int(cfg["seed"]),
            target_rel_error=float(cfg["target_rel_error"]),
        )
        options = DoubleOptions(cfg["reading"], cfg["weights"], float(cfg["coherent_factor"]))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    t0 = time.perf_counter()
    rows, flagged = [], False
    for z in zs:
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                p = ModelParams(float(z), n_alpha_s=cfg["n_alpha_s"], n_lambdaA3=cfg["n_lambda3"])
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        if order == 1:
            gp = gamma_single(p, spec, workers=threads, backend=backend)
        else:
            gp = gamma_double(p, spec, options, workers=threads, backend=backend)
        flagged |= not gp.converged
        rows.append((z, gp.gamma_scaled, gp.stat_error, gp.n_samples, gp.seed,
                     "ok" if gp.converged else "flagged"))
    cols = ["z_over_lambda", "scaled_value", "std_error", "n_samples", "seed", "status"]
    text = render_csv("gamma", cfg, cols, rows, backend=backend)
    scaling = "gamma*sqrt(n z^3)" if order == 1 else "gamma2*n*lambda^3/(n alpha_s)"
    _emit(text, args.out, _manifest(
        "gamma", cfg, t0, backend=backend, threads=threads or default_workers(),
        scaling=scaling, double_options=options.as_dict(), quad_spec=spec.as_dict(),
    ))
    return EXIT_FLAGGED if flagged else EXIT_OK


def plateau(values):
    """Mean and 95% t-interval of a plateau sample."""
    from scipy import stats

    v = np.asarray(values, dtype=float)
    if np.all(v == v[0]):
        c = float(v[0])
        return c, (c, c)
    mean = math.fsum(v) / len(v)
    half = float(stats.t.ppf(0.975, len(v) - 1) * np.std(v, ddof=1) / math.sqrt(len(v)))
    return mean, (mean - half, mean + half)


def cmd_fit(args):
    try:
        header, cols, rows = read_csv(args.input)
    except OSError as exc:
        raise OSError(f"cannot read {args.input}: {exc}") from exc
    except (ValueError, csv.Error) as exc:
        raise DataError(f"{args.input}: {exc}") from exc
    try:
        iz, iv = cols.index("z_over_lambda"), cols.index("scaled_value")
        data = np.array([[float(r[iz]), float(r[iv])] for r in rows])
    except (ValueError, IndexError) as exc:
        raise DataError(f"{args.input}: not a gamma CSV ({exc})") from exc
    order = int(header.get("config", {}).get("order", 1))
    lo, hi = args.zrange or REGIME_WINDOWS[args.regime]
    sel = (data[:, 0] >= lo * (1 - 1e-9)) & (data[:, 0] <= hi * (1 + 1e-9)) & np.isfinite(data[:, 1])
    z, val = data[sel, 0], data[sel, 1]
    if len(z) < 4:
        raise DataError(f"need >= 4 points in [{lo:g}, {hi:g}], found {len(z)}")
    if order == 2:
        # figure-axis value to the regime's plateau scaling
        val = val * z**3 if args.regime == "long" else val * z**2
    const, ci = plateau(val)
    out = {"constant": const, "ci95": list(ci), "n_points": int(len(z)), "regime": args.regime,
           "zrange": [lo, hi], "order": order}
    json.dump(out, sys.stdout, sort_keys=True)
    sys.stdout.write("\n")
    return EXIT_OK


def cmd_verify(args):
    from .verify import run_checks

    results = run_checks(args.level)
    width = max(len(r.name) for r in results)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name:<{width}}  {r.seconds:6.2f}s  {r.detail}")
    failed = [r.name for r in results if not r.passed]
    if failed:
        print("failed: " + ", ".join(failed))
        return EXIT_VERIFY
    print(f"all {len(results)} checks passed")
    return EXIT_OK


COMMANDS = {"eta": cmd_eta, "gamma": cmd_gamma, "fit-asymptotes": cmd_fit, "verify": cmd_verify}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"casimir-fluct: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"casimir-fluct: bad data: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"casimir-fluct: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
