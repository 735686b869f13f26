"""Command-line front end: tables of lambda, coefficients, kernels, Q traces and spectra.

Every command writes one CSV or JSON table (``--format``) to ``--output`` or
to ``$HYPDOT_OUTPUT_DIR/<command>.<format>``. ``qtrace`` and ``spectrum``
also write ``<stem>_plot.py``, a matplotlib script that reads only that table.
Exit status: 0 on success, 2 for an invalid configuration, 1 for a numerical
failure (message on standard error). Nothing is written unless the run succeeds.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from . import __version__, greens, krein, spectrum, spheroidal, tables
from .errors import DomainError, HypdotError

OUTPUT_ENV = "HYPDOT_OUTPUT_DIR"
COMMANDS = ("lambda", "coeffs", "green", "qtrace", "spectrum", "sweep")
TOLERANCES = {
    "lambda_tol": 1e-13,
    "root_xtol": spectrum.ROOT_XTOL,
    "match_tol": spectrum.MATCH_TOL,
    "ambiguity_tol": spectrum.AMBIGUITY_TOL,
    "green_tol": 1e-10,
}


@dataclass
class RunConfig:
    command: str
    params: greens.ModelParams | None
    chi: krein.ExtensionParam
    window: tuple | None
    m_max: int | None
    output_path: str
    format: str
    extra: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# Argument parsing and validation
# ---------------------------------------------------------------------------


def _chi_arg(text):
    try:
        return krein.ExtensionParam.parse(text)
    except (ValueError, DomainError) as exc:
        raise argparse.ArgumentTypeError(f"invalid chi {text!r}: {exc}")


def _finite(text):
    value = float(text)
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"expected a finite number, got {text!r}")
    return value


def build_parser():
    ap = argparse.ArgumentParser(prog="hypdot", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"hypdot {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--output", "-o", help="output file (default: $HYPDOT_OUTPUT_DIR/<command>.<format>)")
        p.add_argument("--format", choices=("csv", "json"), help="table format (default: from --output suffix, else csv)")

    def model(p, required=True):
        p.add_argument("--a", type=_finite, required=required, help="curvature radius a > 0")
        p.add_argument("--omega", type=_finite, required=required, help="oscillator frequency omega > 0")

    p = sub.add_parser("lambda", help="spheroidal eigenvalue lambda^mu_nu(theta)")
    p.add_argument("--mu", type=int, default=0)
    p.add_argument("--nu", type=_finite, required=True)
    p.add_argument("--nu-im", type=_finite, default=0.0, help="imaginary part of nu")
    p.add_argument("--theta", type=_finite, help="spheroidicity (default: from --a and --omega)")
    model(p, required=False)
    common(p)

    p = sub.add_parser("coeffs", help="coefficient table a_r, a_0 = 1")
    p.add_argument("--mu", type=int, default=0)
    p.add_argument("--nu", type=_finite, required=True)
    p.add_argument("--nu-im", type=_finite, default=0.0)
    p.add_argument("--theta", type=_finite, required=True)
    p.add_argument("--window", type=int, default=spheroidal.DEFAULT_WINDOW, help="largest |r|")
    common(p)

    p = sub.add_parser("green", help="H-scale kernel of H(chi) at one pair of points")
    model(p)
    p.add_argument("--z", type=_finite, required=True, help="real part of the spectral parameter")
    p.add_argument("--z-im", type=_finite, default=0.0)
    p.add_argument("--xi1", type=_finite, required=True)
    p.add_argument("--phi1", type=_finite, default=0.0)
    p.add_argument("--xi2", type=_finite, required=True)
    p.add_argument("--phi2", type=_finite, default=0.0)
    p.add_argument("--chi", type=_chi_arg, default=krein.ExtensionParam(math.inf))
    common(p)

    p = sub.add_parser("qtrace", help="Q^H on a real grid, with its poles")
    model(p)
    p.add_argument("--z-from", type=_finite, required=True)
    p.add_argument("--z-to", type=_finite, required=True)
    p.add_argument("--n", type=int, default=200)
    common(p)

    p = sub.add_parser("spectrum", help="eigenvalues of H(chi) in a window")
    model(p)
    p.add_argument("--chi", type=_chi_arg, default=krein.ExtensionParam(math.inf))
    p.add_argument("--window", type=_finite, nargs=2, default=(0.0, 10.0), metavar=("LO", "HI"))
    p.add_argument("--m-max", type=int, help="highest channel |m| (default: all channels that can reach the window)")
    p.add_argument("--route", choices=("auto", "series", "ode"), default="auto")
    common(p)

    p = sub.add_parser("sweep", help="spectra over a grid of (a, omega, chi, m_max)")
    p.add_argument("--a", type=_finite, nargs="+", required=True)
    p.add_argument("--omega", type=_finite, nargs="+", required=True)
    p.add_argument("--chi", type=_chi_arg, nargs="+", default=[krein.ExtensionParam(math.inf)])
    p.add_argument("--m-max", type=int, nargs="+", default=[None])
    p.add_argument("--window", type=_finite, nargs=2, default=(0.0, 10.0), metavar=("LO", "HI"))
    p.add_argument("--route", choices=("auto", "series", "ode"), default="auto")
    p.add_argument("--jobs", type=int, default=0, help="worker processes (0: one per CPU, 1: serial)")
    common(p)
    return ap


def _output(args):
    fmt = args.format
    path = args.output
    if path is None:
        fmt = fmt or "csv"
        path = os.path.join(os.environ.get(OUTPUT_ENV, "."), f"{args.command}.{fmt}")
    elif fmt is None:
        fmt = "json" if path.lower().endswith(".json") else "csv"
    folder = os.path.dirname(os.path.abspath(path)) or "."
    probe = folder
    while not os.path.exists(probe):
        probe = os.path.dirname(probe)
    if os.path.isdir(path):
        raise DomainError(f"output path {path!r} is a directory")
    if not os.access(probe, os.W_OK):
        raise DomainError(f"output directory {folder!r} is not writable")
    return path, fmt


def _window(pair):
    lo, hi = pair
    if not hi > lo:
        raise DomainError(f"window must satisfy LO < HI, got {lo} {hi}")
    return (float(lo), float(hi))


def make_config(args):
    """RunConfig from parsed arguments; raises DomainError on invalid input."""
    path, fmt = _output(args)
    cmd = args.command
    chi = getattr(args, "chi", krein.ExtensionParam(math.inf))
    params = None
    extra = {}
    window = None
    m_max = None
    if cmd in ("lambda", "coeffs"):
        if args.mu < 0:
            raise DomainError("--mu must be >= 0")
        theta = args.theta
        if theta is None:
            if args.a is None or args.omega is None:
                raise DomainError("give --theta or both --a and --omega")
            params = greens.ModelParams(args.a, args.omega)
            theta = params.theta
        nu = complex(args.nu, args.nu_im)
        spheroidal.SpheroidalIndex(args.mu, nu, theta)
        extra = {"mu": args.mu, "nu": nu, "theta": theta}
        if cmd == "coeffs":
            if args.window < 8:
                raise DomainError("--window must be at least 8")
            extra["window"] = args.window
    elif cmd == "green":
        params = greens.ModelParams(args.a, args.omega)
        if min(args.xi1, args.xi2) < 1.0:
            raise DomainError("--xi1 and --xi2 must be >= 1")
        if not chi.is_friedrichs and min(args.xi1, args.xi2) == 1.0:
            raise DomainError("finite --chi needs --xi1 > 1 and --xi2 > 1")
        extra = {k: getattr(args, k) for k in ("z", "z_im", "xi1", "phi1", "xi2", "phi2")}
    elif cmd == "qtrace":
        params = greens.ModelParams(args.a, args.omega)
        if args.n < 2:
            raise DomainError("--n must be >= 2")
        if not args.z_to > args.z_from:
            raise DomainError("--z-to must exceed --z-from")
        extra = {"z_from": args.z_from, "z_to": args.z_to, "n": args.n}
    elif cmd == "spectrum":
        params = greens.ModelParams(args.a, args.omega)
        window = _window(args.window)
        m_max = args.m_max
        if m_max is not None and m_max < 0:
            raise DomainError("--m-max must be >= 0")
        extra = {"route": args.route}
    elif cmd == "sweep":
        window = _window(args.window)
        grid = []
        for a in sorted(set(args.a)):
            for w in sorted(set(args.omega)):
                greens.ModelParams(a, w)
                for mm in sorted(set(args.m_max), key=lambda v: -1 if v is None else v):
                    if mm is not None and mm < 0:
                        raise DomainError("--m-max values must be >= 0")
                    grid.append((a, w, mm))
        if args.jobs < 0:
            raise DomainError("--jobs must be >= 0")
        chis = sorted(set(args.chi), key=lambda c: c.chi)
        extra = {"grid": grid, "chis": chis, "route": args.route, "jobs": args.jobs}
    return RunConfig(cmd, params, chi, window, m_max, path, fmt, extra)


# ---------------------------------------------------------------------------
# Commands; each returns (columns, rows, provenance fields)
# ---------------------------------------------------------------------------


def _split(name, value):
    value = complex(value)
    return {f"{name}_re": value.real, f"{name}_im": value.imag}


def _run_lambda(cfg):
    e = cfg.extra
    index = spheroidal.SpheroidalIndex(e["mu"], e["nu"], e["theta"])
    lam = spheroidal.lambda_eig(index, tol=TOLERANCES["lambda_tol"])
    row = {"mu": e["mu"], **_split("nu", e["nu"]), "theta": float(e["theta"])}
    row.update(_split("lambda", lam.value))
    row["residual"] = float(lam.residual)
    return list(row), [row], {"theta": float(e["theta"])}


def _run_coeffs(cfg):
    e = cfg.extra
    index = spheroidal.SpheroidalIndex(e["mu"], e["nu"], e["theta"])
    lam = spheroidal.lambda_eig(index, tol=TOLERANCES["lambda_tol"])
    table = spheroidal.coefficients(index, lam, e["window"])
    rows = [{"r": int(r), **_split("a", table.a(int(r)))} for r in table.r]
    cols = ["r", "a_re", "a_im"]
    prov = {"theta": float(e["theta"]), **_split("lambda", lam.value), "tail_residual": table.tail_residual}
    return cols, rows, prov


def _run_green(cfg):
    e = cfg.extra
    z = complex(e["z"], e["z_im"])
    value = krein.perturbed_green(cfg.chi, z, e["xi1"], e["phi1"], e["xi2"], e["phi2"], cfg.params, tol=TOLERANCES["green_tol"])
    row = {**_split("z", z), "xi1": e["xi1"], "phi1": e["phi1"], "xi2": e["xi2"], "phi2": e["phi2"]}
    row.update(_split("G", value))
    return list(row), [row], {}


def _run_qtrace(cfg):
    e = cfg.extra
    tr = krein.q_trace(cfg.params, e["z_from"], e["z_to"], e["n"])
    rows = [{"kind": "sample", "z": z, "q_H": q} for z, q in zip(tr.grid, tr.q_values)]
    rows += [{"kind": "pole", "z": p, "q_H": math.nan} for p in tr.poles]
    return ["kind", "z", "q_H"], rows, {"pole_certify": krein.POLE_CERTIFY}


SPECTRUM_COLUMNS = ["z", "z_tilde", "channel", "channels", "multiplicity", "class", "ambiguous"]


def _spectrum_rows(result):
    return [
        {
            "z": e.z,
            "z_tilde": e.z_tilde,
            "channel": e.channel,
            "channels": "[" + ",".join(str(m) for m in e.channels) + "]",
            "multiplicity": e.multiplicity,
            "class": e.cls,
            "ambiguous": bool(e.ambiguous),
        }
        for e in result.eigenvalues
    ]


def _run_spectrum(cfg):
    res = spectrum.perturbed_spectrum(cfg.chi, cfg.params, cfg.window, cfg.m_max, cfg.extra["route"])
    return SPECTRUM_COLUMNS, _spectrum_rows(res), {"m_max": res.diagnostics.get("m_max", cfg.m_max)}


def _sweep_point(task):
    """Rows for one (a, omega, m_max) point and all chi values; runs in a worker."""
    a, omega, m_max, chis, window, route = task
    params = greens.ModelParams(a, omega)
    base = spectrum.unperturbed_spectrum(params, m_max, window, route)
    used = base.diagnostics.get("m_max", m_max)
    rows = []
    for chi in chis:
        res = spectrum.perturbed_spectrum(chi, params, window, m_max, route, unperturbed=base)
        for row in _spectrum_rows(res):
            rows.append({"a": a, "omega": omega, "theta": params.theta, "chi": chi.chi, "m_max": used, **row})
    return rows


def _run_sweep(cfg):
    e = cfg.extra
    tasks = [(a, w, mm, e["chis"], cfg.window, e["route"]) for a, w, mm in e["grid"]]
    jobs = e["jobs"] or (os.cpu_count() or 1)
    jobs = min(jobs, len(tasks))
    if jobs <= 1:
        chunks = [_sweep_point(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_sweep_point, tasks))
    rows = [r for chunk in chunks for r in chunk]
    rows.sort(key=lambda r: (r["a"], r["omega"], r["m_max"], r["chi"], r["z"]))
    cols = ["a", "omega", "theta", "chi", "m_max"] + SPECTRUM_COLUMNS
    prov = {"a": sorted({t[0] for t in tasks}), "omega": sorted({t[1] for t in tasks}), "chi": [str(c) for c in e["chis"]]}
    return cols, rows, prov


RUNNERS = {
    "lambda": _run_lambda,
    "coeffs": _run_coeffs,
    "green": _run_green,
    "qtrace": _run_qtrace,
    "spectrum": _run_spectrum,
    "sweep": _run_sweep,
}


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------


def provenance(cfg, extra):
    prov = {"command": cfg.command, "version": __version__, "tolerances": dict(TOLERANCES), "chi": str(cfg.chi)}
    if cfg.params is not None:
        prov.update({"a": cfg.params.a, "omega": cfg.params.omega, "theta": cfg.params.theta})
    if cfg.window is not None:
        prov["window"] = list(cfg.window)
    for k, v in cfg.extra.items():
        if k in ("grid", "chis", "jobs"):
            continue
        prov[k] = [v.real, v.imag] if isinstance(v, complex) else v
    prov.update(extra)
    return prov


PLOT_TEMPLATE = '''"""Plot {data} (generated; needs matplotlib)."""
import csv
import json
import os

import matplotlib.pyplot as plt

HERE = os.path.dirname(os.path.abspath(__file__))
DATA = os.path.join(HERE, {data!r})


def load():
    with open(DATA, encoding="utf-8") as fh:
        if DATA.endswith(".json"):
            return json.load(fh)["records"]
        lines = [ln for ln in fh.read().splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(lines))


rows = load()
{body}
plt.tight_layout()
plt.savefig(os.path.splitext(DATA)[0] + ".png", dpi=150)
'''

QTRACE_BODY = '''samples = [r for r in rows if r["kind"] == "sample"]
poles = [float(r["z"]) for r in rows if r["kind"] == "pole"]
z = [float(r["z"]) for r in samples]
q = [float(r["q_H"]) for r in samples]
for i in range(1, len(z)):
    if any(z[i - 1] < p < z[i] for p in poles):
        q[i - 1] = float("nan")
plt.plot(z, q, lw=1)
for p in poles:
    plt.axvline(p, color="gray", ls=":", lw=0.8)
plt.ylim(-5, 5)
plt.xlabel("z")
plt.ylabel("Q^H(z)")'''

SPECTRUM_BODY = '''z = [float(r["z"]) for r in rows]
ch = [int(r["channel"]) for r in rows]
mult = [int(r["multiplicity"]) for r in rows]
plt.scatter(ch, z, s=[20 * k for k in mult])
for c, e, k, cls in zip(ch, z, mult, [r["class"] for r in rows]):
    plt.annotate(f"{cls} x{k}", (c, e), fontsize=7, xytext=(4, 0), textcoords="offset points")
plt.xlabel("channel m")
plt.ylabel("energy z")'''


def plot_script(data_name, command):
    body = QTRACE_BODY if command == "qtrace" else SPECTRUM_BODY
    return PLOT_TEMPLATE.format(data=data_name, body=body)


def run(cfg):
    """Compute and write the table (and plot script) for ``cfg``; returns the written paths."""
    cols, rows, extra = RUNNERS[cfg.command](cfg)
    prov = provenance(cfg, extra)
    render = tables.render_json if cfg.format == "json" else tables.render_csv
    text = render(cols, rows, prov)
    written = [cfg.output_path]
    outputs = [(cfg.output_path, text)]
    if cfg.command in ("qtrace", "spectrum"):
        stem = os.path.splitext(cfg.output_path)[0]
        script = plot_script(os.path.basename(cfg.output_path), cfg.command)
        outputs.append((stem + "_plot.py", script))
        written.append(stem + "_plot.py")
    for path, content in outputs:
        tables.write_atomic(path, content)
    return written


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        cfg = make_config(args)
    except (DomainError, ValueError) as exc:
        ap.error(str(exc))
    try:
        paths = run(cfg)
    except HypdotError as exc:
        print(f"hypdot: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    for p in paths:
        print(p)
    return 0


if __name__ == "__main__":
    sys.exit(main())
