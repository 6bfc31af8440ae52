"""Command-line driver: configuration, method dispatch and artifact emission.

Subcommands: ``decompose``, ``resonances``, ``compare``, ``gevrey-fit``,
``regions`` and ``figure1``.  Exit codes: 0 success, 2 validation error,
3 numerical failure (and 1 for a ``compare`` mismatch).

Configuration files are INI files, for example::

    [potential]
    kind = square_well
    depth = 8
    a = 2

    [decomposition]
    rho1 = 0.9
    epsilon = 0.1

    [run]
    methods = scaling, shooting, fredholm
    windows = 0.5,8,-1.5,-0.01

    [tolerances]
    drift_tol = 1e-5
"""

from __future__ import annotations

import argparse
import configparser
import contextlib
import json
import math
import os
import platform
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from threadpoolctl import threadpool_limits

from . import __version__
from .errors import DomainError, ParameterError, ResLabError
from .resonance import METHODS, Window, match_sets, read_resonance_csv, write_resonance_csv

EXIT_OK, EXIT_MISMATCH, EXIT_VALIDATION, EXIT_NUMERIC = 0, 1, 2, 3

POTENTIAL_KINDS = ("square_well", "zero", "constant", "euler", "polynomial", "barrier", "series_file")

DEFAULTS = {
    "potential": {"kind": "square_well", "depth": "8", "a": "2", "c": "1", "gamma_pow": "1", "m": "400",
                  "coeffs": "", "path": ""},
    "decomposition": {"rho1": "", "epsilon": "0.1", "quad_nodes": "16"},
    "run": {"methods": "scaling", "windows": "0.5,8,-1.5,-0.01", "theta": "", "n": "800"},
    "tolerances": {"drift_tol": "1e-5", "fredholm_drift_tol": "1e-6", "fredholm_order": "48",
                   "nodes_per_side": "64", "cut_halfwidth": "0.05", "compare_tol": "1e-6"},
}


@dataclass
class RunConfig:
    potential: dict
    decomposition: dict
    methods: list
    windows: list
    theta: float | None = None
    N: int = 800
    tolerances: dict = field(default_factory=dict)

    def validate(self):
        if not self.methods:
            raise ParameterError("select at least one method")
        bad = [m for m in self.methods if m not in METHODS]
        if bad:
            raise ParameterError(f"unknown method(s) {bad}; choose from {list(METHODS)}")
        if self.potential["kind"] not in POTENTIAL_KINDS:
            raise ParameterError(f"unknown potential kind {self.potential['kind']!r}; choose from {POTENTIAL_KINDS}")
        if not self.windows:
            raise ParameterError("give at least one window")
        h = float(self.tolerances["cut_halfwidth"])
        for w in self.windows:
            _validate_window(w, h)
        if self.N < 32:
            raise ParameterError("N must be >= 32")
        return self


def _validate_window(w: Window, halfwidth):
    """Reject windows touching the cut sector ``|arg lam + pi/2| <= halfwidth``."""
    if w.im_min >= 0:
        return
    # the closest point of the lower part of the rectangle to the negative imaginary axis
    re = min(max(0.0, w.re_min), w.re_max)
    if re == 0.0:
        raise ParameterError(f"window {w.as_tuple()} touches the cut i(-oo, 0]")
    ang = math.atan2(abs(re), -w.im_min)
    if ang <= halfwidth:
        raise ParameterError(
            f"window {w.as_tuple()} enters the cut sector |arg lam + pi/2| <= {halfwidth} around i(-oo, 0]")


def load_config(path=None, overrides=None) -> RunConfig:
    cp = configparser.ConfigParser()
    cp.read_dict(DEFAULTS)
    if path is not None:
        if not Path(path).is_file():
            raise ParameterError(f"config file {path} not found")
        cp.read(path)
    overrides = overrides or {}
    pot = dict(cp["potential"])
    dec = dict(cp["decomposition"])
    run = dict(cp["run"])
    tol = dict(cp["tolerances"])
    methods = overrides.get("methods") or [m.strip() for m in run["methods"].split(",") if m.strip()]
    if overrides.get("windows"):
        windows = [Window.parse(w) for w in overrides["windows"]]
    else:
        windows = [Window.parse(w) for w in run["windows"].split(";") if w.strip()]
    theta = float(run["theta"]) if run["theta"].strip() else None
    return RunConfig(pot, dec, methods, windows, theta, int(run["n"]), tol)


def build_potential(p: dict):
    from . import gevrey

    kind = p["kind"]
    gp = int(p["gamma_pow"])
    if kind == "square_well":
        return gevrey.square_well(float(p["depth"]), float(p["a"]))
    if kind == "zero":
        return gevrey.zero_potential()
    if kind == "constant":
        return gevrey.constant_potential(float(p["c"]), gp)
    if kind == "euler":
        return gevrey.euler_potential(int(p["m"]), gp)
    if kind == "barrier":
        return gevrey.barrier_potential(gamma_pow=gp)
    if kind == "polynomial":
        coeffs = [complex(c) for c in p["coeffs"].replace(" ", "").split(",") if c]
        if not coeffs:
            raise ParameterError("polynomial potential needs coeffs = c0, c1, ...")
        return gevrey.polynomial_potential(coeffs, gp)
    if kind == "series_file":
        series, gpow = gevrey.read_series(p["path"])
        return gevrey.PotentialSpec.gevrey(series, gpow, name=Path(p["path"]).stem)
    raise ParameterError(f"unknown potential kind {kind!r}")


def build_decomposition(spec, d: dict):
    from . import gevrey

    if spec.kind == "tabulated_compact":
        return gevrey.split_compact(spec)
    rho1 = float(d["rho1"]) if d["rho1"].strip() else None
    return gevrey.decompose(spec, rho1, float(d["epsilon"]), int(d["quad_nodes"]))


def _run_method(method, spec, cfg: RunConfig, window: Window):
    from .fredholm import fredholm_resonances
    from .scaling import assemble_scaled_operator, default_contour, scaled_resonances, theta_for_window
    from .shooting import shooting_resonances

    tol = cfg.tolerances
    nps = int(tol["nodes_per_side"])
    if method == "scaling":
        theta = cfg.theta if cfg.theta is not None else theta_for_window(window)
        op = assemble_scaled_operator(spec, default_contour(spec, theta, cfg.N))
        return scaled_resonances(op, window, drift_tol=float(tol["drift_tol"]),
                                 cut_halfwidth=float(tol["cut_halfwidth"]))
    if method == "shooting":
        return shooting_resonances(spec, window, nodes_per_side=nps)
    decomp = build_decomposition(spec, cfg.decomposition)
    return fredholm_resonances(decomp, window, nodes_per_side=nps, cut_halfwidth=float(tol["cut_halfwidth"]),
                               theta=cfg.theta, order=int(tol["fredholm_order"]),
                               drift_tol=float(tol["fredholm_drift_tol"]))


def _jsonable(v):
    if isinstance(v, (np.floating, float)):
        return float(v) if math.isfinite(v) else str(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def run_resonances(cfg: RunConfig, out_dir) -> int:
    """Run every method on every window; write tables and a manifest."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cfg.validate()
    spec = build_potential(cfg.potential)
    per_method = {m: [] for m in cfg.methods}
    runs = []
    for w in cfg.windows:
        for m in cfg.methods:
            t0 = time.perf_counter()
            rs = _run_method(m, spec, cfg, w)
            per_method[m].extend(rs.items)
            runs.append({"method": m, "window": list(w.as_tuple()), "count": rs.count, "meta": _jsonable(rs.meta),
                         "seconds": round(time.perf_counter() - t0, 3)})
    everything = []
    for m in cfg.methods:
        write_resonance_csv(out / f"resonances_{m}.csv", per_method[m])
        everything.extend(per_method[m])
    write_resonance_csv(out / "resonances.csv", everything)
    manifest = {
        "reslab_version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": __import__("scipy").__version__,
        "potential": cfg.potential,
        "decomposition": cfg.decomposition,
        "methods": cfg.methods,
        "windows": [list(w.as_tuple()) for w in cfg.windows],
        "theta": cfg.theta if cfg.theta is not None else "per-window",
        "N": cfg.N,
        "tolerances": cfg.tolerances,
        "threads": os.environ.get("RESLAB_THREADS", ""),
        "seeds": None,
        "runs": runs,
    }
    with open(out / "manifest.json", "w") as fh:
        json.dump(_jsonable(manifest), fh, indent=1, sort_keys=True)
    return EXIT_OK


def run_compare(paths, tol, report_path=None):
    """Pairwise matching of resonance tables; returns ``(exit_code, report)``."""
    if len(paths) < 2:
        raise ParameterError("compare needs at least two tables")
    tables = {str(p): read_resonance_csv(p) for p in paths}
    names = list(tables)
    report = {"tol": tol, "pairs": []}
    ok = True
    for i in range(len(names)):
        for j in range(i + 1, len(names)):
            a = [r.lam for r in tables[names[i]] for _ in range(r.multiplicity)]
            b = [r.lam for r in tables[names[j]] for _ in range(r.multiplicity)]
            pairs, ua, ub = match_sets(a, b)
            far = [d for *_, d in pairs if d > tol]
            ok &= not (ua or ub or far)
            report["pairs"].append({
                "a": names[i], "b": names[j],
                "matched": [{"a": [a[p].real, a[p].imag], "b": [b[q].real, b[q].imag], "distance": d}
                            for p, q, d in pairs],
                "unmatched_a": [[a[k].real, a[k].imag] for k in ua],
                "unmatched_b": [[b[k].real, b[k].imag] for k in ub],
                "max_distance": max((d for *_, d in pairs), default=0.0),
                "n_over_tol": len(far),
            })
    report["ok"] = bool(ok)
    if report_path is not None:
        with open(report_path, "w") as fh:
            json.dump(report, fh, indent=1)
    return (EXIT_OK if ok else EXIT_MISMATCH), report


def _cmd_decompose(args):
    from .gevrey import dump_decomposition

    cfg = load_config(args.config)
    spec = build_potential(cfg.potential)
    decomp = build_decomposition(spec, cfg.decomposition)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    data = dump_decomposition(decomp, out / "decomposition.json")
    print(f"rho1={data['rho1']} fitted_decay={data['fitted_decay']}")
    return EXIT_OK


def _cmd_resonances(args):
    cfg = load_config(args.config, {"methods": args.method, "windows": args.window})
    if args.theta is not None:
        cfg.theta = args.theta
    if args.N is not None:
        cfg.N = args.N
    code = run_resonances(cfg, args.out)
    for m in cfg.methods:
        n = len(read_resonance_csv(Path(args.out) / f"resonances_{m}.csv"))
        print(f"{m}: {n} resonances")
    return code


def _cmd_compare(args):
    code, report = run_compare(args.tables, args.tol, args.report)
    for p in report["pairs"]:
        print(f"{p['a']} vs {p['b']}: {len(p['matched'])} matched, max distance {p['max_distance']:.3e}, "
              f"unmatched {len(p['unmatched_a'])}/{len(p['unmatched_b'])}, over tol {p['n_over_tol']}")
    return code


def _cmd_gevrey_fit(args):
    from .diagnostics import (ExpWindow, default_xi_grid, exponential_class_params, fit_gevrey_sigma,
                              windowed_fourier, write_fit_report, write_spectrum_csv)

    z = complex(args.z.replace(" ", "").replace("i", "j"))
    params = exponential_class_params(z)
    xi = default_xi_grid(args.xi_min, args.xi_max)
    window = ExpWindow(args.rate)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    report = {"z": [z.real, z.imag], "window": window.id, "sigma": params.sigma,
              "sigma_plus": params.sigma_plus, "sigma_minus": params.sigma_minus}
    for sign, name in ((1, "plus"), (-1, "minus")):
        grid = xi if sign > 0 else -xi[::-1]
        spec = windowed_fourier(lambda x: np.exp(1j * z / x), window, grid)
        write_spectrum_csv(spec, out / f"spectrum_{name}.csv")
        hat, info = fit_gevrey_sigma(spec, sign, full_output=True)
        report[f"fit_{name}"] = info
        print(f"sigma_{name}: fitted {hat:.6g}, predicted {getattr(params, 'sigma_' + name):.6g}")
    write_fit_report(report, out / "fit_report.json")
    return EXIT_OK


def _region_specs(args):
    from .regions import RegionSpec

    kinds = args.kind or ["omega_sigma", "m_sigma"]
    return [RegionSpec(k, args.sigma, args.alpha, args.cut_halfwidth) for k in kinds]


def _cmd_regions(args):
    from .regions import INTERIOR_CONVENTION, write_boundary_csv

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    bbox = tuple(Window.parse(args.bbox).as_tuple())
    write_boundary_csv(out / "boundary.csv", _region_specs(args), args.n, bbox)
    with open(out / "regions.json", "w") as fh:
        json.dump({"bbox": bbox, "n": args.n, "sigma": args.sigma, "alpha": args.alpha,
                   "cut_halfwidth": args.cut_halfwidth, "convention": INTERIOR_CONVENTION}, fh, indent=1)
    return EXIT_OK


def _cmd_figure1(args):
    from .regions import INTERIOR_CONVENTION, RegionSpec, region_contains, write_boundary_csv

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    bbox = tuple(Window.parse(args.bbox).as_tuple())
    specs = [RegionSpec("omega_sigma", args.sigma, cut_halfwidth=args.cut_halfwidth),
             RegionSpec("m_sigma", args.sigma, cut_halfwidth=args.cut_halfwidth)]
    write_boundary_csv(out / "figure1_boundaries.csv", specs, args.n, bbox)
    overlay = []
    for path in args.resonances or []:
        for r in read_resonance_csv(path):
            overlay.append({"re": r.lam.real, "im": r.lam.imag, "method": r.method,
                            "in_omega": bool(region_contains(specs[0], r.lam)),
                            "in_m": bool(region_contains(specs[1], r.lam))})
    with open(out / "figure1_overlay.json", "w") as fh:
        json.dump({"sigma": args.sigma, "bbox": bbox, "convention": INTERIOR_CONVENTION,
                   "resonances": overlay}, fh, indent=1)
    return EXIT_OK


def build_parser():
    ap = argparse.ArgumentParser(prog="reslab", description=__doc__.split("\n")[0])
    ap.add_argument("--version", action="version", version=f"reslab {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, out_default):
        p.add_argument("--config", help="INI configuration file")
        p.add_argument("--out", default=out_default, help="output directory")

    p = sub.add_parser("decompose", help="split V = V1 + V2 and dump samples")
    common(p, "reslab_out")
    p.set_defaults(func=_cmd_decompose)

    p = sub.add_parser("resonances", help="compute resonance tables")
    common(p, "reslab_out")
    p.add_argument("--method", action="append", choices=METHODS, help="method (repeatable)")
    p.add_argument("--window", action="append", help="window 're_min,re_max,im_min,im_max' (repeatable)")
    p.add_argument("--theta", type=float, help="scaling angle (default: chosen per window)")
    p.add_argument("--N", type=int, help="collocation size for scaling")
    p.set_defaults(func=_cmd_resonances)

    p = sub.add_parser("compare", help="match resonance tables")
    p.add_argument("tables", nargs="+")
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--report", help="write the JSON report here")
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("gevrey-fit", help="fit Gevrey rates of exp(i z / x)")
    common(p, "reslab_out")
    p.add_argument("--z", default="3+4i")
    p.add_argument("--rate", type=float, default=1.0, help="decay rate of the exponential window")
    p.add_argument("--xi-min", type=float, default=10.0)
    p.add_argument("--xi-max", type=float, default=1e4)
    p.set_defaults(func=_cmd_gevrey_fit)

    for name, func in (("regions", _cmd_regions), ("figure1", _cmd_figure1)):
        p = sub.add_parser(name, help="region boundaries" if name == "regions" else "figure data with overlays")
        common(p, "reslab_out")
        if name == "regions":
            p.add_argument("--kind", action="append", choices=["omega_sigma", "m_sigma", "w_alpha"])
            p.add_argument("--alpha", type=float, default=0.5)
        else:
            p.add_argument("--resonances", action="append", help="resonance CSV to overlay (repeatable)")
        p.add_argument("--sigma", type=float, default=1.0)
        p.add_argument("--cut-halfwidth", type=float, default=0.05)
        p.add_argument("--n", type=int, default=400)
        p.add_argument("--bbox", default="-10,10,-6,2")
        p.set_defaults(func=func)
    return ap


def _thread_limit():
    """BLAS thread cap from ``RESLAB_THREADS``; the work itself is sequential."""
    n = os.environ.get("RESLAB_THREADS", "").strip()
    if not n:
        return contextlib.nullcontext()
    if not n.isdigit() or int(n) < 1:
        raise ParameterError(f"RESLAB_THREADS must be a positive integer, got {n!r}")
    return threadpool_limits(limits=int(n))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with _thread_limit():
            return args.func(args)
    except (ParameterError, DomainError, FileNotFoundError, configparser.Error) as exc:
        print(f"reslab: validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ResLabError, np.linalg.LinAlgError) as exc:
        print(f"reslab: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"reslab: validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
