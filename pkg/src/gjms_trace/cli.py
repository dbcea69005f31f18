"""
gjms-trace: run the numerical checks from a JSON config and write CSV.

    gjms-trace <command> --config cfg.json [--seed N] [--jobs N] [--out file.csv]

Every CSV starts with '#'-prefixed key=value lines (command, the identity
being checked, tolerance, every config value), then a fixed column header,
the rows, and a final '# result=pass|fail' line.  Exit codes: 0 all checks
pass, 1 a numerical check failed, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from math import pi, sqrt

import numpy as np

from . import biharmonic as bh
from . import gjms
from . import minimizer as mn
from . import planar
from .conformal import BubbleParam, extremal_sphere_trace, extremal_zonal_spectrum
from .sphere_harmonics import (
    HarmonicSpectrum,
    ZonalSpectrum,
    index,
    oversampled_grid,
    random_positive_spectrum,
    sphere_area,
)


class ConfigError(Exception):
    pass


# command name -> (defaults, description of the check)
DEFAULTS = {
    "trace-deficit": ({
        "L": 16, "L_extremal": 64, "oversample": 4, "n_random": 1000, "amplitude": 0.3,
        "extremal_radii": [0.0, 0.25, 0.5, 0.75], "tol_random": 1e-8, "tol_extremal": 1e-6,
        "seed": 42,
    }, "n=3 trace inequality: deficit >= -tol_random*|rhs| on random u, |deficit| <= tol_extremal*|rhs| on u_a"),
    "spectral-identities": ({
        "L": 64, "dims": [3, 4, 5, 6, 7], "tol": 1e-10, "seed": 0,
    }, "per-degree identities B33 = 2 p3, quadratic trace form = 2 p3, Q3 = n(n-2)/4"),
    "integral-residual": ({
        "eps": 1.0, "center": [0.0, 0.0], "R_factor": 100.0, "n_points": 20, "radius": 5.0,
        "n_panels": 12, "n_gl": 8, "n_phi": 64, "tol": 1e-3, "exponent": 5.0, "seed": 0,
    }, "bubble solves v = (3/16pi) int |y-z| v^-5 dz; refined grid must cut the residual by >= 2"),
    "halfspace": ({
        "center": [0.0, 0.0], "radius": 1.0, "height": 1.0,
        "boundary_points": [[0.0, 0.0], [0.3, 0.2], [-0.5, 0.4], [0.8, -0.1]],
        "interior_points": [[0.0, 0.0, 0.5], [0.4, -0.3, 0.8], [1.5, 0.5, 1.0]],
        "h_boundary": 0.02, "h_biharmonic": 0.05, "tol_boundary": 1e-3, "tol_biharmonic": 1e-4,
        "seed": 0,
    }, "v = (1/4pi) int sqrt(t^2+|x-y|^2) f: dt v = 0 and dt Lap v = -f at t=0, Lap^2 v = 0"),
    "minimize": ({
        "L": 16, "n_starts": 5, "amplitude": 0.3, "tol": 1e-3, "max_iter": 500, "seed": 7,
    }, "min of E[u] ||u^-1||_{L^4}^2 equals -(3/8) sqrt(4pi)"),
    "green": ({
        "Ks": [8, 16, 32, 64], "tol_limit": 1e-6, "levels": 5, "seed": 0,
    }, "Green function G = -|x-x0|/2pi has zero energy: |S_K| <= 3/K, extrapolated S_inf ~ 0"),
    "kw": ({
        "L": 16, "T": "x3", "u": "constant", "a": [0.0, 0.0, 0.0], "seed": 0,
    }, "Kazdan-Warner integrals int <grad x_i, grad T> u^-4 dV"),
    "extremal-check": ({
        "L": 64, "oversample": 4, "radii": [0.0, 0.25, 0.5, 0.75, 0.8], "tol": 1e-6, "seed": 0,
    }, "u_a = |x-a|/sqrt(1-|a|^2): P3 u + (3/8) u^-5 = 0, int u P3 u = -3pi/2, int u^-4 = 4pi"),
    "zonal-deficit": ({
        "L": 64, "dims": [4, 5], "radii": [0.0, 0.4], "tol_equality": 1e-4, "tol_sign": 1e-8,
        "perturbations": [0.2, 0.5], "seed": 0,
    }, "zonal trace inequalities for n >= 5 and the n=4 log form; equality on the extremal family"),
}


def _merge(command, raw):
    defaults, _ = DEFAULTS[command]
    unknown = set(raw) - set(defaults)
    if unknown:
        raise ConfigError(f"unknown config keys for {command}: {sorted(unknown)}")
    cfg = dict(defaults)
    cfg.update(raw)
    for k, v in cfg.items():
        if k.startswith("tol") and not (isinstance(v, (int, float)) and v > 0):
            raise ConfigError(f"{k} must be a positive number")
    return cfg


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "pass" if v else "fail"
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    return str(v)


class Table:
    def __init__(self, command, cfg, columns):
        self.command, self.cfg, self.columns = command, cfg, columns
        self.rows = []
        self.ok = True

    def add(self, *row, passed=None):
        self.rows.append(row)
        if passed is not None:
            self.ok = self.ok and bool(passed)

    def render(self) -> str:
        buf = io.StringIO()
        buf.write(f"# command={self.command}\n")
        buf.write(f"# check={DEFAULTS[self.command][1]}\n")
        for k in sorted(self.cfg):
            buf.write(f"# {k}={json.dumps(self.cfg[k])}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([_fmt(v) for v in r])
        buf.write(f"# result={'pass' if self.ok else 'fail'}\n")
        return buf.getvalue()


def _pool_map(fn, items, jobs):
    items = list(items)
    if jobs <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, items))      # results come back in input order


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_trace_deficit(cfg, jobs=1):
    t = Table("trace-deficit", cfg, ["trial", "kind", "abs_a", "lhs", "rhs", "deficit",
                                     "rel_deficit", "pass"])
    rng = np.random.default_rng(cfg["seed"])
    for i, r in enumerate(cfg["extremal_radii"]):
        a = np.array([0.0, 0.0, float(r)])
        lhs, rhs, d = bh.trace_deficit_n3(gjms.extremal_spectrum(a, cfg["L_extremal"]),
                                          cfg["oversample"])
        ok = abs(d) <= cfg["tol_extremal"] * abs(rhs)
        t.add(i, "extremal", float(r), lhs, rhs, d, d / abs(rhs), ok, passed=ok)
    specs = [random_positive_spectrum(rng, cfg["L"], cfg["amplitude"])
             for _ in range(cfg["n_random"])]
    out = _pool_map(lambda s: bh.trace_deficit_n3(s, cfg["oversample"]), specs, jobs)
    base = len(cfg["extremal_radii"])
    for j, (lhs, rhs, d) in enumerate(out):
        ok = d >= -cfg["tol_random"] * abs(rhs)
        t.add(base + j, "random", "", lhs, rhs, d, d / abs(rhs), ok, passed=ok)
    return t


def cmd_spectral_identities(cfg, jobs=1):
    t = Table("spectral-identities", cfg, ["n", "identity", "max_abs_deviation", "value", "pass"])
    k = np.arange(cfg["L"] + 1)
    for n in cfg["dims"]:
        two_p3 = 2.0 * gjms.p3_multiplier(k, n)
        dev = float(np.max(np.abs(bh.b33_multiplier(k, n) - two_p3)))
        t.add(n, "B33 multiplier = 2 p3(k,n)", dev, "", dev <= cfg["tol"], passed=dev <= cfg["tol"])
        form = bh.trace_form_multiplier(k, n)       # b_4 = 0 gives the n=4 form
        dev = float(np.max(np.abs(form - two_p3)))
        t.add(n, "trace quadratic form = 2 p3(k,n)", dev, "", dev <= cfg["tol"],
              passed=dev <= cfg["tol"])
        if n == 4:
            t.add(n, "Q3 = n(n-2)/4", "", "skipped: formula excludes n = 4", "")
        else:
            q = bh.q3(n)
            dev = abs(q - n * (n - 2) / 4.0)
            t.add(n, "Q3 = n(n-2)/4", dev, q, dev <= cfg["tol"], passed=dev <= cfg["tol"])
    return t


def cmd_integral_residual(cfg, jobs=1):
    t = Table("integral-residual", cfg, ["level", "n_panels", "n_phi", "residual", "pass"])
    p = BubbleParam(cfg["center"], cfg["eps"])
    pts = planar.bubble_sample_points(p, cfg["n_points"], cfg["radius"], cfg["seed"])
    rule = planar.QuadratureRule(cfg["n_panels"], cfg["n_gl"], cfg["n_phi"])
    res = []
    for level, r in (("base", rule), ("refined", rule.refined(2))):
        val = planar.integral_residual(p, pts, cfg["R_factor"], r, cfg["exponent"])
        res.append(val)
        t.add(level, r.n_panels, r.n_phi, val, val <= cfg["tol"], passed=val <= cfg["tol"])
    ok = res[1] <= 0.5 * res[0]
    t.add("refinement_ratio", "", "", res[0] / max(res[1], 1e-300), ok, passed=ok)
    return t


def cmd_halfspace(cfg, jobs=1):
    t = Table("halfspace", cfg, ["check", "x1", "x2", "t", "value", "bound", "pass"])
    f = planar.smooth_bump(cfg["center"], cfg["radius"], cfg["height"])
    fmax = abs(cfg["height"])
    for x in cfg["boundary_points"]:
        x = np.asarray(x, dtype=float)
        e = planar.dt_laplacian_at_boundary(f, x, cfg["h_boundary"]) + float(f(x[None])[0])
        ok = abs(e) <= cfg["tol_boundary"] * fmax
        t.add("dt_lap_v_plus_f", x[0], x[1], 0.0, e, cfg["tol_boundary"] * fmax, ok, passed=ok)
        d = planar.dt_at_boundary(f, x)
        ok = abs(d) <= cfg["tol_boundary"] * fmax
        t.add("dt_v", x[0], x[1], 0.0, d, cfg["tol_boundary"] * fmax, ok, passed=ok)
    v = planar.halfspace_point_function(f)
    for X in cfg["interior_points"]:
        X = np.asarray(X, dtype=float)[None]
        res, rel = bh.fd_biharmonic_residual(v, X, cfg["h_biharmonic"] * cfg["radius"])
        ok = rel <= cfg["tol_biharmonic"]
        t.add("bilaplacian_rel", X[0, 0], X[0, 1], X[0, 2], rel, cfg["tol_biharmonic"], ok,
              passed=ok)
    return t


def cmd_minimize(cfg, jobs=1):
    t = Table("minimize", cfg, ["start", "status", "iterations", "value", "error",
                                "multiplier", "pde_residual_rel", "pass"])
    conf = mn.MinimizeConfig(L=cfg["L"], max_iter=cfg["max_iter"])
    seeds = np.random.SeedSequence(cfg["seed"]).spawn(cfg["n_starts"])
    starts = [mn.random_start(np.random.default_rng(s), cfg["L"], cfg["amplitude"]) for s in seeds]
    results = _pool_map(lambda s: mn.minimize_y3(conf, s), starts, jobs)
    for i, r in enumerate(results):
        err = r.value - mn.Y3_SPHERE
        ok = abs(err) <= cfg["tol"] and r.status == "converged"
        t.add(i, r.status, r.iterations, r.value, err, r.multiplier, r.residual[1], ok, passed=ok)
    return t


def cmd_green(cfg, jobs=1):
    t = Table("green", cfg, ["K", "S_K", "K_abs_S_K", "bound_3_over_K", "pass"])
    for K in cfg["Ks"]:
        s = gjms.green_energy_partial_sum(int(K))
        ok = K < 8 or abs(s) <= 3.0 / K
        t.add(int(K), s, K * abs(s), 3.0 / K, ok, passed=ok)
    lim = gjms.green_energy_limit(int(max(cfg["Ks"])), cfg["levels"])
    ok = abs(lim) <= cfg["tol_limit"]
    t.add("extrapolated", lim, "", cfg["tol_limit"], ok, passed=ok)
    return t


def _T_spec(name, L):
    coords = {"x1": (1, 1), "x2": (1, -1), "x3": (1, 0), "const": (0, 0)}
    if name not in coords:
        raise ConfigError(f"T must be one of {sorted(coords)}")
    s = HarmonicSpectrum.zeros(L)
    c = s.coeffs.copy()
    k, m = coords[name]
    c[index(k, m)] = sqrt(4.0 * pi / 3.0) if k == 1 else sqrt(4.0 * pi)
    return HarmonicSpectrum(L, c)


def cmd_kw(cfg, jobs=1):
    t = Table("kw", cfg, ["i", "T", "u", "integral"])
    L = cfg["L"]
    T = _T_spec(cfg["T"], L)
    if cfg["u"] == "constant":
        u = HarmonicSpectrum.constant(L)
    elif cfg["u"] == "extremal":
        u = gjms.extremal_spectrum(np.asarray(cfg["a"], dtype=float), L)
    else:
        raise ConfigError("u must be 'constant' or 'extremal'")
    for i in (1, 2, 3):
        t.add(i, cfg["T"], cfg["u"], mn.kw_integral(T, u, i))
    return t


def cmd_extremal_check(cfg, jobs=1):
    t = Table("extremal-check", cfg, ["abs_a", "pde_residual_rel", "energy", "energy_rel_err",
                                      "area", "area_rel_err", "inverse_distance_residual_rel",
                                      "pass"])
    L, ov, tol = cfg["L"], cfg["oversample"], cfg["tol"]
    for r in cfg["radii"]:
        a = np.array([0.0, 0.0, float(r)])
        spec = gjms.extremal_spectrum(a, L)
        _, rel = gjms.pde_residual(spec, oversample=ov)
        e = gjms.energy(spec)
        grid = oversampled_grid(L, ov)
        area = grid.integrate(extremal_sphere_trace(a, grid.nodes) ** -4.0)
        e_err = abs(e / (-1.5 * pi) - 1.0)
        a_err = abs(area / (4.0 * pi) - 1.0)
        inv, _ = gjms.inverse_distance_residual(a, L, ov)
        ok = rel <= tol and e_err <= tol and a_err <= tol
        t.add(float(r), rel, e, e_err, area, a_err, inv, ok, passed=ok)
    return t


def cmd_zonal_deficit(cfg, jobs=1):
    t = Table("zonal-deficit", cfg, ["n", "kind", "param", "lhs", "rhs", "deficit",
                                     "rel_deficit", "pass"])
    L = cfg["L"]
    for n in cfg["dims"]:
        if n < 4:
            raise ConfigError("zonal-deficit dims must be >= 4")
        fn = bh.trace_deficit_n4 if n == 4 else bh.trace_deficit_general
        for r in cfg["radii"]:
            lhs, rhs, d = fn(extremal_zonal_spectrum(n, float(r), L))
            rel = abs(d) / max(abs(rhs), 1e-300) if rhs != 0 else abs(d)
            ok = rel <= cfg["tol_equality"]
            t.add(n, "extremal", float(r), lhs, rhs, d, rel, ok, passed=ok)
        for eps in cfg["perturbations"]:
            c = np.zeros(L + 1)
            if n == 4:
                c[1] = eps                  # no positivity needed for the log form
            else:
                c[0] = sqrt(sphere_area(n))
                c[2] = eps
            lhs, rhs, d = fn(ZonalSpectrum(n, L, c))
            ok = d >= -cfg["tol_sign"] * max(abs(rhs), 1.0)
            t.add(n, "perturbed", float(eps), lhs, rhs, d, d / max(abs(rhs), 1e-300), ok,
                  passed=ok)
    return t


COMMANDS = {
    "trace-deficit": cmd_trace_deficit,
    "spectral-identities": cmd_spectral_identities,
    "integral-residual": cmd_integral_residual,
    "halfspace": cmd_halfspace,
    "minimize": cmd_minimize,
    "green": cmd_green,
    "kw": cmd_kw,
    "extremal-check": cmd_extremal_check,
    "zonal-deficit": cmd_zonal_deficit,
}


def build_parser() -> argparse.ArgumentParser:
    lines = []
    for name, (d, desc) in DEFAULTS.items():
        lines.append(f"{name}: {desc}\n    defaults: {json.dumps(d)}")
    p = argparse.ArgumentParser(
        prog="gjms-trace",
        description="Numerical checks for the sharp fourth-order trace inequality on B^3 "
                    "and the P3 Sobolev inequality on S^2.",
        epilog="commands and config defaults:\n" + "\n".join(lines),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", help="JSON config file (keys override the defaults)")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--jobs", type=int, default=1, help="worker threads for independent trials")
    p.add_argument("--out", help="output CSV path (default stdout)")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        raw = {}
        if args.config:
            with open(args.config, encoding="utf-8") as fh:
                raw = json.load(fh)
            if not isinstance(raw, dict):
                raise ConfigError("config must be a JSON object")
        if args.seed is not None:
            raw["seed"] = args.seed
        cfg = _merge(args.command, raw)
        if args.jobs < 1:
            raise ConfigError("--jobs must be >= 1")
        table = COMMANDS[args.command](cfg, args.jobs)
    except (ConfigError, OSError, json.JSONDecodeError, TypeError, KeyError) as exc:
        print(f"gjms-trace: error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"gjms-trace: numerical error: {exc}", file=sys.stderr)
        return 1
    text = table.render()
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0 if table.ok else 1


if __name__ == "__main__":
    sys.exit(main())
