"""fracground command line: solve | verify | bubble-scan | path | selftest.

Exit codes: 0 pass, 1 usage or I/O error, 2 solver did not converge,
3 a verification threshold failed.
"""
import argparse
import csv
import json
import logging
import sys
import time
from importlib import metadata
from pathlib import Path

import numpy as np

from . import _kernels
from .bubble import bubble_scan, m_bounds_check
from .config import ConfigError, load_config
from .errors import FracgroundError, SnapshotError
from .fractional import calibrate_normalization, seminorm_sq_spectral
from .grid import Grid, load_snapshot, radial_profile, save_snapshot
from .identities import (H_functional, H_along_path, J_functional, dilation_path_profile, least_energy_from_M,
                         least_energy_from_M_alt, mountain_pass_geometry, path_crossing_t0, pohozaev_residual,
                         rho0_for_H)
from .nonlinearity import ModelNonlinearity, energy, euler_lagrange_residual, lagrange_ratio
from .selftest import run_all
from .solver import solve_ground_state

log = logging.getLogger("fracground")

EXIT_OK, EXIT_USAGE, EXIT_NOT_CONVERGED, EXIT_VERIFY = 0, 1, 2, 3

CONVENTION = (
    "spectral: [u]^2 = sum_xi |xi|^{2s} |u_hat(xi)|^2 (Parseval weighted), (-Delta)^s = multiplier |xi|^{2s}; "
    "the Gagliardo double integral equals c_ratio times this seminorm"
)


def _version():
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


def jsonable(x):
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return [jsonable(v) for v in x.tolist()]
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        v = float(x)
        return v if np.isfinite(v) else str(v)
    return x


class Report:
    """JSON report: config echo, convention header, per-operation results, timing."""

    def __init__(self, command, cfg):
        self.command = command
        self.cfg = cfg
        self.results = {}
        self.timing = {}
        self._t0 = time.perf_counter()

    def add(self, operation, values, seconds=None):
        self.results[operation] = values
        if seconds is not None:
            self.timing[operation] = seconds

    def convention(self):
        p = self.cfg.problem
        cal_grid = Grid(p.N, {1: 64, 2: 32, 3: 16}[p.N], 8.0)
        cal = calibrate_normalization(p.N, p.s, cal_grid)
        return {"statement": CONVENTION, "calibrate_normalization": cal.as_dict()}

    def as_dict(self):
        self.timing["total"] = time.perf_counter() - self._t0
        return jsonable({
            "artifact_version": _version(),
            "command": self.command,
            "convention": self.convention(),
            "config": self.cfg.as_dict(),
            "results": self.results,
            "numba_enabled": _kernels.USE_NUMBA,
            "timing": self.timing,
        })

    def write(self, path):
        path.write_text(json.dumps(self.as_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(x)) for x in row])


def _outdir(args, cfg):
    d = Path(args.out or cfg.outputs.directory)
    d.mkdir(parents=True, exist_ok=True)
    return d


def _timed(fn, *a, **kw):
    t0 = time.perf_counter()
    out = fn(*a, **kw)
    return out, time.perf_counter() - t0


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

def cmd_solve(cfg, args):
    out = _outdir(args, cfg)
    rep = Report("solve", cfg)
    res, dt = _timed(solve_ground_state, cfg.problem, cfg.grid.build(), cfg.solver)
    summary = res.summary()
    # wall-clock figures go to the timing section so results stay reproducible
    rep.timing["solve_wall_seconds"] = summary["diagnostics"].pop("wall_seconds", None)
    summary["m_formula_alt_exponent"] = least_energy_from_M_alt(res.M, cfg.problem)
    summary["seminorm_energy_form"] = cfg.problem.s / cfg.problem.N * seminorm_sq_spectral(res.omega, cfg.problem.s)
    summary["omega_grid"] = {"dim": res.omega.grid.dim, "n": res.omega.grid.n, "L": res.omega.grid.half_length}
    rep.add("solve_ground_state", summary, dt)
    save_snapshot(out / "omega.bin", res.omega, cfg.problem.s)
    save_snapshot(out / "u_min.bin", res.u_min, cfg.problem.s)
    r, prof = radial_profile(res.omega)
    _write_csv(out / "radial_profile.csv", ["r", "omega"], zip(r, prof))
    rep.write(out / "report.json")
    print(f"M = {res.M:.10g}  m_direct = {res.m_direct:.10g}  m_formula = {res.m_formula:.10g}  "
          f"EL = {res.el_rel_residual:.3g}  converged = {res.converged}")
    return EXIT_OK if res.converged else EXIT_NOT_CONVERGED


def _load_compatible(args, cfg):
    if not args.snapshot:
        raise ConfigError("this command needs --snapshot FILE")
    u, s = load_snapshot(args.snapshot)
    g = cfg.grid
    if u.grid.dim != g.dim or u.grid.n != g.n:
        raise SnapshotError(f"snapshot grid (dim={u.grid.dim}, n={u.grid.n}) does not match config "
                            f"(dim={g.dim}, n={g.n})")
    if abs(s - cfg.problem.s) > 1e-14:
        raise SnapshotError(f"snapshot was written for s = {s}, config has s = {cfg.problem.s}")
    return u


def cmd_verify(cfg, args):
    out = _outdir(args, cfg)
    u = _load_compatible(args, cfg)
    p, v = cfg.problem, cfg.verify
    nl = ModelNonlinearity(p)
    _, el = euler_lagrange_residual(u, nl)
    semi = seminorm_sq_spectral(u, p.s)
    poh = pohozaev_residual(u, p)
    mu = lagrange_ratio(u, nl)
    scale = max(p.s * semi, np.finfo(float).eps)
    checks = {
        "el_rel_residual": {"value": el, "threshold": v.el_tol, "pass": el <= v.el_tol},
        "pohozaev_rel_residual": {"value": poh, "threshold": v.pohozaev_tol, "pass": poh <= v.pohozaev_tol},
        "lagrange_mu_minus_one": {"value": abs(mu - 1), "threshold": v.mu_tol, "pass": abs(mu - 1) <= v.mu_tol},
        "H_over_s_seminorm": {"value": abs(H_functional(u, p)) / scale, "threshold": v.pohozaev_tol,
                              "pass": abs(H_functional(u, p)) / scale <= v.pohozaev_tol},
    }
    ok = all(c["pass"] for c in checks.values())
    rep = Report("verify", cfg)
    rep.add("verify", {"snapshot": str(args.snapshot), "energy": energy(u, nl), "J": J_functional(u, p),
                       "H": H_functional(u, p), "lagrange_mu": mu, "checks": checks, "pass": ok})
    rep.write(out / "verify_report.json")
    for name, c in checks.items():
        print(f"{'PASS' if c['pass'] else 'FAIL'} {name} = {c['value']:.3g} (<= {c['threshold']:g})")
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_bubble_scan(cfg, args):
    out = _outdir(args, cfg)
    p, sc = cfg.problem, cfg.scan
    grid = Grid(p.N, sc.n, sc.L)
    res, dt = _timed(bubble_scan, p, grid, sc.eps_list, sc.kappa)
    _write_csv(out / "bubble_scan.csv", ["eps", "psi_2star", "psi_semi", "gamma", "gamma_scaled", "V_v_eps"],
               res.rows())
    summary = res.summary()
    fit = res.rate_fits.get("psi_2star_deficit")
    checks = {
        "gamma_scaled_increasing": res.gamma_scaled_increasing(),
        "V_v_eps_smallest_ge_inv_two_star": res.V_of_v_eps[-1] >= 1.0 / p.two_star,
        "deficit_rate_within_30pct_of_N": fit is not None and abs(fit.slope - p.N) <= 0.3 * p.N,
    }
    summary["checks"] = checks
    rep = Report("bubble-scan", cfg)
    rep.add("bubble_scan", summary, dt)
    rep.write(out / "bubble_scan.json")
    for name, ok in checks.items():
        print(f"{'PASS' if ok else 'FAIL'} {name}")
    print(f"S_star_estimate = {res.S_star_estimate:.8g}")
    return EXIT_OK if all(checks.values()) else EXIT_VERIFY


def cmd_path(cfg, args):
    out = _outdir(args, cfg)
    omega = _load_compatible(args, cfg)
    p = cfg.problem
    t_max = cfg.path.t_max or None
    prof, dt = _timed(dilation_path_profile, omega, p, t_max, cfg.path.samples)
    _write_csv(out / "path_profile.csv", ["t", "I_closed", "I_direct", "dIdt", "H", "norm"], prof.rows())
    scan = bubble_scan(p, Grid(p.N, cfg.scan.n, cfg.scan.L), cfg.scan.eps_list, cfg.scan.kappa)
    rho0 = rho0_for_H(p, scan.S_star_estimate)
    step = prof.step_at(1.0)
    summary = {"t_argmax": prof.t_argmax, "step_at_1": step, "rho0": rho0,
               "S_star_estimate": scan.S_star_estimate, "max_I_direct": float(np.max(prof.energies_direct[prof.resolved]))}
    try:
        t0 = path_crossing_t0(prof, rho0, H=H_along_path(omega, p))
        summary["t0"] = t0
        summary["norm_at_t0"] = float(np.interp(t0, prof.t_samples, prof.norms))
        crossing = summary["norm_at_t0"] > rho0
    except FracgroundError as exc:
        summary["t0_error"] = str(exc)
        crossing = False
    argmax_ok = abs(prof.t_argmax - 1.0) <= step * (1 + 1e-9)
    summary["checks"] = {"t_argmax_within_one_step": argmax_ok, "crossing_outside_rho0": crossing}
    rep = Report("path", cfg)
    rep.add("dilation_path_profile", summary, dt)
    rep.write(out / "path_report.json")
    print(f"t_argmax = {prof.t_argmax:.6g} (step {step:.3g}), rho0 = {rho0:.4g}, t0 = {summary.get('t0', 'n/a')}")
    return EXIT_OK if argmax_ok and crossing else EXIT_VERIFY


def cmd_selftest(cfg, args):
    out = _outdir(args, cfg)
    results = run_all(seed=cfg.seed, params=cfg.problem)
    rep = Report("selftest", cfg)
    for r in results:
        rep.add(r.name, {"pass": r.passed, **r.detail}, r.seconds)
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name} ({r.seconds:.2f} s)")
    rep.write(out / "selftest_report.json")
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY


COMMANDS = {
    "solve": cmd_solve,
    "verify": cmd_verify,
    "bubble-scan": cmd_bubble_scan,
    "path": cmd_path,
    "selftest": cmd_selftest,
}


def build_parser():
    ap = argparse.ArgumentParser(prog="fracground", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", help="flat key = value config file")
    ap.add_argument("--snapshot", help="binary field snapshot (verify, path)")
    ap.add_argument("--out", help="output directory (default: outputs.directory)")
    ap.add_argument("--seed", type=int, help="override the config seed")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None):
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg.seed = args.seed
        cfg.solver.random_seed = cfg.seed
        return COMMANDS[args.command](cfg, args)
    except (ConfigError, SnapshotError, OSError) as exc:
        print(f"fracground: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FracgroundError as exc:
        print(f"fracground: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
