"""Constrained minimization of T on {V = 1} and the ground state omega = Phi(u).

The descent is a Sobolev-preconditioned gradient step tangent to the level
set {V = 1}, followed by an exact amplitude retraction back to V = 1 and an
Armijo test on the retracted kinetic energy.  Symmetric-decreasing
rearrangement is tried periodically and kept only if it does not raise T.
"""
import logging
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ConstraintError, NumericError, ParameterError, TruncationWarning
from .fractional import _apply, kinetic_energy, seminorm_sq_spectral, spectral_multiplier
from .grid import Field, Grid, dilate, load_snapshot, symmetric_decreasing_rearrangement, tail_mass
from .nonlinearity import ModelNonlinearity, energy, euler_lagrange_residual, lagrange_ratio, potential_energy

log = logging.getLogger(__name__)


@dataclass
class SolverConfig:
    max_iterations: int = 4000
    gradient_tolerance: float = 1e-2
    initial_step: float = 1.0
    shrink: float = 0.5
    grow: float = 1.5
    armijo: float = 1e-4
    rearrangement_period: int = 50
    projection_period: int = 1
    initial_guess: str = "gaussian"  # gaussian | bubble | snapshot
    initial_width: float = 2.0
    bubble_eps: float = 0.5
    snapshot_path: str = ""
    preconditioner: str = "sobolev"  # sobolev | none
    kkt_floor: float = 1e-8
    phi_rescale_grid: bool = True
    random_seed: int = 0

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ParameterError("max_iterations must be positive")
        if not self.gradient_tolerance > 0:
            raise ParameterError("gradient_tolerance must be > 0")
        if self.rearrangement_period < 0 or self.projection_period < 1:
            raise ParameterError("periods must be non-negative (projection >= 1)")
        if self.initial_guess not in ("gaussian", "bubble", "snapshot"):
            raise ParameterError(f"unknown initial_guess {self.initial_guess!r}")
        if self.preconditioner not in ("sobolev", "none"):
            raise ParameterError(f"unknown preconditioner {self.preconditioner!r}")


@dataclass
class MinimizationResult:
    u_min: Field
    M: float
    iterations: int
    converged: bool
    el_proxy: float
    kkt_residual: float
    tol_M: float
    T_history: list = field(default_factory=list)
    rearrangement_log: list = field(default_factory=list)


@dataclass
class GroundStateResult:
    u_min: Field
    M: float
    omega: Field
    m_direct: float
    m_formula: float
    tau: float
    pohozaev_rel_residual: float
    el_rel_residual: float
    lagrange_mu: float
    iterations: int
    converged: bool
    tol_M: float
    diagnostics: dict = field(default_factory=dict)

    def summary(self):
        return {
            "M": self.M,
            "tol_M": self.tol_M,
            "m_direct": self.m_direct,
            "m_formula": self.m_formula,
            "m_rel_gap": abs(self.m_direct - self.m_formula) / abs(self.m_direct),
            "tau": self.tau,
            "pohozaev_rel_residual": self.pohozaev_rel_residual,
            "el_rel_residual": self.el_rel_residual,
            "lagrange_mu": self.lagrange_mu,
            "iterations": self.iterations,
            "converged": self.converged,
            "diagnostics": self.diagnostics,
        }


# --------------------------------------------------------------------------
# projections
# --------------------------------------------------------------------------

def project_to_constraint(u, nl, max_rounds=4, tol=1e-12):
    """Dilate u to V = 1 with sigma = V(u)^{-1/N}, repeating while |V - 1| > tol."""
    N = nl.params.N
    V = potential_energy(u, nl)
    if not V > 0:
        raise ConstraintError(f"V(u) = {V:.3g} <= 0; cannot dilate onto V = 1")
    for _ in range(max_rounds):
        if abs(V - 1.0) <= tol:
            break
        u = dilate(u, V ** (-1.0 / N), tail_threshold=None)
        V = potential_energy(u, nl)
        if not V > 0:
            raise ConstraintError("dilation destroyed positivity of V")
    return u


def _retract(v, nl, dv):
    """Amplitude t with V(t v) = 1 by safeguarded Newton, starting from t = 1."""
    t = 1.0
    for _ in range(60):
        g, G = nl.terms(t * v)
        F = dv * G.sum() - 1.0
        dF = dv * np.vdot(g, v)
        if not dF > 0:
            return None
        step = -F / dF
        t_new = t + step
        if t_new <= 0.5 * t:
            t_new = 0.5 * t
        if abs(t_new - t) <= 1e-15 * t:
            t = t_new
            break
        t = t_new
    g, G = nl.terms(t * v)
    if abs(dv * G.sum() - 1.0) > 1e-10:
        return None
    return t * v


def amplitude_tune(u0, nl, max_power=20):
    """Smallest t in {1, 2, 4, ..., 2^max_power} with V(t u0) > 0."""
    for k in range(max_power + 1):
        t = 2.0**k
        if potential_energy(u0 * t, nl) > 0:
            return u0 * t, t
    raise ConstraintError(f"V(t u0) <= 0 for all t up to 2^{max_power}")


def initial_guess(grid, nl, config):
    kind = config.initial_guess
    if kind == "gaussian":
        w = config.initial_width
        u0 = grid.sample(lambda *x: np.exp(-sum(c * c for c in x) / w**2))
    elif kind == "bubble":
        from .bubble import talenti_bubble

        u0 = talenti_bubble(grid, nl.params.s, config.bubble_eps, 1.0)
    else:
        u0, _ = load_snapshot(config.snapshot_path)
        if u0.grid != grid:
            raise ParameterError("initial snapshot grid does not match the solver grid")
    u0, _ = amplitude_tune(u0, nl)
    return project_to_constraint(u0, nl)


# --------------------------------------------------------------------------
# descent
# --------------------------------------------------------------------------

def _pohozaev_tau2s(Tu, params):
    """tau^{2s} = ((N - 2s)/(2N)) [u]^2 for the Phi map."""
    return (params.N - 2 * params.s) / params.N * Tu


def minimize_M(params, grid, config=None, u0=None):
    """Minimize T over {V = 1}; returns a MinimizationResult.

    Stops when the EL residual of Phi(u), estimated without dilating,
    drops below ``gradient_tolerance`` (converged) or when the constrained
    stationarity residual reaches ``kkt_floor`` (discrete minimizer found
    but the Pohozaev-scaled field is still not a solution, not converged).
    """
    config = config or SolverConfig()
    nl = ModelNonlinearity(params)
    s = params.s
    dv = grid.cell_volume
    u = (u0 if u0 is not None else initial_guess(grid, nl, config)).values.copy()
    if abs(dv * nl.G(u).sum() - 1.0) > 1e-10:
        r = _retract(u, nl, dv)
        if r is None:
            raise ConstraintError("initial guess cannot be retracted onto V = 1")
        u = r

    if config.preconditioner == "sobolev":
        precond = 1.0 / (spectral_multiplier(grid, s).half + params.a)
    else:
        precond = None
    axes = tuple(range(grid.dim))

    def P(v):
        if precond is None:
            return v
        return np.fft.irfftn(precond * np.fft.rfftn(v), s=grid.shape, axes=axes)

    def T_of(v):
        return 0.5 * dv * float(np.vdot(v, _apply(v, grid, s)))

    alpha = config.initial_step
    history = []
    rlog = []
    converged = False
    el_proxy = np.inf
    kkt = np.inf
    it = 0
    Tu = T_of(u)
    for it in range(1, config.max_iterations + 1):
        Au = _apply(u, grid, s)
        gu = nl.g(u)
        Tu = 0.5 * dv * float(np.vdot(u, Au))
        PA, Pg = P(Au), P(gu)
        mu = float(np.vdot(gu, PA) / np.vdot(gu, Pg))
        d = -(PA - mu * Pg)
        gnorm = np.linalg.norm(gu)
        kkt = np.linalg.norm(Au - mu * gu) / (abs(mu) * gnorm)
        t2s = _pohozaev_tau2s(Tu, params)
        el_proxy = np.linalg.norm(Au - t2s * gu) / (t2s * gnorm)
        history.append(Tu)
        if el_proxy <= config.gradient_tolerance:
            converged = True
            break
        if kkt <= config.kkt_floor:
            break
        slope = dv * float(np.vdot(Au, d))
        if slope >= 0:
            break
        accepted = None
        for _ in range(60):
            w = u + alpha * d
            if dv * nl.G(w).sum() > 0:
                w = _retract(w, nl, dv)
                if w is not None:
                    Tw = T_of(w)
                    if Tw <= Tu + config.armijo * alpha * slope:
                        accepted = w
                        break
            alpha *= config.shrink
        if accepted is None:
            log.info("line search failed at iteration %d", it)
            break
        u = accepted
        alpha *= config.grow
        if config.rearrangement_period and it % config.rearrangement_period == 0:
            ur = symmetric_decreasing_rearrangement(Field(grid, u)).values
            Tr, Tc = T_of(ur), T_of(u)
            ok = Tr <= Tc * (1 + 1e-12)
            rlog.append({"iteration": it, "T_before": Tc, "T_after": Tr, "accepted": bool(ok)})
            if ok:
                u = ur
    # final radial enforcement, kept under the same descent guard
    if config.rearrangement_period:
        ur = symmetric_decreasing_rearrangement(Field(grid, u)).values
        Tr, Tc = T_of(ur), T_of(u)
        ok = Tr <= Tc * (1 + 1e-12)
        rlog.append({"iteration": it, "T_before": Tc, "T_after": Tr, "accepted": bool(ok)})
        if ok:
            u = ur
    M = T_of(u)
    # M uncertainty: size of the last few accepted decrements
    tail = history[-4:] + [M]
    tol_M = (max(tail) - min(tail)) + 1e-10 * abs(M)
    if not converged:
        log.info("minimize_M stopped after %d iterations, EL proxy %.3g, KKT %.3g", it, el_proxy, kkt)
    return MinimizationResult(Field(grid, u), M, it, converged, float(el_proxy), float(kkt), float(tol_M), history, rlog)


# --------------------------------------------------------------------------
# Phi map and the full solve
# --------------------------------------------------------------------------

def phi_tau(v, s, N):
    semi = seminorm_sq_spectral(v, s)
    if not semi > 0:
        raise NumericError("Phi map undefined for a field with zero seminorm")
    return ((N - 2 * s) / (2 * N)) ** (1 / (2 * s)) * semi ** (1 / (2 * s))


def phi_map(v, s, N, rescale_grid=True):
    """Phi(v)(x) = v(x / tau), tau = ((N-2s)/(2N))^{1/(2s)} [v]^{1/s}; returns (field, tau).

    With ``rescale_grid`` the samples are kept and the grid is stretched to
    half-length tau L, which realizes the dilation exactly (all scaling laws
    hold to round-off).  Otherwise v is resampled onto its own grid with
    ``dilate``, which truncates at the box edge when tau < 1.
    """
    tau = phi_tau(v, s, N)
    if rescale_grid:
        g = v.grid
        return Field(Grid(g.dim, g.n, tau * g.half_length), v.values.copy()), tau
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        out = dilate(v, tau)
    if tail_mass(out) > 1e-3:
        warnings.warn(f"Phi dilation by {tau:.4g} leaves tail mass {tail_mass(out):.3g}", TruncationWarning, stacklevel=2)
    return out, tau


def _radial_defect(u):
    ur = symmetric_decreasing_rearrangement(u)
    return float(np.linalg.norm(u.values - ur.values) / np.linalg.norm(u.values))


def solve_ground_state(params, grid, config=None, starts=None):
    """minimize_M -> phi_map -> diagnostics.

    ``starts`` is an optional list of SolverConfig overrides (dicts); the
    run with the lowest I(omega) is returned and all are listed in the
    diagnostics.
    """
    from .identities import least_energy_from_M, pohozaev_residual

    config = config or SolverConfig()
    t0 = time.perf_counter()
    configs = [config]
    if starts:
        configs = [SolverConfig(**{**config.__dict__, **ov}) for ov in starts]
    best = None
    runs = []
    for cfg in configs:
        res = minimize_M(params, grid, cfg)
        nl = ModelNonlinearity(params)
        omega, tau = phi_map(res.u_min, params.s, params.N, rescale_grid=cfg.phi_rescale_grid)
        m_direct = energy(omega, nl)
        runs.append({"initial_guess": cfg.initial_guess, "initial_width": cfg.initial_width,
                     "M": res.M, "m_direct": m_direct, "converged": res.converged})
        if best is None or m_direct < best[2]:
            best = (res, omega, m_direct, tau)
    res, omega, m_direct, tau = best
    nl = ModelNonlinearity(params)
    _, el = euler_lagrange_residual(omega, nl)
    poh = pohozaev_residual(omega, params)
    m_formula = least_energy_from_M(res.M, params)
    mu = lagrange_ratio(omega, nl)
    vmax = float(np.max(np.abs(omega.values)))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        om_rs, _ = phi_map(res.u_min, params.s, params.N, rescale_grid=False)
    resampled = {"pohozaev_rel_residual": pohozaev_residual(om_rs, params),
                 "el_rel_residual": euler_lagrange_residual(om_rs, nl)[1],
                 "m_direct": energy(om_rs, nl)}
    diagnostics = {
        "el_proxy_pre_phi": res.el_proxy,
        "kkt_residual": res.kkt_residual,
        "V_u_min": potential_energy(res.u_min, nl),
        "T_u_min": kinetic_energy(res.u_min, params.s),
        "tail_mass_u_min": tail_mass(res.u_min),
        "tail_mass_omega": tail_mass(omega),
        "omega_min_over_max": float(np.min(omega.values)) / vmax,
        "omega_radial_defect": _radial_defect(omega),
        "u_min_radial_defect": _radial_defect(res.u_min),
        "seminorm_sq_omega": seminorm_sq_spectral(omega, params.s),
        "omega_half_length": omega.grid.half_length,
        "phi_resampled_on_solve_grid": resampled,
        "rearrangement_log": res.rearrangement_log,
        "T_history_len": len(res.T_history),
        "runs": runs,
        "wall_seconds": time.perf_counter() - t0,
    }
    converged = res.converged and el <= config.gradient_tolerance * 10
    return GroundStateResult(
        u_min=res.u_min, M=res.M, omega=omega, m_direct=m_direct, m_formula=m_formula, tau=tau,
        pohozaev_rel_residual=poh, el_rel_residual=el, lagrange_mu=mu, iterations=res.iterations,
        converged=bool(converged), tol_M=res.tol_M, diagnostics=diagnostics,
    )
