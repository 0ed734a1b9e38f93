"""Aubin-Talenti bubbles, their cutoffs and normalizations, and the scan that
estimates the Sobolev constant and the concentration rates from them.
"""
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import special, stats

from .errors import DomainError, NumericError, ResolutionError
from .fractional import seminorm_sq_spectral
from .grid import Field, lp_norm
from .nonlinearity import ModelNonlinearity, potential_energy


def talenti_bubble(grid, s, eps, kappa=1.0):
    """U(x) = kappa eps^{(N-2s)/2} / (eps^2 + |x|^2)^{(N-2s)/2}."""
    if not (eps > 0 and kappa > 0):
        raise ValueError("eps and kappa must be positive")
    e = 0.5 * (grid.dim - 2 * s)
    return Field(grid, kappa * eps**e / (eps * eps + grid.radius**2) ** e)


def cutoff_profile(r):
    """eta(r): 1 on [0, 1], smooth monotone decay to 0 at r = 2."""
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    out[r <= 1] = 1.0
    mid = (r > 1) & (r < 2)
    x = r[mid] - 1.0
    out[mid] = np.exp(1.0 - 1.0 / (1.0 - x * x))
    return out


def cutoff_bubble(grid, s, eps, kappa=1.0):
    """psi = eta U, supported in the ball of radius 2."""
    if grid.half_length < 2.5:
        raise DomainError(f"cutoff bubble needs L >= 2.5, got L = {grid.half_length}")
    U = talenti_bubble(grid, s, eps, kappa)
    return U.with_values(cutoff_profile(grid.radius) * U.values)


def normalized_bubble(grid, s, eps, kappa=1.0, two_star=None):
    """v = psi / ||psi||_{2*}."""
    if two_star is None:
        two_star = 2.0 * grid.dim / (grid.dim - 2.0 * s)
    psi = cutoff_bubble(grid, s, eps, kappa)
    nrm = lp_norm(psi, two_star)
    if not nrm > 0:
        raise NumericError("cutoff bubble vanished on the grid")
    return psi * (1.0 / nrm)


def gamma_eps(v_eps, params):
    """(C/q) ||v||_q^q - (a/2) ||v||_2^2."""
    p = params
    return p.C / p.q * lp_norm(v_eps, p.q) ** p.q - 0.5 * p.a * lp_norm(v_eps, 2) ** 2


def bubble_mass(dim, s, kappa=1.0):
    """||U||_{2*}^{2*} on R^N (independent of eps)."""
    ts = 2.0 * dim / (dim - 2.0 * s)
    return kappa**ts * np.pi ** (dim / 2) * special.gamma(dim / 2) / special.gamma(dim)


def check_resolution(grid, eps_list, warn_factor=4.0):
    h = grid.spacing
    bad = [e for e in eps_list if e < h]
    if bad:
        raise ResolutionError(f"eps {bad} below grid spacing {h:.4g}; minimum admissible eps is {h:.4g}",
                              min_admissible=h)
    loose = [e for e in eps_list if e < warn_factor * h]
    if loose:
        warnings.warn(f"eps {loose} below {warn_factor:g} h = {warn_factor * h:.4g}; bubble core is coarsely resolved",
                      RuntimeWarning, stacklevel=3)


@dataclass
class RateFit:
    slope: float
    intercept: float
    ci_low: float
    ci_high: float
    stderr: float

    def as_dict(self):
        return dict(self.__dict__)


def fit_rate(x, y, confidence=0.95):
    """Log-log slope of y against x with a t-based confidence interval."""
    x, y = np.log(np.asarray(x)), np.log(np.asarray(y))
    res = stats.linregress(x, y)
    dof = len(x) - 2
    half = stats.t.ppf(0.5 + confidence / 2, dof) * res.stderr if dof > 0 else np.inf
    return RateFit(float(res.slope), float(res.intercept), float(res.slope - half), float(res.slope + half),
                   float(res.stderr))


@dataclass
class BubbleScanResult:
    epsilons: list
    psi_2star_norms: list
    psi_seminorms: list
    gamma_values: list
    gamma_scaled: list
    V_of_v_eps: list
    v_seminorms: list
    S_star_estimate: float
    rate_fits: dict = field(default_factory=dict)
    eps0_empirical: float = float("nan")
    psi_2star_deficits: list = field(default_factory=list)
    deficit_fit_excluded: list = field(default_factory=list)

    def rows(self):
        return zip(self.epsilons, self.psi_2star_norms, self.psi_seminorms, self.gamma_values,
                   self.gamma_scaled, self.V_of_v_eps)

    def gamma_scaled_increasing(self):
        g = np.asarray(self.gamma_scaled)
        return bool(np.all(np.diff(g) > 0))

    def summary(self):
        return {
            "epsilons": list(self.epsilons),
            "S_star_estimate": self.S_star_estimate,
            "gamma_scaled_increasing": self.gamma_scaled_increasing(),
            "V_v_eps_smallest": self.V_of_v_eps[-1],
            "eps0_empirical": self.eps0_empirical,
            "psi_2star_deficits": list(self.psi_2star_deficits),
            "deficit_fit_excluded": list(self.deficit_fit_excluded),
            "rate_fits": {k: v.as_dict() for k, v in self.rate_fits.items()},
        }


def bubble_scan(params, grid, eps_list, kappa=1.0):
    """Evaluate the bubble family over decreasing eps.

    S_* is extrapolated from [v_eps]^2 = S_* + c eps^{N-2s} using the two
    smallest eps.  Rate fits: the ||psi||^{2*} deficit against the
    whole-space mass (expected slope N; eps whose deficit is not positive,
    i.e. swamped by quadrature error, are left out and listed) and the
    excess of [v_eps]^2 over the estimate (expected N - 2s).
    """
    eps = sorted((float(e) for e in eps_list), reverse=True)
    if len(set(eps)) != len(eps) or len(eps) < 2:
        raise ValueError("need at least two distinct eps values")
    check_resolution(grid, eps)
    p = params
    N, s, ts = p.N, p.s, p.two_star
    nl = ModelNonlinearity(p)
    psi_2s, psi_semi, gam, gsc, Vv, vsemi = [], [], [], [], [], []
    for e in eps:
        psi = cutoff_bubble(grid, s, e, kappa)
        nrm = lp_norm(psi, ts)
        v = psi * (1.0 / nrm)
        psi_2s.append(nrm**ts)
        psi_semi.append(seminorm_sq_spectral(psi, s))
        gv = gamma_eps(v, p)
        gam.append(gv)
        gsc.append(gv / e ** (N - 2 * s))
        Vv.append(potential_energy(v, nl))
        vsemi.append(seminorm_sq_spectral(v, s))
    rate = N - 2 * s
    e1, e2 = eps[-2], eps[-1]
    w1, w2 = e1**rate, e2**rate
    S = (w1 * vsemi[-1] - w2 * vsemi[-2]) / (w1 - w2)
    if not S > 0:
        raise NumericError(f"Sobolev constant extrapolation gave {S}")
    fits = {}
    deficit = bubble_mass(N, s, kappa) - np.asarray(psi_2s)
    used = deficit > 0
    if used.sum() >= 2:
        fits["psi_2star_deficit"] = fit_rate(np.asarray(eps)[used], deficit[used])
    excluded = [e for e, ok in zip(eps, used) if not ok]
    vexcess = np.asarray(vsemi) - S
    if np.all(vexcess > 0):
        fits["v_semi_excess"] = fit_rate(eps, vexcess)
    ok = [e for e, V in zip(eps, Vv) if V >= 1.0 / ts]
    eps0 = max(ok) if ok else float("nan")
    return BubbleScanResult(eps, psi_2s, psi_semi, gam, gsc, Vv, vsemi, float(S), fits, eps0,
                            list(deficit), excluded)


def sobolev_ratio(u, s):
    """[u]^2 / ||u||_{2*}^2 (the quotient whose infimum is S_*)."""
    ts = 2.0 * u.grid.dim / (u.grid.dim - 2.0 * s)
    return seminorm_sq_spectral(u, s) / lp_norm(u, ts) ** 2


@dataclass
class MBoundsReport:
    passed: bool
    lower_ok: bool
    upper_ok: bool
    upper_bound: float
    margin: float
    message: str

    def as_dict(self):
        return dict(self.__dict__)


def m_bounds_check(M_est, S_star_est, params):
    """0 < M < (1/2) (2*)^{(N-2s)/N} S_*; margin is the relative gap to the upper bound."""
    p = params
    ub = 0.5 * p.two_star ** ((p.N - 2 * p.s) / p.N) * S_star_est
    lower = M_est > 0
    upper = M_est < ub
    margin = (ub - M_est) / ub
    if not lower:
        msg = "lower bound violated"
    elif not upper:
        msg = "upper bound violated"
    else:
        msg = f"bounds hold, margin {margin:.3%}"
    return MBoundsReport(bool(lower and upper), bool(lower), bool(upper), float(ub), float(margin), msg)


__all__ = [
    "talenti_bubble",
    "cutoff_bubble",
    "cutoff_profile",
    "normalized_bubble",
    "gamma_eps",
    "bubble_scan",
    "bubble_mass",
    "BubbleScanResult",
    "RateFit",
    "fit_rate",
    "m_bounds_check",
    "MBoundsReport",
    "sobolev_ratio",
]
