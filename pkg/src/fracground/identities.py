"""Variational identities: Pohozaev, the J/H functionals, m(M), the dilation
path through a ground state, and the mountain-pass geometry around 0.
"""
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .errors import CrossingNotFound, GeometryError, ParameterError, TruncationWarning
from .fractional import seminorm_sq_spectral
from .grid import Field, dilate, embed, lp_norm, refine, tail_mass
from .nonlinearity import ModelNonlinearity, energy, potential_energy

_EPS = np.finfo(float).eps


def _V(u, params):
    return potential_energy(u, ModelNonlinearity(params))


def pohozaev_residual(u, params):
    """|(N-2s)/2 [u]^2 - N V(u)| / max((N-2s)/2 [u]^2, eps)."""
    N, s = params.N, params.s
    lhs = 0.5 * (N - 2 * s) * seminorm_sq_spectral(u, s)
    rhs = N * _V(u, params)
    if lhs == 0 and rhs == 0:
        return 0.0
    return abs(lhs - rhs) / max(lhs, _EPS)


def J_functional(u, params):
    """J(u) = [u]^2/2 - N/(N-2s) V(u)."""
    N, s = params.N, params.s
    return 0.5 * seminorm_sq_spectral(u, s) - N / (N - 2 * s) * _V(u, params)


def H_functional(u, params):
    """H(u) = (N-2s)/2 [u]^2 - N V(u) = N I(u) - s [u]^2."""
    N, s = params.N, params.s
    return 0.5 * (N - 2 * s) * seminorm_sq_spectral(u, s) - N * _V(u, params)


def least_energy_from_M(M, params):
    """m = (s/N) ((N-2s)/(2N))^{(N-2s)/(2s)} (2M)^{N/(2s)}."""
    if not M > 0:
        raise ParameterError(f"M must be > 0, got {M}")
    N, s = params.N, params.s
    return s / N * ((N - 2 * s) / (2 * N)) ** ((N - 2 * s) / (2 * s)) * (2 * M) ** (N / (2 * s))


def least_energy_from_M_alt(M, params):
    """Same formula with the exponent (N-2s)/2; reported for comparison only."""
    N, s = params.N, params.s
    return s / N * ((N - 2 * s) / (2 * N)) ** ((N - 2 * s) / 2) * (2 * M) ** (N / (2 * s))


# --------------------------------------------------------------------------
# dilation path
# --------------------------------------------------------------------------

@dataclass
class PathProfile:
    t_samples: np.ndarray
    energies_closed_form: np.ndarray
    energies_direct: np.ndarray
    derivative_values: np.ndarray
    H_values: np.ndarray
    norms: np.ndarray
    truncated: np.ndarray
    t_argmax: float
    t_zero_H: float = float("nan")
    rho0: float = float("nan")
    seminorm_sq: float = 0.0
    potential: float = 0.0
    resolved: np.ndarray = None
    extra: dict = field(default_factory=dict)

    def rows(self):
        return zip(self.t_samples, self.energies_closed_form, self.energies_direct,
                   self.derivative_values, self.H_values, self.norms)

    def step_at(self, t):
        """Local sample spacing near t."""
        i = int(np.clip(np.searchsorted(self.t_samples, t), 1, len(self.t_samples) - 1))
        return self.t_samples[i] - self.t_samples[i - 1]


def default_t_max(params):
    N, s = params.N, params.s
    return 1.5 * (N / (N - 2 * s)) ** (1 / (2 * s))


def hs_norm(u, s):
    """||u||_{H^s} = ([u]^2 + ||u||_2^2)^{1/2}."""
    return float(np.sqrt(seminorm_sq_spectral(u, s) + lp_norm(u, 2) ** 2))


MAX_REFINE = 4


def _dilate_resolved(u, t, max_refine=MAX_REFINE):
    """dilate(u, t), first refining the grid by 2^ceil(log2(1/t)) (capped) when t < 1.

    Compression pushes content past the Nyquist frequency; refining the
    band-limited interpolant first keeps the compressed field representable.
    Returns (field, resolved) where resolved is False once the cap binds.
    """
    if t >= 1:
        return dilate(u, t, tail_threshold=None), True
    need = 2 ** int(np.ceil(np.log2(1.0 / t) - 1e-12))
    factor = min(need, max_refine)
    return dilate(refine(u, factor), t, tail_threshold=None), need <= max_refine


def dilation_path_profile(omega, params, t_max=None, num_samples=101, tail_threshold=1e-3, pad=2):
    """I(gamma(t)) for gamma(t) = omega(./t) on a geometric grid in (0, t_max].

    omega is first embedded in a box ``pad`` times larger so expanded
    samples keep their tails; the closed form uses the embedded field too.
    The grid always contains t = 1.  Compressed samples (t < 1) are
    evaluated on a grid refined by up to MAX_REFINE and marked unresolved
    beyond that; samples leaving more than ``tail_threshold`` tail mass are
    flagged.  t_argmax is taken from the direct energies over resolved,
    untruncated samples.
    """
    N, s = params.N, params.s
    if t_max is None:
        t_max = default_t_max(params)
    if not t_max > 1:
        raise ParameterError("t_max must exceed 1")
    if num_samples < 3:
        raise ParameterError("need at least 3 samples")
    nl = ModelNonlinearity(params)
    if pad > 1:
        omega = embed(omega, pad)
    semi = seminorm_sq_spectral(omega, s)
    V = potential_energy(omega, nl)
    t_min = t_max / 2.0 ** 6
    # geometric grid anchored so that t = 1 is a sample
    k = np.log(t_max / t_min)
    j1 = round((num_samples - 1) * np.log(1 / t_min) / k)
    ratio = np.exp(np.log(t_max) / (num_samples - 1 - j1)) if num_samples - 1 > j1 else 1.0
    t = ratio ** (np.arange(num_samples) - j1)
    t[j1] = 1.0
    closed = 0.5 * t ** (N - 2 * s) * semi - t**N * V
    dIdt = t ** (N - 2 * s - 1) * (1 - t ** (2 * s)) * 0.5 * (N - 2 * s) * semi
    direct = np.empty_like(t)
    H = np.empty_like(t)
    norms = np.empty_like(t)
    trunc = np.zeros(t.shape, dtype=bool)
    resolved = np.ones(t.shape, dtype=bool)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        for i, ti in enumerate(t):
            w, resolved[i] = _dilate_resolved(omega, ti)
            trunc[i] = tail_mass(w) > tail_threshold
            direct[i] = energy(w, nl)
            H[i] = H_functional(w, params)
            norms[i] = hs_norm(w, s)
    if trunc.any():
        warnings.warn(f"path samples beyond t = {t[np.argmax(trunc)]:.3g} exceed the tail budget",
                      TruncationWarning, stacklevel=2)
    ok = resolved & ~trunc
    t_arg = float(t[ok][np.argmax(direct[ok])]) if ok.any() else float("nan")
    prof = PathProfile(t, closed, direct, dIdt, H, norms, trunc, t_arg,
                       seminorm_sq=semi, potential=V, resolved=resolved)
    return prof


# --------------------------------------------------------------------------
# geometry near 0
# --------------------------------------------------------------------------

def fit_C_a(params):
    """C_a = sup_t (G(t) + (a/4) t^2) / t^{2*}, attained where t^{q-2} = a alpha q / (4 C beta)."""
    p = params
    ts = p.two_star
    alpha, beta = ts - 2.0, ts - p.q
    t_star = (p.a * alpha * p.q / (4.0 * p.C * beta)) ** (1.0 / (p.q - 2.0))
    nl = ModelNonlinearity(p)

    def ratio(t):
        return (nl.G(t) + 0.25 * p.a * t * t) / t**ts

    # refine numerically around the stationary point and take the larger value
    res = optimize.minimize_scalar(lambda lt: -ratio(np.exp(lt)), bracket=(np.log(t_star) - 1, np.log(t_star) + 1))
    return float(max(ratio(t_star), -float(res.fun))), float(t_star)


def _check_S(S_star_est):
    if not (np.isfinite(S_star_est) and S_star_est > 0):
        raise GeometryError(f"Sobolev constant estimate must be positive and finite, got {S_star_est}")


def _phi_max(c2, c_star, p):
    """argmax and max of c2 r^2 - c_star r^p for r > 0."""
    rho = (2 * c2 / (p * c_star)) ** (1 / (p - 2))
    return rho, c2 * rho**2 - c_star * rho**p


@dataclass
class GeometryEstimate:
    rho: float
    eta: float
    C_a: float
    sample_count: int
    min_sampled_energy: float = float("nan")
    u0_energy: float = float("nan")
    u0_norm: float = float("nan")
    passed: bool = False

    def as_dict(self):
        return dict(self.__dict__)


def _random_bandlimited(grid, rng, width):
    """Random smooth localized field: Gaussian-windowed low-pass noise."""
    noise = rng.standard_normal(grid.shape)
    F = np.fft.fftn(noise)
    F[grid.xi_sq > (4.0 / width) ** 2] = 0
    smooth = np.fft.ifftn(F).real
    window = np.exp(-(grid.radius / (2 * width)) ** 2)
    return Field(grid, smooth * window)


def mountain_pass_geometry(params, S_star_est, sample_count=200, seed=0, grid=None):
    """rho, eta from the bound G(t) <= -(a/4) t^2 + C_a |t|^{2*}, checked on random fields of H^s-norm rho.

    The chain uses I(u) >= min{1/2, a/4} ||u||^2 - C_a S^{-2*/2} ||u||^{2*},
    with S the Sobolev constant in the inf form S ||u||_{2*}^2 <= [u]^2.
    """
    from .grid import Grid

    p = params
    _check_S(S_star_est)
    C_a, _ = fit_C_a(p)
    c2 = min(0.5, p.a / 4)
    cst = C_a * S_star_est ** (-p.two_star / 2)
    rho, phimax = _phi_max(c2, cst, p.two_star)
    if not phimax > 0:
        raise GeometryError("lower-bound function is not positive at its maximum")
    eta = 0.5 * phimax
    grid = grid or Grid(p.N, 64, 8.0)
    rng = np.random.default_rng(seed)
    nl = ModelNonlinearity(p)
    worst = np.inf
    for _ in range(sample_count):
        width = rng.uniform(0.3, 2.0)
        u = _random_bandlimited(grid, rng, width)
        u = u * (rho / hs_norm(u, p.s))
        worst = min(worst, energy(u, nl))
    bump = grid.sample(lambda *x: np.exp(-sum(c * c for c in x)))
    t = 1.0
    while energy(bump * t, nl) >= 0 or hs_norm(bump * t, p.s) <= rho:
        t *= 2
        if t > 2**30:
            raise GeometryError("no negative-energy large-amplitude field found")
    u0 = bump * t
    return GeometryEstimate(rho=float(rho), eta=float(eta), C_a=C_a, sample_count=sample_count,
                            min_sampled_energy=float(worst), u0_energy=energy(u0, nl),
                            u0_norm=hs_norm(u0, p.s), passed=bool(worst >= eta))


def check_G_bound(params, C_a, lo=1e-6, hi=1e3, num=2000):
    """Max of G(t) + (a/4)t^2 - C_a t^{2*} on a log grid (<= 0 means the G bound holds)."""
    nl = ModelNonlinearity(params)
    t = np.logspace(np.log10(lo), np.log10(hi), num)
    t = np.concatenate([t, -t])
    gap = nl.G(t) + 0.25 * params.a * t * t - C_a * np.abs(t) ** params.two_star
    scale = C_a * np.abs(t) ** params.two_star
    return float(np.max(gap / scale))


def rho0_for_H(params, S_star_est):
    """Radius below which H > 0, by the same G-bound recipe applied to H."""
    p = params
    _check_S(S_star_est)
    C_a, _ = fit_C_a(p)
    c2 = min(0.5 * (p.N - 2 * p.s), p.N * p.a / 4)
    cst = p.N * C_a * S_star_est ** (-p.two_star / 2)
    rho0, val = _phi_max(c2, cst, p.two_star)
    if not val > 0:
        raise GeometryError("H lower bound not positive")
    return float(rho0)


def path_crossing_t0(profile, rho0, H=None, tol=1e-8):
    """Root t0 of H along the path with ||gamma(t0)|| > rho0.

    ``H`` may be a callable t -> H(gamma(t)), which then also supplies the
    bracketing values; otherwise the sampled values are interpolated
    linearly.  Scans from the largest t downward for the
    last sign change of H whose right endpoint lies outside the rho0 ball.
    """
    t = np.asarray(profile.t_samples)
    # with an exact H the brackets come from it too, so the polished root stays inside its bracket
    Hs = np.array([H(ti) for ti in t]) if H is not None else np.asarray(profile.H_values)
    norms = np.asarray(profile.norms)
    scale = max(np.max(np.abs(Hs)), _EPS)
    zero = np.abs(Hs) <= tol * scale
    for i in range(len(t) - 1, -1, -1):
        if zero[i] and norms[i] > rho0:
            profile.t_zero_H, profile.rho0 = float(t[i]), float(rho0)
            return float(t[i])
    for i in range(len(t) - 2, -1, -1):
        if Hs[i] * Hs[i + 1] < 0 and norms[i + 1] > rho0:
            lo, hi = t[i], t[i + 1]
            if H is None:
                f = lambda x: np.interp(x, t, Hs)  # noqa: E731
            else:
                f = H
            root = optimize.brentq(f, lo, hi, xtol=1e-14, rtol=4 * _EPS)
            profile.t_zero_H, profile.rho0 = float(root), float(rho0)
            return float(root)
    raise CrossingNotFound("H does not change sign along the sampled path outside the rho0 ball")


def H_along_path(omega, params):
    """Callable t -> H(omega(./t)), exact in t by the scaling laws."""
    N, s = params.N, params.s
    semi = seminorm_sq_spectral(omega, s)
    V = _V(omega, params)
    return lambda t: 0.5 * (N - 2 * s) * t ** (N - 2 * s) * semi - N * t**N * V


__all__ = [
    "pohozaev_residual",
    "J_functional",
    "H_functional",
    "least_energy_from_M",
    "PathProfile",
    "GeometryEstimate",
    "dilation_path_profile",
    "mountain_pass_geometry",
    "path_crossing_t0",
    "rho0_for_H",
    "fit_C_a",
    "check_G_bound",
    "H_along_path",
    "hs_norm",
]
