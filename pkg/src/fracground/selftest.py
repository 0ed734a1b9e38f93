"""Quick invariant suites run by ``fracground selftest``.

Each suite returns a SuiteResult; none needs a solve, so the whole set
finishes in seconds.
"""
import time
from dataclasses import dataclass

import numpy as np

from .fractional import (_apply, apply_fractional_laplacian, calibrate_normalization, seminorm_sq_direct,
                         seminorm_sq_spectral)
from .grid import Field, Grid, dilate, inner, symmetric_decreasing_rearrangement
from .nonlinearity import ModelNonlinearity, ProblemParams, energy, euler_lagrange_residual, potential_energy


@dataclass
class SuiteResult:
    name: str
    passed: bool
    detail: dict
    seconds: float = 0.0


def bandlimited_field(grid, rng, kmax=6, width=None):
    """Random real field with modes |k_i| <= kmax, optionally Gaussian-windowed."""
    coef = np.zeros(grid.shape, dtype=complex)
    idx = np.fft.fftfreq(grid.n, 1.0 / grid.n)
    mask = np.ones(grid.shape, dtype=bool)
    for ax in range(grid.dim):
        shape = [1] * grid.dim
        shape[ax] = grid.n
        mask &= (np.abs(idx) <= kmax).reshape(shape)
    coef[mask] = rng.standard_normal(mask.sum()) + 1j * rng.standard_normal(mask.sum())
    u = np.fft.ifftn(coef).real
    if width is not None:
        u = u * np.exp(-(grid.radius / width) ** 2)
    return Field(grid, u / np.max(np.abs(u)))


def localized_field(grid, rng):
    """Smooth bump with random centre offset and anisotropy, well inside the box."""
    L = grid.half_length
    c = rng.uniform(-0.05 * L, 0.05 * L, grid.dim)
    w = rng.uniform(0.08 * L, 0.12 * L, grid.dim)
    amp = rng.uniform(0.5, 2.0)
    return grid.sample(lambda *x: amp * np.exp(-sum(((xi - ci) / wi) ** 2 for xi, ci, wi in zip(x, c, w))))


def suite_eigenfunction(s=0.5):
    g = Grid(1, 64, np.pi)
    x = g.axis
    worst = 0.0
    for k in range(1, g.n // 2):
        u = np.cos(k * x)
        Au = _apply(u, g, s)
        worst = max(worst, np.max(np.abs(Au - k ** (2 * s) * u)) / k ** (2 * s))
    return worst <= 1e-10, {"max_rel_error": worst}


def suite_self_adjoint(seed=0):
    rng = np.random.default_rng(seed)
    g = Grid(2, 64, 6.0)
    worst = 0.0
    for _ in range(5):
        u, v = bandlimited_field(g, rng), bandlimited_field(g, rng)
        lhs = inner(apply_fractional_laplacian(u, 0.5), v)
        rhs = inner(u, apply_fractional_laplacian(v, 0.5))
        scale = np.sqrt(inner(u, u) * inner(v, v))
        worst = max(worst, abs(lhs - rhs) / scale)
    return worst <= 1e-10, {"max_rel_asymmetry": worst}


def suite_scaling(params=None):
    params = params or ProblemParams()
    nl = ModelNonlinearity(params)
    # the torus images perturb T by about (width / L)^{N+2s}; keep a wide margin
    g = Grid(params.N, 256, 24.0)
    u = g.sample(lambda *x: 1.5 * np.exp(-sum(c * c for c in x)))
    T0 = seminorm_sq_spectral(u, params.s)
    V0 = potential_energy(u, nl)
    worst = 0.0
    for sigma in (0.5, 2.0):
        w = dilate(u, sigma)
        eT = abs(seminorm_sq_spectral(w, params.s) / (sigma ** (params.N - 2 * params.s) * T0) - 1)
        eV = abs(potential_energy(w, nl) / (sigma**params.N * V0) - 1)
        worst = max(worst, eT, eV)
    return worst <= 1e-3, {"max_rel_error": worst}


def suite_rearrangement(seed=0):
    rng = np.random.default_rng(seed)
    g = Grid(2, 64, 6.0)
    u = bandlimited_field(g, rng, width=2.0)
    r = symmetric_decreasing_rearrangement(u)
    rr = symmetric_decreasing_rearrangement(r)
    idem = np.array_equal(r.values, rr.values)
    equimeasurable = np.array_equal(np.sort(np.abs(u.values).ravel()), np.sort(r.values.ravel()))
    return idem and equimeasurable, {"idempotent": idem, "equimeasurable": equimeasurable}


def suite_gradient(seed=0, params=None):
    """Central differences of I against <EL residual, phi> for ten random pairs.

    Each error must sit below 10 tau^2 (relative to max(|<r, phi>|, 1)) for
    tau in {1e-3, 1e-4}, and the error ratio between the two confirms the
    O(tau^2) order.
    """
    params = params or ProblemParams()
    nl = ModelNonlinearity(params)
    rng = np.random.default_rng(seed)
    g = Grid(params.N, 64, 8.0)
    taus = (1e-3, 1e-4)
    worst_order = np.inf
    worst_err = 0.0
    for _ in range(10):
        u = bandlimited_field(g, rng, width=2.0) * 1.5
        phi = bandlimited_field(g, rng, width=2.0)
        r, _ = euler_lagrange_residual(u, nl)
        exact = inner(r, phi)
        scale = max(abs(exact), 1.0)
        errs = []
        for tau in taus:
            fd = (energy(u + tau * phi, nl) - energy(u - tau * phi, nl)) / (2 * tau)
            errs.append(abs(fd - exact) / scale)
        worst_err = max(worst_err, max(e / (10 * tau**2) for e, tau in zip(errs, taus)))
        worst_order = min(worst_order, np.log10(errs[0] / errs[1]))
    ok = worst_err <= 1.0 and worst_order >= 1.8
    return ok, {"max_err_over_bound": worst_err, "min_observed_order": float(worst_order), "taus": list(taus)}


def suite_oracle(s=0.5):
    """Direct / spectral seminorm ratio constant across test functions (1D, n = 64)."""
    g = Grid(1, 64, 8.0)
    x = g.axis
    tests = {
        "gaussian": np.exp(-x**2),
        "bump": np.where(np.abs(x) < 3, np.exp(1 - 1 / np.clip(1 - (x / 3) ** 2, 1e-300, None)), 0.0),
        "two_bump": np.exp(-(x - 1.5) ** 2) + 0.5 * np.exp(-2 * (x + 2) ** 2),
    }
    ratios = {k: seminorm_sq_direct(Field(g, v), s) / seminorm_sq_spectral(Field(g, v), s) for k, v in tests.items()}
    vals = np.array(list(ratios.values()))
    spread = float((vals.max() - vals.min()) / vals.mean())
    c64 = calibrate_normalization(1, s, g).c_ratio
    c128 = calibrate_normalization(1, s, Grid(1, 128, 8.0)).c_ratio
    drift = abs(c128 / c64 - 1)
    return spread <= 0.05 and drift <= 0.02, {"ratios": ratios, "spread": spread, "c_ratio_64": c64,
                                              "c_ratio_128": c128, "refinement_drift": drift}


SUITES = {
    "eigenfunction": suite_eigenfunction,
    "self_adjointness": suite_self_adjoint,
    "scaling": suite_scaling,
    "rearrangement": suite_rearrangement,
    "gradient_consistency": suite_gradient,
    "oracle_equivalence": suite_oracle,
}


def run_all(seed=0, params=None):
    out = []
    for name, fn in SUITES.items():
        t0 = time.perf_counter()
        if name in ("self_adjointness", "rearrangement"):
            ok, detail = fn(seed)
        elif name == "gradient_consistency":
            ok, detail = fn(seed, params)
        elif name == "scaling":
            ok, detail = fn(params)
        elif name in ("eigenfunction", "oracle_equivalence") and params is not None:
            ok, detail = fn(params.s)
        else:
            ok, detail = fn()
        out.append(SuiteResult(name, bool(ok), detail, time.perf_counter() - t0))
    return out
