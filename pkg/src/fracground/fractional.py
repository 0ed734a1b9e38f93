"""The fractional Laplacian (-Delta)^s on the torus and the H^s seminorm.

Two independent routes to the seminorm are provided.  The spectral one is
the working convention of the whole package:

    [u]^2 := sum_xi |xi|^{2s} |u_hat(xi)|^2   (Parseval-weighted),
    (-Delta)^s := Fourier multiplier |xi|^{2s}.

The direct one evaluates the Gagliardo double integral
    iint |u(x) - u(y)|^2 / |x - y|^{N+2s} dx dy
by a pair sum on the grid.  The two differ by the constant 2 / C_{N,s};
``calibrate_normalization`` measures that ratio numerically.
"""
import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, special

from . import _kernels
from .errors import CapacityError, NumericError, ParameterError
from .grid import Field, Grid, inner

DIRECT_MAX_POINTS = 4096


def _check_s(s):
    if not (0.0 < s < 1.0):
        raise ParameterError(f"s must lie in (0, 1), got {s}")


@dataclass(frozen=True, eq=False)
class SpectralMultiplier:
    grid: Grid
    s: float
    values: np.ndarray  # |xi|^{2s} on the full FFT grid
    half: np.ndarray  # same on the rfftn half-spectrum


@lru_cache(maxsize=32)
def spectral_multiplier(grid, s):
    _check_s(s)
    full = grid.xi_sq**s
    half = grid.xi_sq_half**s
    full.flags.writeable = False
    half.flags.writeable = False
    return SpectralMultiplier(grid, float(s), full, half)


def _apply(values, grid, s):
    m = spectral_multiplier(grid, s).half
    axes = tuple(range(grid.dim))
    return np.fft.irfftn(m * np.fft.rfftn(values, axes=axes), s=grid.shape, axes=axes)


def apply_fractional_laplacian(u, s):
    return u.with_values(_apply(u.values, u.grid, s))


def seminorm_sq_spectral(u, s):
    m = spectral_multiplier(u.grid, s).values
    U = np.fft.fftn(u.values)
    g = u.grid
    return float(g.cell_volume / g.size * np.sum(m * (U.real**2 + U.imag**2)))


def kinetic_energy(u, s):
    """T(u) = [u]^2 / 2."""
    return 0.5 * seminorm_sq_spectral(u, s)


# --------------------------------------------------------------------------
# direct quadrature
# --------------------------------------------------------------------------

def _theta(t):
    k = np.arange(1, 40)
    return 1.0 + 2.0 * np.sum(np.exp(-np.pi * k * k * t))


@lru_cache(maxsize=64)
def lattice_zeta(sigma, dim):
    """Epstein zeta sum'_{k in Z^dim} |k|^{-2 sigma}, analytically continued.

    Uses the theta-function splitting at t = 1, which is valid for all
    sigma except the poles sigma = dim/2 (and gives -1 at sigma = 0).
    """
    if abs(sigma) < 1e-13:
        return -1.0
    if abs(sigma - dim / 2) < 1e-13:
        raise NumericError("lattice zeta has a pole at sigma = dim/2")

    def f(t):
        return (t ** (sigma - 1) + t ** (dim / 2 - sigma - 1)) * (_theta(t) ** dim - 1.0)

    tail, _ = integrate.quad(f, 1.0, np.inf, limit=200)
    return float(np.pi**sigma * special.rgamma(sigma) * (-1.0 / sigma - 1.0 / (dim / 2 - sigma) + tail))


@lru_cache(maxsize=32)
def _kernel_table(grid, s, images):
    """Periodized kernel sum_m |d + 2Lm|^{-(N+2s)} indexed by per-axis offset.

    The lattice sum is truncated to |m|_inf <= images; the remainder is
    replaced by the continuum integral over the complement of an
    equal-volume ball.  images = 0 gives the bare minimal-image kernel.
    """
    N, n, L, h = grid.dim, grid.n, grid.half_length, grid.spacing
    o = np.arange(n)
    d = np.where(o <= n // 2, o, o - n) * h
    D = np.meshgrid(*([d] * N), indexing="ij")
    K = np.zeros(grid.shape)
    p = N + 2 * s
    for m in itertools.product(range(-images, images + 1), repeat=N):
        r2 = sum((Di + 2 * L * mi) ** 2 for Di, mi in zip(D, m))
        with np.errstate(divide="ignore"):
            K += np.where(r2 > 0, r2 ** (-p / 2), 0.0)
    if images > 0:
        vol = ((2 * images + 1) * 2 * L) ** N
        unit_ball = np.pi ** (N / 2) / special.gamma(N / 2 + 1)
        R = (vol / unit_ball) ** (1.0 / N)
        sphere = N * unit_ball
        K += sphere * R ** (-2 * s) / (2 * s) / (2 * L) ** N
    K[(0,) * N] = 0.0
    K.flags.writeable = False
    return K


def _fd_gradient_sq(values, h):
    """|grad u|^2 by periodic fourth-order central differences."""
    total = np.zeros_like(values)
    for ax in range(values.ndim):
        r = lambda k: np.roll(values, -k, axis=ax)  # noqa: E731
        du = (8.0 * (r(1) - r(-1)) - (r(2) - r(-2))) / (12.0 * h)
        total += du * du
    return total


def seminorm_sq_direct(u, s, images=8, singular_correction=True):
    """Gagliardo double integral by an O(n^{2N}) pair sum.

    h^{2N} sum_{j != k} (u_j - u_k)^2 K(x_j - x_k), with K the periodized
    kernel (``images=0`` for the bare minimal-image distance).  The skipped
    diagonal cell is restored to leading order by a lattice-zeta correction
    proportional to |grad u|^2; disable with ``singular_correction=False``.
    """
    _check_s(s)
    g = u.grid
    if g.size > DIRECT_MAX_POINTS:
        raise CapacityError(
            f"direct quadrature limited to {DIRECT_MAX_POINTS} points, grid has {g.size}"
        )
    K = _kernel_table(g, float(s), int(images))
    h, N = g.spacing, g.dim
    total = g.cell_volume**2 * _kernels.pair_sum(u.values, K)
    if singular_correction:
        alpha = 2.0 - N - 2.0 * s
        z = lattice_zeta(-alpha / 2.0, N)
        grad2 = _fd_gradient_sq(u.values, h)
        total -= g.cell_volume * np.sum(grad2) / N * h ** (N + alpha) * z
    return float(total)


@dataclass(frozen=True)
class NormalizationCalibration:
    dim: int
    s: float
    c_ratio: float
    width: float = 1.0
    n: int = 0
    half_length: float = 0.0

    def as_dict(self):
        return {"dim": self.dim, "s": self.s, "c_ratio": self.c_ratio,
                "reference_width": self.width, "n": self.n, "half_length": self.half_length}


def reference_gaussian(grid, width=1.0):
    return grid.sample(lambda *x: np.exp(-sum(c * c for c in x) / width**2))


def calibrate_normalization(dim, s, grid, width=1.0, **direct_kw):
    if grid.dim != dim:
        raise ParameterError(f"grid dimension {grid.dim} does not match dim={dim}")
    G = reference_gaussian(grid, width)
    spectral = seminorm_sq_spectral(G, s)
    if not spectral > 0:
        raise NumericError("spectral seminorm of the reference Gaussian vanished")
    ratio = seminorm_sq_direct(G, s, **direct_kw) / spectral
    if not (np.isfinite(ratio) and ratio > 0):
        raise NumericError(f"calibration ratio is not positive and finite: {ratio}")
    return NormalizationCalibration(dim, float(s), float(ratio), float(width), grid.n, grid.half_length)


def quadratic_form(u, s):
    """<(-Delta)^s u, u> in the discrete L^2 pairing."""
    return inner(apply_fractional_laplacian(u, s), u)


__all__ = [
    "SpectralMultiplier",
    "NormalizationCalibration",
    "spectral_multiplier",
    "apply_fractional_laplacian",
    "seminorm_sq_spectral",
    "seminorm_sq_direct",
    "calibrate_normalization",
    "kinetic_energy",
    "lattice_zeta",
    "reference_gaussian",
    "quadratic_form",
    "Field",
]
