"""Periodic torus discretization of R^N, sampled fields, and the grid-level
operations everything else builds on: quadrature norms, dilation by
trigonometric resampling, and the symmetric-decreasing rearrangement.
"""
import struct
import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import ParameterError, SnapshotError, TruncationWarning

SNAPSHOT_MAGIC = b"FRGD"
SNAPSHOT_VERSION = 1
_HEADER = struct.Struct("<4sIBIdd")

DEFAULT_TAIL_THRESHOLD = 1e-3


def _is_pow2(n):
    return isinstance(n, (int, np.integer)) and n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid:
    """The torus [-L, L)^N sampled at n points per axis."""

    dim: int
    n: int
    half_length: float

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise ParameterError(f"dim must be 1, 2 or 3, got {self.dim!r}")
        if not _is_pow2(self.n) or self.n < 16:
            raise ParameterError(f"n must be a power of two >= 16, got {self.n!r}")
        if not (np.isfinite(self.half_length) and self.half_length > 0):
            raise ParameterError(f"half_length must be > 0, got {self.half_length!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "half_length", float(self.half_length))

    @property
    def spacing(self):
        return 2.0 * self.half_length / self.n

    @property
    def shape(self):
        return (self.n,) * self.dim

    @property
    def size(self):
        return self.n**self.dim

    @property
    def cell_volume(self):
        return self.spacing**self.dim

    @property
    def measure(self):
        return (2.0 * self.half_length) ** self.dim

    @cached_property
    def axis(self):
        """1-D coordinates x_j = -L + j h."""
        return -self.half_length + self.spacing * np.arange(self.n)

    @cached_property
    def wavenumbers(self):
        """Per-axis discrete frequencies pi k / L, k in [-n/2, n/2) in FFT order."""
        return (np.pi / self.half_length) * np.fft.fftfreq(self.n, 1.0 / self.n)

    def coords(self):
        return np.meshgrid(*([self.axis] * self.dim), indexing="ij")

    @cached_property
    def radius(self):
        r2 = sum(c * c for c in self.coords())
        return np.sqrt(r2)

    @cached_property
    def radius_index_sq(self):
        """Exact integer |j - n/2|^2, used for tie-exact radial ordering."""
        j = np.arange(self.n) - self.n // 2
        return sum(c * c for c in np.meshgrid(*([j] * self.dim), indexing="ij"))

    @cached_property
    def xi_sq(self):
        """|xi|^2 on the full FFT grid."""
        k = self.wavenumbers
        return sum(c * c for c in np.meshgrid(*([k] * self.dim), indexing="ij"))

    @cached_property
    def xi_sq_half(self):
        """|xi|^2 on the rfftn half-spectrum."""
        k = self.wavenumbers
        kr = np.abs(k[: self.n // 2 + 1])
        axes = [k] * (self.dim - 1) + [kr]
        return sum(c * c for c in np.meshgrid(*axes, indexing="ij"))

    def sample(self, fn):
        """Evaluate fn(*coords) on the grid and wrap as a Field."""
        return Field(self, np.asarray(fn(*self.coords()), dtype=np.float64))

    def zeros(self):
        return Field(self, np.zeros(self.shape))


def make_grid(dim, n, half_length):
    return Grid(dim, n, half_length)


@dataclass(frozen=True, eq=False)
class Field:
    """Real samples of a function on a Grid; values has shape grid.shape."""

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != self.grid.shape:
            if v.size == self.grid.size:
                v = v.reshape(self.grid.shape)
            else:
                raise ParameterError(
                    f"field has {v.size} values, grid needs {self.grid.size}"
                )
        if not np.all(np.isfinite(v)):
            raise ParameterError("field contains non-finite values")
        object.__setattr__(self, "values", v)

    def with_values(self, values):
        return Field(self.grid, values)

    def __neg__(self):
        return self.with_values(-self.values)

    def __add__(self, other):
        return self.with_values(self.values + _vals(other))

    def __sub__(self, other):
        return self.with_values(self.values - _vals(other))

    def __mul__(self, c):
        return self.with_values(self.values * c)

    __rmul__ = __mul__


def _vals(x):
    return x.values if isinstance(x, Field) else x


def inner(u, v):
    """Discrete L^2 inner product h^N sum u_j v_j."""
    return u.grid.cell_volume * float(np.vdot(_vals(u), _vals(v)))


def lp_norm(u, p):
    if p < 1:
        raise ParameterError(f"p must be >= 1, got {p}")
    a = np.abs(u.values)
    if p == 2:
        s = np.vdot(a, a)
    else:
        s = np.sum(a**p)
    return float((u.grid.cell_volume * s) ** (1.0 / p))


def tail_mass(u):
    """Fraction of |u|^2 lying outside the box |x|_inf <= L/2."""
    g = u.grid
    inside = np.ones(g.shape, dtype=bool)
    for c in g.coords():
        inside &= np.abs(c) <= 0.5 * g.half_length
    total = np.vdot(u.values, u.values)
    if total == 0:
        return 0.0
    v = u.values[~inside]
    return float(np.vdot(v, v) / total)


# --------------------------------------------------------------------------
# dilation
# --------------------------------------------------------------------------

def _resample_matrix(grid, targets):
    """Real matrix W with (W u)_i = trigonometric interpolant of u at targets[i].

    Targets outside [-L, L] get a zero row (u is taken to vanish off the torus).
    The Nyquist mode is split symmetrically so the interpolant stays real.
    """
    n, L, h = grid.n, grid.half_length, grid.spacing
    # periodic sinc (Dirichlet kernel for even n with split Nyquist mode)
    t = targets[:, None] - grid.axis[None, :]
    tn = np.tan(np.pi * t / (2 * L))
    coincident = np.abs(tn) < 1e-12
    with np.errstate(divide="ignore", invalid="ignore"):
        W = np.sin(np.pi * t / h) / (n * tn)
    W[coincident] = 1.0
    W[np.abs(targets) > L * (1 + 1e-12)] = 0.0
    return W


def _apply_per_axis(W, values):
    out = values
    for ax in range(values.ndim):
        out = np.moveaxis(np.tensordot(W, out, axes=(1, ax)), 0, ax)
    return out


def dilate(u, sigma, tail_threshold=DEFAULT_TAIL_THRESHOLD):
    """u_sigma(x) = u(x / sigma) sampled on the same grid.

    Warns with TruncationWarning when the result carries more than
    ``tail_threshold`` of its L^2 mass outside |x|_inf <= L/2.
    """
    if not sigma > 0:
        raise ParameterError(f"sigma must be > 0, got {sigma}")
    if sigma == 1:
        return u.with_values(u.values.copy())
    g = u.grid
    W = _resample_matrix(g, g.axis / sigma)
    out = u.with_values(_apply_per_axis(W, u.values))
    if tail_threshold is not None:
        tm = tail_mass(out)
        if tm > tail_threshold:
            warnings.warn(
                f"dilation by {sigma:.4g}: tail mass {tm:.3g} exceeds {tail_threshold:g}",
                TruncationWarning,
                stacklevel=2,
            )
    return out


def _pad_axis(U, n, m, ax):
    """Zero-pad a spectrum from n to m modes along ax, splitting the Nyquist mode."""
    shape = list(U.shape)
    shape[ax] = m
    out = np.zeros(shape, dtype=complex)
    h = n // 2

    def sl(a, b):
        return tuple(slice(a, b) if i == ax else slice(None) for i in range(U.ndim))

    out[sl(0, h)] = U[sl(0, h)]
    out[sl(m - h + 1, m)] = U[sl(n - h + 1, n)]
    out[sl(h, h + 1)] = 0.5 * U[sl(h, h + 1)]
    out[sl(m - h, m - h + 1)] = 0.5 * U[sl(h, h + 1)]
    return out


def refine(u, factor):
    """Trigonometric interpolant of u sampled on the grid with factor x more points per axis."""
    if not (_is_pow2(factor) and factor >= 1):
        raise ParameterError(f"refinement factor must be a power of two, got {factor}")
    if factor == 1:
        return u.with_values(u.values.copy())
    g = u.grid
    fine = Grid(g.dim, g.n * factor, g.half_length)
    U = np.fft.fftn(u.values)
    for ax in range(g.dim):
        U = _pad_axis(U, g.n, fine.n, ax)
    return Field(fine, np.fft.ifftn(U).real * factor**g.dim)


def embed(u, factor):
    """Place u at the centre of a box ``factor`` times larger (same spacing), zero outside."""
    if not (_is_pow2(factor) and factor >= 1):
        raise ParameterError(f"embedding factor must be a power of two, got {factor}")
    g = u.grid
    big = Grid(g.dim, g.n * factor, g.half_length * factor)
    off = (big.n - g.n) // 2
    out = np.zeros(big.shape)
    out[(slice(off, off + g.n),) * g.dim] = u.values
    return Field(big, out)


# --------------------------------------------------------------------------
# rearrangement
# --------------------------------------------------------------------------

def radial_order(grid):
    """Flat indices sorted by distance from the origin, ties by flat index."""
    r2 = grid.radius_index_sq.ravel()
    return np.lexsort((np.arange(r2.size), r2))


def symmetric_decreasing_rearrangement(u):
    order = radial_order(u.grid)
    vals = np.sort(np.abs(u.values).ravel())[::-1]
    out = np.empty_like(vals)
    out[order] = vals
    return u.with_values(out.reshape(u.grid.shape))


def radial_profile(u):
    """Average of u over each exact lattice radius; returns (r, mean value)."""
    r2 = u.grid.radius_index_sq.ravel()
    uniq, inv = np.unique(r2, return_inverse=True)
    sums = np.bincount(inv, weights=u.values.ravel())
    counts = np.bincount(inv)
    return np.sqrt(uniq) * u.grid.spacing, sums / counts


# --------------------------------------------------------------------------
# binary snapshots
# --------------------------------------------------------------------------

def save_snapshot(path, u, s):
    g = u.grid
    header = _HEADER.pack(SNAPSHOT_MAGIC, SNAPSHOT_VERSION, g.dim, g.n, g.half_length, float(s))
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(u.values, dtype="<f8").tobytes(order="C"))


def load_snapshot(path):
    """Read a snapshot; returns (Field, s)."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _HEADER.size:
        raise SnapshotError(f"{path}: truncated header")
    magic, version, dim, n, L, s = _HEADER.unpack_from(raw)
    if magic != SNAPSHOT_MAGIC:
        raise SnapshotError(f"{path}: bad magic {magic!r}")
    if version != SNAPSHOT_VERSION:
        raise SnapshotError(f"{path}: unsupported format version {version}")
    try:
        grid = Grid(dim, n, L)
    except ParameterError as exc:
        raise SnapshotError(f"{path}: invalid grid in header ({exc})") from exc
    body = raw[_HEADER.size:]
    if len(body) != 8 * grid.size:
        raise SnapshotError(f"{path}: expected {8 * grid.size} data bytes, found {len(body)}")
    vals = np.frombuffer(body, dtype="<f8").astype(np.float64).reshape(grid.shape)
    try:
        return Field(grid, vals), s
    except ParameterError as exc:
        raise SnapshotError(f"{path}: {exc}") from exc
