"""Hot inner loops.

Each kernel has a numba ``@njit`` implementation and a pure-numpy one with
the same signature.  The numba path is used when numba imports and the
environment variable ``FRACGROUND_DISABLE_NUMBA`` is unset (or ``0``).
"""
import os

import numpy as np

_flag = os.environ.get("FRACGROUND_DISABLE_NUMBA", "").strip().lower()
_disabled = _flag not in ("", "0", "false", "no")

try:
    if _disabled:
        raise ImportError
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - depends on environment
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA


# --------------------------------------------------------------------------
# Direct Gagliardo double sum over grid pairs.
# --------------------------------------------------------------------------

def pair_sum_numpy(u, table):
    """sum_{j != k} (u_j - u_k)^2 * table[(j - k) mod n] for an N-d periodic array.

    ``table`` has the same shape as ``u`` and is indexed by the per-axis
    offset modulo n; ``table[0, ..., 0]`` is ignored.
    """
    u = np.asarray(u, dtype=np.float64)
    total = 0.0
    for offset in np.ndindex(*u.shape):
        if not any(offset):
            continue
        w = table[offset]
        if w == 0.0:
            continue
        diff = u - np.roll(u, offset, axis=tuple(range(u.ndim)))
        total += w * np.dot(diff.ravel(), diff.ravel())
    return total


if HAVE_NUMBA:

    @njit(cache=True)
    def _pair_sum_flat(u, idx, table, n):
        npts = u.shape[0]
        dim = idx.shape[1]
        total = 0.0
        for j in range(npts):
            uj = u[j]
            for k in range(npts):
                if k == j:
                    continue
                off = 0
                for a in range(dim):
                    d = idx[j, a] - idx[k, a]
                    if d < 0:
                        d += n
                    off = off * n + d
                diff = uj - u[k]
                total += diff * diff * table[off]
        return total

    def pair_sum_numba(u, table):
        u = np.ascontiguousarray(u, dtype=np.float64)
        n = u.shape[0]
        idx = np.indices(u.shape).reshape(u.ndim, -1).T.copy()
        return _pair_sum_flat(u.ravel(), idx, np.ascontiguousarray(table, dtype=np.float64).ravel(), n)

    @njit(cache=True)
    def _ipow(x, e):
        # integer exponents (the common 2* = 4, q = 3 case) avoid a libm pow call
        if e == 1.0:
            return x
        if e == 2.0:
            return x * x
        return x**e

    @njit(cache=True)
    def _model_terms_flat(u, a, b, c, two_star, q, g, G):
        ec = two_star - 2.0
        es = q - 2.0
        for i in range(u.shape[0]):
            t = u[i]
            at = abs(t)
            if at == 0.0:
                g[i] = 0.0
                G[i] = 0.0
                continue
            crit = _ipow(at, ec)
            sub = _ipow(at, es)
            g[i] = b * crit * t - a * t + c * sub * t
            G[i] = (b / two_star) * crit * at * at - 0.5 * a * t * t + (c / q) * sub * at * at

    def model_terms_numba(u, a, b, c, two_star, q):
        u = np.asarray(u, dtype=np.float64)
        # ascontiguousarray promotes 0-d input to shape (1,); keep the caller's shape
        flat = np.ascontiguousarray(u).ravel()
        g = np.empty_like(flat)
        G = np.empty_like(flat)
        _model_terms_flat(flat, a, b, c, two_star, q, g, G)
        return g.reshape(u.shape), G.reshape(u.shape)

else:  # pragma: no cover
    pair_sum_numba = None
    model_terms_numba = None


# --------------------------------------------------------------------------
# Model nonlinearity g(t), G(t) evaluated together.
# --------------------------------------------------------------------------

def model_terms_numpy(u, a, b, c, two_star, q):
    """Return (g(u), G(u)) for g = b|t|^{2*-2}t - a t + C|t|^{q-2}t."""
    u = np.asarray(u, dtype=np.float64)
    at = np.abs(u)
    with np.errstate(divide="ignore", invalid="ignore"):
        crit = np.where(at > 0, at ** (two_star - 2.0), 0.0)
        sub = np.where(at > 0, at ** (q - 2.0), 0.0)
    g = b * crit * u - a * u + c * sub * u
    G = (b / two_star) * crit * at * at - 0.5 * a * u * u + (c / q) * sub * at * at
    return g, G


def pair_sum(u, table):
    if USE_NUMBA:
        return pair_sum_numba(u, table)
    return pair_sum_numpy(u, table)


def model_terms(u, a, b, c, two_star, q):
    if USE_NUMBA:
        return model_terms_numba(u, a, b, c, two_star, q)
    return model_terms_numpy(u, a, b, c, two_star, q)
