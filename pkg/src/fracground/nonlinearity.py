"""Critical-growth model nonlinearity and the energy functionals built on it.

The model is the smallest g admitted by the growth hypotheses,

    g(t) = b |t|^{2*-2} t - a t + C |t|^{q-2} t,     2* = 2N / (N - 2s),

with primitive G(t) = (b/2*)|t|^{2*} - (a/2) t^2 + (C/q)|t|^q.
"""
from dataclasses import asdict, dataclass

import numpy as np

from . import _kernels
from .errors import ParameterError
from .fractional import _apply, kinetic_energy
from .grid import Field, inner, lp_norm


@dataclass(frozen=True)
class ProblemParams:
    s: float = 0.5
    N: int = 2
    a: float = 1.0
    b: float = 1.0
    C: float = 1.0
    q: float = 3.0

    @property
    def two_star(self):
        return 2.0 * self.N / (self.N - 2.0 * self.s)

    @property
    def q_lower(self):
        return max(2.0, 4.0 * self.s / (self.N - 2.0 * self.s))

    @property
    def kinetic_exponent(self):
        """(N - 2s) / N, the power of V in T >= M V^{(N-2s)/N}."""
        return (self.N - 2.0 * self.s) / self.N

    def violations(self):
        out = []
        if not (0.0 < self.s < 1.0):
            out.append(f"s={self.s} not in (0, 1)")
        if self.N not in (1, 2, 3):
            out.append(f"N={self.N} not in {{1, 2, 3}}")
        if not self.N > 2 * self.s:
            out.append(f"N={self.N} must exceed 2s={2 * self.s}")
            return out
        for name in ("a", "b", "C"):
            if not getattr(self, name) > 0:
                out.append(f"{name}={getattr(self, name)} must be > 0")
        if not (self.q_lower < self.q < self.two_star):
            out.append(
                f"q={self.q} outside ({self.q_lower:g}, {self.two_star:g}) = "
                "(max{2, 4s/(N-2s)}, 2N/(N-2s))"
            )
        return out

    def as_dict(self):
        d = asdict(self)
        d["two_star"] = self.two_star if self.N > 2 * self.s else None
        return d


def validate_params(params):
    bad = params.violations()
    if bad:
        raise ParameterError("invalid problem parameters: " + "; ".join(bad))


class ModelNonlinearity:
    """Evaluators for g, G and for f = g - b t^{2*-1} + a t, F its primitive."""

    def __init__(self, params):
        validate_params(params)
        self.params = params
        self.two_star = params.two_star

    def _terms(self, t):
        p = self.params
        return _kernels.model_terms(np.asarray(t, dtype=np.float64), p.a, p.b, p.C, self.two_star, p.q)

    def terms(self, t):
        """(g(t), G(t)) in one pass."""
        return self._terms(t)

    def g(self, t):
        return self._terms(t)[0]

    def G(self, t):
        return self._terms(t)[1]

    def f(self, t):
        p = self.params
        t = np.asarray(t, dtype=np.float64)
        return p.C * np.abs(t) ** (p.q - 2.0) * t

    def F(self, t):
        p = self.params
        return p.C / p.q * np.abs(np.asarray(t, dtype=np.float64)) ** p.q

    def f_from_g(self, t):
        """g(t) - b|t|^{2*-2}t + a t, computed from g; equals f for the model."""
        p = self.params
        t = np.asarray(t, dtype=np.float64)
        return self.g(t) - p.b * np.abs(t) ** (self.two_star - 2.0) * t + p.a * t


def potential_energy(u, nl):
    """V(u) = int G(u) dx."""
    return float(u.grid.cell_volume * np.sum(nl.G(u.values)))


def energy(u, nl):
    """I(u) = T(u) - V(u)."""
    return kinetic_energy(u, nl.params.s) - potential_energy(u, nl)


def euler_lagrange_residual(u, nl):
    """r = (-Delta)^s u - g(u) and its relative size ||r|| / max(||g(u)||, eps)."""
    g = nl.g(u.values)
    r = u.with_values(_apply(u.values, u.grid, nl.params.s) - g)
    gnorm = lp_norm(u.with_values(g), 2)
    rel = lp_norm(r, 2) / max(gnorm, np.finfo(float).eps)
    return r, rel


def lagrange_ratio(u, nl):
    """<(-Delta)^s u, g(u)> / ||g(u)||^2; equals 1 on solutions."""
    g = u.with_values(nl.g(u.values))
    Au = u.with_values(_apply(u.values, u.grid, nl.params.s))
    return inner(Au, g) / inner(g, g)


__all__ = [
    "ProblemParams",
    "ModelNonlinearity",
    "validate_params",
    "potential_energy",
    "energy",
    "euler_lagrange_residual",
    "lagrange_ratio",
    "Field",
]
