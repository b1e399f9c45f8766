"""Exact hitting-theoretic quantities of dX = alpha*mu(X)dt + sigma(X)dW.

Everything here is computed from the scale function

    S(x) = int_0^x exp(-2*alpha*Psi(y)) dy,      Psi(y) = int_0^y psi(z) dz,

via the classical identities: the probability of reaching 1 before 0 is a
ratio of scale increments, and the expected occupation density (Green
function) before absorption is built from S, S' and sigma^2.  Conditioning
on the exit side multiplies the Green function by a ratio of hitting
probabilities (an h-transform), and the conditioned drift follows the same
transform.

The neutral case alpha = 0 short-circuits to the exact identity scale
S(x) = x, so every scale ratio is exact there and the neutral closed forms
are reproduced to machine precision.

For the Wright-Fisher diffusion coefficient sigma^2(y) = y*(1-y), the
boundary factors of sigma^2 are cancelled against scale increments before
any quadrature sees them: ratios like (S(1)-S(y))/(1-y) stay bounded at the
endpoints, which keeps all occupation-time integrands regular.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Callable

import numpy as np

from .errors import DomainError
from .polynomial import Poly
from .quadrature import (DEFAULT_CONFIG, CumulativeTable, QuadConfig,
                         cumulative, integrate)

__all__ = [
    "FrequencyDependence", "DiffusionCoefficient", "DiffusionModel",
    "ScaleTable", "HittingSummary", "Conditioning", "WRIGHT_FISHER",
    "build_scale", "hit_prob_up", "hit_prob_down", "green",
    "absorption_time", "absorption_time_conditioned",
    "conditioned_time_at_zero", "frequency_spectrum", "conditioned_drift",
    "hitting_summary",
]


def _vectorize_if_needed(fn):
    """Let scalar-only callables participate in array quadrature."""
    try:
        out = fn(np.array([0.25, 0.5]))
        np.asarray(out, dtype=float).reshape(2)
        return fn
    except Exception:
        return np.vectorize(fn, otypes=[float])


class FrequencyDependence:
    """The selection function psi on [0, 1].

    Either an exact polynomial (monomial-basis coefficients, kept as
    rationals so first-order results can be computed exactly) or an opaque
    evaluator with a declared supremum bound.
    """

    def __init__(self, *, poly: Poly | None, fn: Callable | None,
                 bound: float):
        self._poly = poly
        self._fn = fn
        self.bound = float(bound)
        if not math.isfinite(self.bound):
            raise ValueError("declared bound must be finite")

    @classmethod
    def from_coefficients(cls, coeffs) -> "FrequencyDependence":
        poly = Poly(coeffs)
        bound = float(sum(abs(c) for c in poly.coeffs))
        return cls(poly=poly, fn=None, bound=bound)

    @classmethod
    def from_callable(cls, fn: Callable, bound: float) -> "FrequencyDependence":
        return cls(poly=None, fn=_vectorize_if_needed(fn), bound=bound)

    @classmethod
    def monomial(cls, k: int) -> "FrequencyDependence":
        """psi(x) = x**k."""
        return cls.from_coefficients(Poly.x_pow(k).coeffs)

    @classmethod
    def one_minus_monomial(cls, k: int) -> "FrequencyDependence":
        """psi(x) = (1-x)**k."""
        return cls.from_coefficients(Poly.one_minus_x_pow(k).coeffs)

    @classmethod
    def linear(cls, beta, gamma) -> "FrequencyDependence":
        """psi(x) = beta - gamma*x."""
        return cls.from_coefficients([beta, -gamma])

    @property
    def is_polynomial(self) -> bool:
        return self._poly is not None

    @property
    def poly(self) -> Poly:
        if self._poly is None:
            raise TypeError("frequency dependence is not polynomial")
        return self._poly

    def __call__(self, y):
        if self._poly is not None:
            return self._poly(y)
        return self._fn(y)

    def eval_exact(self, x) -> Fraction:
        """Exact rational evaluation; polynomial representation only."""
        if self._poly is None:
            raise TypeError("exact evaluation requires polynomial psi")
        if not isinstance(x, Rational):
            x = Fraction(x)
        return self._poly(Fraction(x))

    def __repr__(self):
        if self._poly is not None:
            return f"FrequencyDependence(coefficients={list(self._poly.coeffs)})"
        return f"FrequencyDependence(callable, bound={self.bound})"


class DiffusionCoefficient:
    """sigma^2 on [0, 1]: the named Wright-Fisher case or an evaluator."""

    def __init__(self, *, wright_fisher: bool, poly: Poly | None,
                 fn: Callable | None):
        self._wf = wright_fisher
        self._poly = poly
        self._fn = fn

    @classmethod
    def wright_fisher(cls) -> "DiffusionCoefficient":
        return cls(wright_fisher=True, poly=None, fn=None)

    @classmethod
    def from_coefficients(cls, coeffs) -> "DiffusionCoefficient":
        return cls(wright_fisher=False, poly=Poly(coeffs), fn=None)

    @classmethod
    def from_callable(cls, fn: Callable) -> "DiffusionCoefficient":
        return cls(wright_fisher=False, poly=None,
                   fn=_vectorize_if_needed(fn))

    @property
    def is_wright_fisher(self) -> bool:
        return self._wf

    @property
    def is_polynomial(self) -> bool:
        return self._wf or self._poly is not None

    @property
    def poly(self) -> Poly:
        if self._wf:
            return Poly([0, 1, -1])
        if self._poly is None:
            raise TypeError("diffusion coefficient is not polynomial")
        return self._poly

    def __call__(self, y):
        if self._wf:
            return y * (1.0 - y)
        if self._poly is not None:
            return self._poly(y)
        return self._fn(y)

    def __repr__(self):
        if self._wf:
            return "DiffusionCoefficient(WRIGHT_FISHER)"
        if self._poly is not None:
            return f"DiffusionCoefficient(coefficients={list(self._poly.coeffs)})"
        return "DiffusionCoefficient(callable)"


WRIGHT_FISHER = DiffusionCoefficient.wright_fisher()


@dataclass(frozen=True)
class DiffusionModel:
    """Immutable triple (alpha, psi, sigma^2); drift is alpha*psi*sigma^2."""

    alpha: float
    psi: FrequencyDependence
    sigma2: DiffusionCoefficient = WRIGHT_FISHER

    def mu(self, y):
        """mu(y) = psi(y) * sigma^2(y); the drift is alpha*mu."""
        return self.psi(y) * self.sigma2(y)

    def drift(self, y):
        return self.alpha * self.mu(y)


class Conditioning(enum.Enum):
    NONE = "none"
    UP = "up"      # condition on T_1 < T_0
    DOWN = "down"  # condition on T_0 < T_1


@dataclass(frozen=True)
class ScaleTable:
    """Cached Psi and S on adaptive grids; S' is evaluated from Psi."""

    psi_cumulative: CumulativeTable
    scale: CumulativeTable
    alpha: float

    @property
    def scale_total(self) -> float:
        return self.scale.total

    def s(self, x):
        return self.scale(x)

    def s_prime(self, x):
        """S'(x) = exp(-2*alpha*Psi(x)), always positive."""
        return np.exp(-2.0 * self.alpha * self.psi_cumulative(x))


@dataclass(frozen=True)
class HittingSummary:
    """Hitting probability and expected (conditional) absorption times."""

    p_up: float
    p_down: float
    e_t: float
    e_t_up: float
    e_t_down: float


def _identity_table() -> CumulativeTable:
    return CumulativeTable.from_data([0.0, 1.0], [0.0, 1.0], [1.0, 1.0])


def build_scale(model: DiffusionModel,
                cfg: QuadConfig = DEFAULT_CONFIG) -> ScaleTable:
    """Tabulate Psi(y) = int_0^y psi and S(y) = int_0^y exp(-2*alpha*Psi)."""
    psi_cum = cumulative(model.psi, cfg)
    if model.alpha == 0.0:
        scale = _identity_table()
    else:
        a2 = 2.0 * model.alpha

        def s_prime(y):
            return np.exp(-a2 * psi_cum(y))

        scale = cumulative(s_prime, cfg)
        if not np.all(np.diff(scale.values) > 0):
            raise ArithmeticError("scale table failed to be strictly increasing")
    return ScaleTable(psi_cum, scale, model.alpha)


def _scale_for(model, cfg, scale):
    return scale if scale is not None else build_scale(model, cfg)


def hit_prob_up(model: DiffusionModel, x: float,
                cfg: QuadConfig = DEFAULT_CONFIG,
                scale: ScaleTable | None = None) -> float:
    """P_x(T_1 < T_0) = S(x) / S(1)."""
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"x must lie in [0, 1], got {x!r}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    st = _scale_for(model, cfg, scale)
    return min(1.0, max(0.0, st.s(x) / st.scale_total))


def hit_prob_down(model: DiffusionModel, x: float,
                  cfg: QuadConfig = DEFAULT_CONFIG,
                  scale: ScaleTable | None = None) -> float:
    """P_x(T_0 < T_1) = 1 - hit_prob_up(x), exactly by construction."""
    return 1.0 - hit_prob_up(model, x, cfg, scale)


def _check_interior(name, v):
    if not 0.0 < v < 1.0:
        raise DomainError(f"{name} must lie strictly inside (0, 1), got {v!r}")


def _occupation_integrands(model, st):
    """Vectorized Green-function branches 2*<scale factors>/(sigma^2*S').

    Returns (below, above): below(y) valid for y <= x, above(y) for y >= x,
    each as a function of (x, y-array).  For Wright-Fisher sigma^2 the
    boundary zeros are cancelled into difference quotients S(y)/y and
    (S(1)-S(y))/(1-y), which stay bounded at the endpoints.
    """
    s1 = st.scale_total
    wf = model.sigma2.is_wright_fisher

    def below(x, y):
        sy = st.s(y)
        sp = st.s_prime(y)
        px_down = (s1 - st.s(x)) / s1
        if wf:
            return 2.0 * px_down * (sy / y) / ((1.0 - y) * sp)
        return 2.0 * px_down * sy / (model.sigma2(y) * sp)

    def above(x, y):
        sy = st.s(y)
        sp = st.s_prime(y)
        px_up = st.s(x) / s1
        if wf:
            return 2.0 * px_up * ((s1 - sy) / (1.0 - y)) / (y * sp)
        return 2.0 * px_up * (s1 - sy) / (model.sigma2(y) * sp)

    return below, above


def green(model: DiffusionModel, x: float, y: float,
          conditioning: Conditioning = Conditioning.NONE,
          cfg: QuadConfig = DEFAULT_CONFIG,
          scale: ScaleTable | None = None) -> float:
    """Occupation density at y of the path started at x, before absorption.

    `conditioning` multiplies by P_y/P_x of the corresponding exit event.
    """
    _check_interior("x", x)
    _check_interior("y", y)
    st = _scale_for(model, cfg, scale)
    below, above = _occupation_integrands(model, st)
    ya = np.array([y])
    base = float((below if y <= x else above)(x, ya)[0])
    if conditioning is Conditioning.NONE:
        return base
    s1 = st.scale_total
    sx, sy = st.s(x), st.s(y)
    if conditioning is Conditioning.UP:
        return base * (sy / sx)
    if conditioning is Conditioning.DOWN:
        return base * ((s1 - sy) / (s1 - sx))
    raise ValueError(f"unknown conditioning {conditioning!r}")


def absorption_time(model: DiffusionModel, x: float,
                    cfg: QuadConfig = DEFAULT_CONFIG,
                    scale: ScaleTable | None = None) -> float:
    """E_x[T]: integral of the occupation density over (0, 1)."""
    _check_interior("x", x)
    st = _scale_for(model, cfg, scale)
    below, above = _occupation_integrands(model, st)
    return (integrate(lambda y: below(x, y), 0.0, x, cfg)
            + integrate(lambda y: above(x, y), x, 1.0, cfg))


def absorption_time_conditioned(model: DiffusionModel, x: float,
                                direction: Conditioning,
                                cfg: QuadConfig = DEFAULT_CONFIG,
                                scale: ScaleTable | None = None) -> float:
    """E_x[T_1 | T_1 < T_0] (UP) or E_x[T_0 | T_0 < T_1] (DOWN).

    The h-transform ratios are folded into the integrands algebraically, so
    small x never produces 0/0: e.g. the upward-conditioned density at
    y >= x is 2*S(y)*(S(1)-S(y))/(S(1)*sigma^2(y)*S'(y)), independent of x.
    """
    _check_interior("x", x)
    if direction not in (Conditioning.UP, Conditioning.DOWN):
        raise ValueError("direction must be Conditioning.UP or DOWN")
    st = _scale_for(model, cfg, scale)
    s1 = st.scale_total
    wf = model.sigma2.is_wright_fisher

    # Shared x-free factor q(y) = 2*S(y)*(S(1)-S(y))/(S(1)*sigma^2*S'):
    # the y >= x branch under UP and the y <= x branch under DOWN.
    def q(y):
        sy = st.s(y)
        sp = st.s_prime(y)
        if wf:
            return 2.0 * (sy / y) * ((s1 - sy) / (1.0 - y)) / (s1 * sp)
        return 2.0 * sy * (s1 - sy) / (s1 * model.sigma2(y) * sp)

    sx = st.s(x)
    if direction is Conditioning.UP:
        def below_up(y):
            sy = st.s(y)
            sp = st.s_prime(y)
            if wf:
                return (2.0 * (s1 - sx) * (sy / y) * sy
                        / (s1 * sx * (1.0 - y) * sp))
            return (2.0 * (s1 - sx) * sy * sy
                    / (s1 * sx * model.sigma2(y) * sp))

        return (integrate(below_up, 0.0, x, cfg)
                + integrate(q, x, 1.0, cfg))

    def above_down(y):
        sy = st.s(y)
        sp = st.s_prime(y)
        if wf:
            return (2.0 * sx * ((s1 - sy) / (1.0 - y)) * (s1 - sy)
                    / (s1 * (s1 - sx) * y * sp))
        return (2.0 * sx * (s1 - sy) * (s1 - sy)
                / (s1 * (s1 - sx) * model.sigma2(y) * sp))

    return (integrate(q, 0.0, x, cfg)
            + integrate(above_down, x, 1.0, cfg))


def conditioned_time_at_zero(model: DiffusionModel,
                             direction: Conditioning = Conditioning.UP,
                             cfg: QuadConfig = DEFAULT_CONFIG,
                             scale: ScaleTable | None = None) -> float:
    """lim_{x->0+} E_x[T_1 | T_1 < T_0] by Richardson extrapolation.

    The upward-conditioned time is smooth in x at 0, so evaluating at
    x = 1e-5 and 1e-6 and extrapolating linearly leaves an O(x1*x2) error.
    Only the UP direction has a nontrivial limit (DOWN tends to 0).
    """
    if direction is not Conditioning.UP:
        raise ValueError("the 0+ limit is defined for Conditioning.UP only")
    st = _scale_for(model, cfg, scale)
    x1, x2 = 1e-5, 1e-6
    e1 = absorption_time_conditioned(model, x1, direction, cfg, st)
    e2 = absorption_time_conditioned(model, x2, direction, cfg, st)
    return (x1 * e2 - x2 * e1) / (x1 - x2)


def frequency_spectrum(model: DiffusionModel, x: float,
                       cfg: QuadConfig = DEFAULT_CONFIG,
                       scale: ScaleTable | None = None) -> float:
    """Expected density of independent mutant lineages at frequency x:

        f(x) = exp(2*alpha*Psi(x)) / sigma^2(x) * P_x(T_0 < T_1).
    """
    _check_interior("x", x)
    st = _scale_for(model, cfg, scale)
    p_down = (st.scale_total - st.s(x)) / st.scale_total
    weight = math.exp(2.0 * model.alpha * st.psi_cumulative(x))
    return weight * p_down / model.sigma2(x)


def conditioned_drift(model: DiffusionModel, x: float,
                      cfg: QuadConfig = DEFAULT_CONFIG,
                      scale: ScaleTable | None = None) -> float:
    """Drift of the diffusion conditioned to hit 1:

        mu*(x) = alpha*mu(x) + S'(x)/S(x) * sigma^2(x).
    """
    _check_interior("x", x)
    st = _scale_for(model, cfg, scale)
    return (model.alpha * model.mu(x)
            + st.s_prime(x) / st.s(x) * model.sigma2(x))


def hitting_summary(model: DiffusionModel, x: float,
                    cfg: QuadConfig = DEFAULT_CONFIG,
                    scale: ScaleTable | None = None) -> HittingSummary:
    """All hitting quantities at x in a single record."""
    st = _scale_for(model, cfg, scale)
    p = hit_prob_up(model, x, cfg, st)
    return HittingSummary(
        p_up=p,
        p_down=1.0 - p,
        e_t=absorption_time(model, x, cfg, st),
        e_t_up=absorption_time_conditioned(model, x, Conditioning.UP, cfg, st),
        e_t_down=absorption_time_conditioned(model, x, Conditioning.DOWN,
                                             cfg, st),
    )
