"""Adaptive one-dimensional quadrature with endpoint-singularity handling.

The core rule is a 15-point Kronrod extension of 7-point Gauss, driven by a
worst-panel-first subdivision loop.  Every integral is first split at its
midpoint and each half is mapped onto [0, 1] with the outer (possibly
singular) endpoint at 0, where floating-point resolution is effectively
unlimited.  Integrable endpoint singularities of the form y**(-p) or
(1-y)**(-p) with p < 1 are then handled in two stages: adaptive refinement
alone resolves mild singularities, and when the error estimate concentrates
and stalls in the panels touching 0, the half is restarted under the
quadratic stretching t -> t**2, which weakens the singularity exponent;
repeated stretching makes any p < 1 integrand bounded eventually.  A stall
that survives the stretch budget is reported as `Divergence` -- that is what
happens for a genuine 1/y endpoint, whose panel errors never shrink under
either refinement or stretching.

Integrands must accept numpy arrays (all 15 nodes of a panel are evaluated in
one call).  Nodes are always interior, so integrands are never evaluated at
panel endpoints.

`cumulative` builds a table of the running integral over [0, 1] with cubic
Hermite interpolation between nodes; since the integrand itself supplies the
exact derivative at every node, interpolation error is O(h^4) and node
insertion proceeds until mid-panel checks pass the tolerance.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .errors import Divergence, NonConvergence

__all__ = ["QuadConfig", "QuadResult", "CumulativeTable", "integrate",
           "integrate_with_error", "cumulative", "DEFAULT_CONFIG"]


@dataclass(frozen=True)
class QuadConfig:
    """Tolerances and budgets shared by every numerical routine."""

    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_subdivisions: int = 2000
    endpoint_shave: float = 1e-12

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")
        if self.abs_tol < 0:
            raise ValueError("abs_tol must be non-negative")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be at least 1")
        if not 0 < self.endpoint_shave < 1e-3:
            raise ValueError("endpoint_shave must lie in (0, 1e-3)")

    def tightened(self, factor: float = 10.0) -> "QuadConfig":
        """Config for inner integrals of nested quadratures."""
        return QuadConfig(self.rel_tol / factor, self.abs_tol / factor,
                          self.max_subdivisions, self.endpoint_shave)


DEFAULT_CONFIG = QuadConfig()

# 15-point Kronrod nodes with the embedded 7-point Gauss weights.
# Columns: node on [-1, 1], Gauss weight (0 for Kronrod-only nodes),
# Kronrod weight.
_GK15 = (
    (+0.9914553711208126, 0.0,                0.02293532201052922),
    (-0.9914553711208126, 0.0,                0.02293532201052922),
    (+0.9491079123427585, 0.1294849661688697, 0.06309209262997855),
    (-0.9491079123427585, 0.1294849661688697, 0.06309209262997855),
    (+0.8648644233597691, 0.0,                0.10479001032225018),
    (-0.8648644233597691, 0.0,                0.10479001032225018),
    (+0.7415311855993944, 0.2797053914892767, 0.14065325971552592),
    (-0.7415311855993944, 0.2797053914892767, 0.14065325971552592),
    (+0.5860872354676911, 0.0,                0.16900472663926790),
    (-0.5860872354676911, 0.0,                0.16900472663926790),
    (+0.4058451513773972, 0.3818300505051189, 0.19035057806478541),
    (-0.4058451513773972, 0.3818300505051189, 0.19035057806478541),
    (+0.2077849550078985, 0.0,                0.20443294007529889),
    (-0.2077849550078985, 0.0,                0.20443294007529889),
    (0.0,                 0.4179591836734694, 0.20948214108472783),
)

_NODES = np.array([row[0] for row in _GK15])
_WG = np.array([row[1] for row in _GK15])
_WK = np.array([row[2] for row in _GK15])

_EPS = np.finfo(float).eps

# Endpoint policy, applied at the origin of each normalized half-interval.
# A split of the origin-touching panel whose origin-side child keeps at least
# _STALL_RATIO of the parent's error counts as a stall; _STALL_LIMIT
# consecutive stalls, or an origin panel narrower than _STRETCH_WIDTH that
# still holds a substantial share of the error budget, trigger a quadratic
# stretch.  Each stretch turns y**(-p) into y**(-(2p-1)) behaviour, so any
# p < 1 becomes bounded within the stretch budget, while p >= 1 keeps
# stalling and is reported as Divergence.
_STALL_RATIO = 0.98
_STALL_LIMIT = 30
_STRETCH_WIDTH = 1e-8
_MAX_STRETCHES = 8


class QuadResult:
    """Value plus achieved error estimate of one integration."""

    __slots__ = ("value", "error", "subdivisions")

    def __init__(self, value, error, subdivisions):
        self.value = value
        self.error = error
        self.subdivisions = subdivisions

    def __float__(self):
        return float(self.value)

    def __repr__(self):
        return (f"QuadResult(value={self.value!r}, error={self.error!r}, "
                f"subdivisions={self.subdivisions})")


def _gk15_panel(f, a, b):
    """Apply the Gauss-Kronrod pair on [a, b]; returns (K15, err)."""
    hw = 0.5 * (b - a)
    center = 0.5 * (a + b)
    fx = np.asarray(f(center + hw * _NODES), dtype=float)
    resk = hw * float(_WK @ fx)
    resg = hw * float(_WG @ fx)
    if not math.isfinite(resk):
        raise Divergence(
            f"integrand evaluated non-finite inside [{a!r}, {b!r}]")
    resabs = hw * float(_WK @ np.abs(fx))
    mean = resk / (b - a)
    resasc = hw * float(_WK @ np.abs(fx - mean))
    err = abs(resk - resg)
    if resasc != 0.0 and err != 0.0:
        err = resasc * min(1.0, (200.0 * err / resasc) ** 1.5)
    floor = 50.0 * _EPS * resabs
    if floor > 0.0:
        err = max(err, floor)
    return resk, err, floor


class _OriginStall(Exception):
    """Internal signal: error refuses to shrink at the origin."""


def _adaptive(f, cfg):
    """Worst-first subdivision on [0, 1]; raises _OriginStall or errors."""
    val, err, _ = _gk15_panel(f, 0.0, 1.0)
    # heap entries: (-err, seq, lo, hi, val, err)
    seq = 0
    heap = [(-err, seq, 0.0, 1.0, val, err)]
    total, toterr = val, err
    stall_count = 0
    splits = 0
    while True:
        tol = max(cfg.abs_tol, cfg.rel_tol * abs(total))
        if toterr <= tol:
            return total, toterr, splits
        if splits >= cfg.max_subdivisions:
            raise NonConvergence(
                f"subdivision budget {cfg.max_subdivisions} exhausted; "
                f"error estimate {toterr:.3e} > tolerance {tol:.3e}")
        neg, _, lo, hi, pval, perr = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            # interval at floating-point resolution; cannot refine further
            raise NonConvergence(
                f"panel [{lo!r}, {hi!r}] not refinable at machine precision")
        lval, lerr, lfloor = _gk15_panel(f, lo, mid)
        rval, rerr, rfloor = _gk15_panel(f, mid, hi)
        splits += 1
        total += lval + rval - pval
        toterr += lerr + rerr - perr
        if lo == 0.0 and lerr > 100.0 * lfloor:
            if mid < _STRETCH_WIDTH and lerr > 0.25 * tol:
                raise _OriginStall
            if lerr > _STALL_RATIO * perr:
                stall_count += 1
                if stall_count >= _STALL_LIMIT:
                    raise _OriginStall
            else:
                stall_count = 0
        seq += 1
        heapq.heappush(heap, (-lerr, seq, lo, mid, lval, lerr))
        seq += 1
        heapq.heappush(heap, (-rerr, seq, mid, hi, rval, rerr))


def _integrate_half(f, lo, hi, reflect, cfg, endpoint_label):
    """Integrate one half-interval with its outer endpoint mapped to 0.

    Mapped abscissae are clamped strictly inside (lo, hi): deep stretching
    can underflow the parameter so far that the unclamped coordinate would
    round onto the endpoint itself.  Where the clamp is active the stretch
    Jacobian has already made the integrand negligible, so the clamp costs
    nothing for integrable singularities while keeping f's arguments finite.
    """
    width = hi - lo
    if reflect:
        # Outer endpoint is hi; nearest representable interior point.
        inner = np.nextafter(hi, lo)

        def g(t):
            y = np.minimum(hi - width * t, inner)
            return f(y) * width
    else:
        # Outer endpoint is lo.  For lo == 0 the subnormal range is usable
        # in principle, but f(y) = y**-p overflows there for p near 1, so
        # floor the coordinate at a scale that keeps p < 1 finite.
        inner = np.nextafter(lo, hi) if lo != 0.0 else 1e-300 * width

        def g(t):
            y = np.maximum(lo + width * t, inner)
            return f(y) * width

    stretches = 0
    while True:
        try:
            return _adaptive(g, cfg)
        except _OriginStall:
            stretches += 1
            if stretches > _MAX_STRETCHES:
                raise Divergence(
                    "integral appears divergent at the endpoint "
                    f"y = {endpoint_label!r}") from None
            g_inner = g

            def g(t, _g=g_inner):
                return _g(t * t) * (2.0 * t)


def integrate_with_error(f: Callable, a: float, b: float,
                         cfg: QuadConfig = DEFAULT_CONFIG) -> QuadResult:
    """Integrate f over [a, b] returning value and achieved error estimate.

    f must map a numpy array of abscissae to an array of values.  Raises
    `NonConvergence` when the subdivision budget runs out and `Divergence`
    when endpoint refinement stalls beyond the stretch budget (the signature
    of a non-integrable endpoint).
    """
    if not a < b:
        raise ValueError(f"integration bounds must satisfy a < b, got "
                         f"[{a!r}, {b!r}]")
    mid = 0.5 * (a + b)
    if not a < mid < b:
        # interval of a few ulps; one panel is all float resolution allows
        val, err, _ = _gk15_panel(lambda y: np.asarray(f(y), dtype=float),
                                  a, b)
        return QuadResult(val, err, 0)
    half_cfg = QuadConfig(0.5 * cfg.rel_tol, 0.5 * cfg.abs_tol,
                          cfg.max_subdivisions, cfg.endpoint_shave)
    lv, le, ls = _integrate_half(f, a, mid, False, half_cfg, a)
    rv, re, rs = _integrate_half(f, mid, b, True, half_cfg, b)
    return QuadResult(lv + rv, le + re, ls + rs)


def integrate(f: Callable, a: float, b: float,
              cfg: QuadConfig = DEFAULT_CONFIG) -> float:
    """Integral of f over [a, b] to within max(abs_tol, rel_tol*|I|)."""
    return integrate_with_error(f, a, b, cfg).value


@dataclass(frozen=True)
class CumulativeTable:
    """Running integral T(y) = int_0^y f on an adaptive node set.

    Exact at its own nodes by construction (values are sums of panel
    integrals); between nodes a cubic Hermite interpolant is used, with the
    integrand itself providing the derivatives.
    """

    nodes: np.ndarray
    values: np.ndarray
    _spline: CubicHermiteSpline = field(repr=False, compare=False)

    def __post_init__(self):
        if self.nodes[0] != 0.0 or self.nodes[-1] != 1.0:
            raise ValueError("nodes must span [0, 1]")
        if not np.all(np.diff(self.nodes) > 0):
            raise ValueError("nodes must be strictly increasing")
        if self.values[0] != 0.0:
            raise ValueError("values[0] must be exactly 0")

    @classmethod
    def from_data(cls, nodes, values, derivatives) -> "CumulativeTable":
        nodes = np.asarray(nodes, dtype=float)
        values = np.asarray(values, dtype=float)
        spline = CubicHermiteSpline(nodes, values,
                                    np.asarray(derivatives, dtype=float))
        return cls(nodes, values, spline)

    @property
    def total(self) -> float:
        """T(1), the integral over the whole unit interval."""
        return float(self.values[-1])

    def __call__(self, y):
        y = np.clip(y, 0.0, 1.0)
        out = self._spline(y)
        if np.ndim(out) == 0:
            return float(out)
        return out


def cumulative(f: Callable, cfg: QuadConfig = DEFAULT_CONFIG,
               initial_nodes: int = 9) -> CumulativeTable:
    """Tabulate int_0^y f(z) dz for y in [0, 1].

    The integrand must be finite at the table nodes (it supplies the Hermite
    derivatives); integrable endpoint blow-ups belong in `integrate`, not
    here.  Nodes are inserted at panel midpoints until the interpolant
    reproduces directly-computed midpoint values within tolerance.
    """
    inner = cfg.tightened()
    nodes = list(np.linspace(0.0, 1.0, initial_nodes))
    value_at = {0.0: 0.0}
    for lo, hi in zip(nodes[:-1], nodes[1:]):
        value_at[hi] = value_at[lo] + integrate(f, lo, hi, inner)

    pending = list(zip(nodes[:-1], nodes[1:]))
    while pending:
        if len(value_at) > cfg.max_subdivisions:
            raise NonConvergence(
                f"cumulative table exceeded {cfg.max_subdivisions} nodes")
        nodes_arr = np.array(sorted(value_at))
        vals_arr = np.array([value_at[n] for n in nodes_arr])
        derivs = np.asarray(f(nodes_arr), dtype=float)
        if not np.all(np.isfinite(derivs)):
            raise Divergence("integrand must be finite at table nodes")
        spline = CubicHermiteSpline(nodes_arr, vals_arr, derivs)
        vscale = float(np.max(np.abs(vals_arr)))
        tol = max(cfg.abs_tol, cfg.rel_tol * max(vscale, 1e-300))
        next_pending = []
        for lo, hi in pending:
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                continue
            direct = value_at[lo] + integrate(f, lo, mid, inner)
            if abs(float(spline(mid)) - direct) > tol:
                value_at[mid] = direct
                next_pending.append((lo, mid))
                next_pending.append((mid, hi))
        pending = next_pending

    nodes_arr = np.array(sorted(value_at))
    vals_arr = np.array([value_at[n] for n in nodes_arr])
    derivs = np.asarray(f(nodes_arr), dtype=float)
    return CumulativeTable.from_data(nodes_arr, vals_arr, derivs)
