"""Exact polynomial arithmetic over rationals.

Polynomials are immutable, stored densely in the monomial basis with
``fractions.Fraction`` coefficients (index i holds the coefficient of x**i).
This is the backbone of every closed-form first-order result: products,
antiderivatives and the division by x(1-x) that removes the diffusion
denominator are all carried out without rounding.
"""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational

import numpy as np

__all__ = ["Poly"]


def _normalize(coeffs):
    cs = [Fraction(c) for c in coeffs]
    while cs and cs[-1] == 0:
        cs.pop()
    return tuple(cs)


class Poly:
    """A polynomial with exact rational coefficients, ascending order."""

    __slots__ = ("coeffs", "_float_coeffs")

    def __init__(self, coeffs=()):
        object.__setattr__(self, "coeffs", _normalize(coeffs))
        object.__setattr__(
            self, "_float_coeffs", np.array([float(c) for c in self.coeffs])
        )

    def __setattr__(self, name, value):
        raise AttributeError("Poly is immutable")

    # -- constructors ---------------------------------------------------
    @classmethod
    def x_pow(cls, k: int) -> "Poly":
        """x**k."""
        if k < 0:
            raise ValueError("exponent must be non-negative")
        return cls([0] * k + [1])

    @classmethod
    def one_minus_x_pow(cls, k: int) -> "Poly":
        """(1-x)**k, expanded via the binomial theorem."""
        if k < 0:
            raise ValueError("exponent must be non-negative")
        return cls([Fraction((-1) ** i * math.comb(k, i)) for i in range(k + 1)])

    # -- ring operations ------------------------------------------------
    def __add__(self, other: "Poly") -> "Poly":
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] += c
        return Poly(out)

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __neg__(self) -> "Poly":
        return Poly([-c for c in self.coeffs])

    def __mul__(self, other) -> "Poly":
        if isinstance(other, (int, Fraction, Rational)):
            return Poly([c * other for c in self.coeffs])
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1 or 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return Poly(out)

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, Poly) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        return f"Poly({list(self.coeffs)!r})"

    def __bool__(self):
        return bool(self.coeffs)

    @property
    def degree(self) -> int:
        """Degree, with the zero polynomial reported as -1."""
        return len(self.coeffs) - 1

    # -- calculus ---------------------------------------------------------
    def antiderivative(self) -> "Poly":
        """The primitive with zero constant term."""
        return Poly([0] + [c / (i + 1) for i, c in enumerate(self.coeffs)])

    def integral(self, a=0, b=1) -> Fraction:
        """Exact definite integral over [a, b]."""
        prim = self.antiderivative()
        return prim(Fraction(b)) - prim(Fraction(a))

    # -- evaluation -------------------------------------------------------
    def __call__(self, x):
        """Horner evaluation; exact when x is rational, float otherwise.

        Numpy arrays are evaluated vectorized in float arithmetic.
        """
        if isinstance(x, np.ndarray):
            return np.polynomial.polynomial.polyval(x, self._float_coeffs)
        if isinstance(x, (int, Fraction, Rational)):
            acc = Fraction(0)
            for c in reversed(self.coeffs):
                acc = acc * x + c
            return acc
        acc = 0.0
        for c in self._float_coeffs[::-1]:
            acc = acc * x + c
        return acc

    # -- division ---------------------------------------------------------
    def divmod(self, divisor: "Poly") -> tuple["Poly", "Poly"]:
        """Exact polynomial long division: self = q * divisor + r."""
        if not divisor:
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dcs = divisor.coeffs
        dn = len(dcs) - 1
        lead = dcs[-1]
        q = [Fraction(0)] * max(len(rem) - dn, 0)
        for i in range(len(rem) - 1, dn - 1, -1):
            factor = rem[i] / lead
            q[i - dn] = factor
            if factor:
                for j, d in enumerate(dcs):
                    rem[i - dn + j] -= factor * d
        return Poly(q), Poly(rem[:dn])

    def exact_div(self, divisor: "Poly") -> "Poly":
        """Division that must be exact; raises ValueError on nonzero remainder."""
        q, r = self.divmod(divisor)
        if r:
            raise ValueError("polynomial division left a nonzero remainder")
        return q
