"""Exact truncated power series in t with exponents on the lattice (1/4)Z.

Exponents are stored as integers counting quarters.  A series carries its
precision ``prec``: every coefficient with exponent <= prec (in quarters) is
known exactly, nothing above it is.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

import mpmath

QUARTER = 4  # lattice units per power of t


def _clean(coeffs: dict[int, Fraction], prec: int) -> dict[int, Fraction]:
    return {e: Fraction(c) for e, c in coeffs.items() if c != 0 and e <= prec}


@dataclass(frozen=True)
class QSeries:
    """Sparse exact series: ``coeffs`` maps quarter-exponents to Fractions."""

    coeffs: dict
    prec: int

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _clean(dict(self.coeffs), self.prec))

    # construction -----------------------------------------------------------

    @classmethod
    def from_int_powers(cls, coeffs: dict[int, int], order: int) -> "QSeries":
        """Series with integer powers of t, known through t^order."""
        return cls({QUARTER * k: c for k, c in coeffs.items()}, QUARTER * order)

    @classmethod
    def monomial(cls, coeff, quarters: int) -> "QSeries":
        """Exact monomial c t^{quarters/4}; it has unbounded precision."""
        return Monomial(Fraction(coeff), quarters)

    # queries ----------------------------------------------------------------

    @property
    def valuation(self) -> int | None:
        return min(self.coeffs) if self.coeffs else None

    @property
    def order(self) -> Fraction:
        """Precision as a power of t."""
        return Fraction(self.prec, QUARTER)

    def __getitem__(self, quarters: int) -> Fraction:
        if quarters > self.prec:
            raise IndexError(f"exponent {quarters}/4 beyond precision {self.prec}/4")
        return self.coeffs.get(quarters, Fraction(0))

    def coefficient(self, power) -> Fraction:
        """Coefficient of t^power (power may be a Fraction with denominator 4)."""
        q = Fraction(power) * QUARTER
        if q.denominator != 1:
            raise ValueError(f"{power} is not on the quarter lattice")
        return self[int(q)]

    def int_coefficients(self) -> list[Fraction]:
        """[c_0, c_1, ..., c_order] for an integer-exponent series from t^0."""
        if any(e % QUARTER or e < 0 for e in self.coeffs):
            raise ValueError("series has fractional or negative exponents")
        return [self[QUARTER * k] for k in range(self.prec // QUARTER + 1)]

    def truncate(self, prec: int) -> "QSeries":
        return QSeries(self.coeffs, min(prec, self.prec))

    def evaluate(self, t: float) -> float:
        return float(sum(float(c) * t ** (e / QUARTER) for e, c in self.coeffs.items()))

    def items(self):
        return sorted(self.coeffs.items())

    # arithmetic ---------------------------------------------------------------

    def __neg__(self):
        return QSeries({e: -c for e, c in self.coeffs.items()}, self.prec)

    def __add__(self, other):
        if not isinstance(other, QSeries):
            other = Monomial(Fraction(other), 0)
        prec = min(self.prec, other.prec)
        out = dict(self.coeffs)
        for e, c in other.coeffs.items():
            out[e] = out.get(e, 0) + c
        return QSeries(out, prec)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def _product_prec(self, other) -> int:
        vs = self.valuation if self.coeffs else self.prec
        vo = other.valuation if other.coeffs else other.prec
        return min(self.prec + vo, other.prec + vs)

    def __mul__(self, other):
        if not isinstance(other, QSeries):
            other = Monomial(Fraction(other), 0)
        if isinstance(other, Monomial) and not isinstance(self, Monomial):
            return other * self
        prec = self._product_prec(other)
        out: dict[int, Fraction] = {}
        for e1, c1 in self.coeffs.items():
            for e2, c2 in other.coeffs.items():
                e = e1 + e2
                if e <= prec:
                    out[e] = out.get(e, 0) + c1 * c2
        return QSeries(out, prec)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            return Monomial(Fraction(1), 0) / (self ** -k)
        result = Monomial(Fraction(1), 0)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __truediv__(self, other):
        if not isinstance(other, QSeries):
            other = Monomial(Fraction(other), 0)
        if isinstance(other, Monomial):
            return self * other.inverse()
        return self * other.inverse()

    def inverse(self) -> "QSeries":
        """1/self.  Requires a nonzero constant term.

        Leading monomials must be factored out first (divide by a
        :class:`Monomial`); a series whose lowest term is not t^0 raises.
        """
        v = self.valuation
        if v is None or v != 0:
            raise ArithmeticError(
                f"series division needs a nonzero constant term (valuation {v})")
        c0 = self.coeffs[0]
        prec = self.prec
        tail = sorted((e, c) for e, c in self.coeffs.items() if e > 0)
        inv: dict[int, Fraction] = {0: 1 / c0}
        # inv_e = -(1/c0) sum_{e'>0} c_{e'} inv_{e-e'}; only lattice points reachable
        # from the tail's exponents can be nonzero
        step = 0
        for e, _ in tail:
            step = e if step == 0 else _gcd(step, e)
        if step == 0:
            return QSeries(inv, prec)
        for e in range(step, prec + 1, step):
            acc = Fraction(0)
            for e1, c1 in tail:
                if e1 > e:
                    break
                prev = inv.get(e - e1)
                if prev:
                    acc += c1 * prev
            if acc:
                inv[e] = -acc / c0
        return QSeries(inv, prec)


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


class Monomial(QSeries):
    """c t^{e/4}, exact to all orders."""

    def __init__(self, coeff: Fraction, quarters: int):
        if coeff == 0:
            raise ValueError("monomial coefficient must be nonzero")
        super().__init__({quarters: coeff}, float("inf"))

    @property
    def exponent(self) -> int:
        return next(iter(self.coeffs))

    @property
    def coeff(self) -> Fraction:
        return next(iter(self.coeffs.values()))

    def inverse(self) -> "Monomial":
        return Monomial(1 / self.coeff, -self.exponent)

    def __mul__(self, other):
        if not isinstance(other, QSeries):
            other = Monomial(Fraction(other), 0)
        if isinstance(other, Monomial):
            return Monomial(self.coeff * other.coeff, self.exponent + other.exponent)
        e0, c0 = self.exponent, self.coeff
        return QSeries({e + e0: c * c0 for e, c in other.coeffs.items()}, other.prec + e0)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Monomial):
            return self * other.inverse()
        return super().__truediv__(other)

    def __repr__(self):
        return f"Monomial({self.coeff}, {self.exponent}/4)"


def poincare_series(order: int) -> QSeries:
    """prod_{j>=1} (1 + t^{2j}) through t^order."""
    if order < 0:
        raise ValueError("order must be nonnegative")
    # the product has nonzero terms only at even powers; multiply factor by factor
    coeffs = [0] * (order + 1)
    coeffs[0] = 1
    for j in range(1, order // 2 + 1):
        d = 2 * j
        for e in range(order, d - 1, -1):
            coeffs[e] += coeffs[e - d]
    return QSeries.from_int_powers(dict(enumerate(coeffs)), order)


def theta_reduced(which: int, order: int) -> QSeries:
    """Integer-exponent part of a theta series through t^order.

    theta_3 = 1 + 2 sum t^{m^2}, theta_4 = 1 + 2 sum (-1)^m t^{m^2} are returned
    as is; for theta_2 this is sum_{m>=0} t^{m(m+1)}, i.e. theta_2 / (2 t^{1/4}).
    """
    if which not in (2, 3, 4):
        raise ValueError("which must be 2, 3 or 4")
    coeffs: dict[int, int] = {}
    if which == 2:
        m = 0
        while m * (m + 1) <= order:
            coeffs[m * (m + 1)] = 1
            m += 1
    else:
        coeffs[0] = 1
        m = 1
        while m * m <= order:
            coeffs[m * m] = 2 if which == 3 or m % 2 == 0 else -2
            m += 1
    return QSeries.from_int_powers(coeffs, order)


THETA2_PREFACTOR = Monomial(Fraction(2), 1)  # 2 t^{1/4}


def theta_series(which: int, order: int) -> QSeries:
    """Nome series of theta_which(0, t) through t^order (theta_2 carries t^{1/4})."""
    if order < 1:
        raise ValueError("order must be >= 1")
    red = theta_reduced(which, order)
    return THETA2_PREFACTOR * red if which == 2 else red


def identity_sides(order: int) -> tuple[QSeries, QSeries]:
    """(LHS, RHS) of prod (1+t^{2j})^24 = (1/(256 t^2)) (th2/th3)^8 (th3/th4)^4.

    The 2 t^{1/4} factor of theta_2 is split off before dividing, so every
    series division is by a series with constant term 1.
    """
    if order < 4:
        raise ValueError("order must be >= 4")
    lhs = poincare_series(order) ** 24
    # the integer-exponent factors need no extra headroom: their valuations are 0
    u = theta_reduced(2, order)
    th3 = theta_reduced(3, order)
    th4 = theta_reduced(4, order)
    prefactor = THETA2_PREFACTOR ** 8 / Monomial(Fraction(256), 2 * QUARTER)
    rhs = prefactor * (u / th3) ** 8 * (th3 / th4) ** 4
    return lhs, rhs


def verify_theta_identity(order: int) -> Fraction:
    """Max |LHS - RHS| over coefficients through t^order (0 when the identity holds)."""
    lhs, rhs = identity_sides(order)
    prec = min(lhs.prec, rhs.prec, QUARTER * order)
    exps = {e for e in lhs.coeffs if e <= prec} | {e for e in rhs.coeffs if e <= prec}
    return max((abs(lhs[e] - rhs[e]) for e in exps), default=Fraction(0))


def distinct_partition_count(k: int) -> int:
    """Number of partitions of k into distinct positive parts, by enumeration."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    if k == 0:
        return 1
    count = 0

    def walk(remaining: int, smallest: int) -> None:
        nonlocal count
        if remaining == 0:
            count += 1
            return
        for part in range(smallest, remaining + 1):
            rest = remaining - part
            # the next part must exceed this one
            if rest == 0 or rest > part:
                walk(rest, part + 1)

    walk(k, 1)
    return count


def distinct_partitions(k: int) -> list[tuple[int, ...]]:
    """All partitions of k into distinct parts, listed explicitly (small k only)."""
    parts = range(1, k + 1)
    return [c for r in range(k + 1) for c in combinations(parts, r) if sum(c) == k]


def closed_form_sides(t: float) -> tuple[float, float]:
    """Both sides of the theta identity evaluated in floating point at nome t.

    The product is taken until its factors stop changing the value; the theta
    functions come from mpmath.  Independent of the exact series code.
    """
    if not 0 < t < 1:
        raise ValueError("nome must lie in (0, 1)")
    with mpmath.workdps(30):
        t = mpmath.mpf(t)
        prod = mpmath.mpf(1)
        j = 1
        while True:
            term = t ** (2 * j)
            if term < mpmath.mpf(10) ** -32:
                break
            prod *= 1 + term
            j += 1
        lhs = prod ** 24
        th2, th3, th4 = (mpmath.jtheta(k, 0, t) for k in (2, 3, 4))
        rhs = (th2 / th3) ** 8 * (th3 / th4) ** 4 / (256 * t ** 2)
        return float(lhs), float(rhs)


def floating_check(t: float, order: int = 160) -> dict[str, float]:
    """Relative differences between numerically summed exact series and closed forms."""
    lhs, rhs = identity_sides(order)
    lhs_sum, rhs_sum = lhs.evaluate(t), rhs.evaluate(t)
    lhs_cf, rhs_cf = closed_form_sides(t)
    return {
        "series_lhs_vs_rhs": abs(lhs_sum - rhs_sum) / abs(rhs_sum),
        "series_lhs_vs_closed_rhs": abs(lhs_sum - rhs_cf) / abs(rhs_cf),
        "closed_lhs_vs_closed_rhs": abs(lhs_cf - rhs_cf) / abs(rhs_cf),
    }
