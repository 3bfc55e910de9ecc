"""
Truncated Laurent series in X^-1

A LaurentSeries is body * X^lo with a precision floor: coefficients at
exponents > floor are known, everything at or below floor is unknown. A floor
of NEG_INF means the series is an exact Laurent polynomial. With a finite
floor the body is always aligned so that lo == floor + 1.
"""

from dataclasses import dataclass
from typing import List, Sequence, Tuple, Union

from src.algebra.degree import NEG_INF, DegValue
from src.algebra.poly import Poly
from src.exceptions import PrecisionExhausted


@dataclass(frozen=True)
class LaurentSeries:
    body: Poly
    lo: int = 0
    floor: DegValue = NEG_INF

    def __post_init__(self):
        body, lo, floor = self.body, self.lo, self.floor
        if floor is not NEG_INF:
            target = floor + 1
            if lo < target:
                body = body >> (target - lo)
            elif lo > target:
                body = body << (lo - target)
            lo = target
        elif body.is_zero():
            lo = 0
        else:
            v = body.valuation
            if v:
                body = body >> v
                lo += v
        object.__setattr__(self, "body", body)
        object.__setattr__(self, "lo", lo)

    # ---- constructors ---------------------------------------------------------------------

    @classmethod
    def zero(cls, ring: type, floor: DegValue = NEG_INF) -> "LaurentSeries":
        return cls(ring.zero(), 0, floor)

    @classmethod
    def from_poly(cls, p: Poly, floor: DegValue = NEG_INF) -> "LaurentSeries":
        return cls(p, 0, floor)

    @classmethod
    def monomial(cls, ring: type, c: int, e: int, floor: DegValue = NEG_INF) -> "LaurentSeries":
        return cls(ring.monomial(c, 0), e, floor)

    @classmethod
    def from_terms(cls, ring: type, terms: Sequence[Tuple[int, int]], floor: DegValue = NEG_INF) -> "LaurentSeries":
        """Build from (coefficient, exponent) pairs; terms at or below a finite floor are dropped."""
        terms = [(c, e) for c, e in terms if floor is NEG_INF or e > floor]
        if not terms:
            return cls.zero(ring, floor)
        lo = min(e for _, e in terms)
        coeffs = [0] * (max(e for _, e in terms) - lo + 1)
        f = ring.field
        for c, e in terms:
            coeffs[e - lo] = f.add(coeffs[e - lo], c)
        return cls(ring.from_coeffs(coeffs), lo, floor)

    @classmethod
    def from_rational(cls, f: Poly, g: Poly, floor: DegValue) -> "LaurentSeries":
        """
        Expansion of f/g with every coefficient above floor exact

        Args:
            f: Numerator
            g: Nonzero denominator
            floor: Precision floor; NEG_INF only when g is a monomial
        """
        if g.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")
        if floor is NEG_INF:
            v = g.valuation
            if g.deg != v:
                raise PrecisionExhausted(f"{f}/{g} has no finite expansion; give a precision floor")
            inv = g.field.inv(g.lc)
            return cls(f.scale(inv), -v, NEG_INF)
        shift = -(floor + 1)
        if shift >= 0:
            a = (f << shift) // g
        else:
            a = f // (g << -shift)
        return cls(a, floor + 1, floor)

    # ---- queries --------------------------------------------------------------------------

    @property
    def ring(self) -> type:
        return type(self.body)

    @property
    def field(self):
        return self.body.field

    @property
    def is_exact(self) -> bool:
        return self.floor is NEG_INF

    @property
    def top(self) -> DegValue:
        """Highest known nonzero exponent, NEG_INF when every known coefficient is zero."""
        d = self.body.deg
        return NEG_INF if d is NEG_INF else self.lo + d

    @property
    def magnitude_bound(self) -> DegValue:
        """Upper bound on log|x| valid for every series matching the known coefficients."""
        top = self.top
        if top is NEG_INF:
            return self.floor
        return top

    def coefficient(self, e: int) -> int:
        if self.floor is not NEG_INF and e <= self.floor:
            raise PrecisionExhausted(f"coefficient of X^{e} lies at or below the floor {self.floor}",
                                     required_floor=e - 1)
        return self.body.coeff(e - self.lo)

    def terms(self) -> List[Tuple[int, int]]:
        """Known nonzero (coefficient, exponent) pairs, highest exponent first."""
        d = self.body.deg
        if d is NEG_INF:
            return []
        return [(self.body.coeff(i), self.lo + i) for i in range(d, -1, -1) if self.body.coeff(i)]

    # ---- arithmetic -----------------------------------------------------------------------

    def _aligned(self, other: "LaurentSeries"):
        if other.ring is not self.ring:
            raise TypeError("series over different fields")
        lo = min(self.lo, other.lo)
        return self.body << (self.lo - lo), other.body << (other.lo - lo), lo

    def __add__(self, other: "LaurentSeries") -> "LaurentSeries":
        a, b, lo = self._aligned(other)
        return LaurentSeries(a + b, lo, max(self.floor, other.floor))

    def __sub__(self, other: "LaurentSeries") -> "LaurentSeries":
        a, b, lo = self._aligned(other)
        return LaurentSeries(a - b, lo, max(self.floor, other.floor))

    def __neg__(self) -> "LaurentSeries":
        return LaurentSeries(-self.body, self.lo, self.floor)

    def shift(self, k: int) -> "LaurentSeries":
        """Multiply by X^k."""
        return LaurentSeries(self.body, self.lo + k, self.floor + k)

    def mul_poly(self, g: Poly) -> "LaurentSeries":
        if g.is_zero():
            return LaurentSeries.zero(self.ring)
        return LaurentSeries(self.body * g, self.lo, self.floor + g.deg)

    def __mul__(self, other: Union["LaurentSeries", Poly]) -> "LaurentSeries":
        if isinstance(other, Poly):
            return self.mul_poly(other)
        if other.ring is not self.ring:
            raise TypeError("series over different fields")
        floor = max(self.magnitude_bound + other.floor, other.magnitude_bound + self.floor)
        return LaurentSeries(self.body * other.body, self.lo + other.lo, floor)

    def truncate(self, floor: DegValue) -> "LaurentSeries":
        return LaurentSeries(self.body, self.lo, max(self.floor, floor))

    def polynomial_part(self) -> Poly:
        """Terms with exponent >= 0."""
        if self.floor is not NEG_INF and self.floor >= 0:
            raise PrecisionExhausted("polynomial part needs the constant coefficient", required_floor=-1)
        if self.lo >= 0:
            return self.body << self.lo
        return self.body >> -self.lo

    def fractional_part(self) -> "LaurentSeries":
        """Terms with exponent < 0, same floor."""
        if self.lo >= 0:
            return LaurentSeries.zero(self.ring, self.floor)
        return LaurentSeries(self.body.low(-self.lo), self.lo, self.floor)

    def __str__(self):
        from src.algebra.text import format_series
        return format_series(self)


@dataclass(frozen=True)
class LaurentVector:
    coords: Tuple[LaurentSeries, ...]

    def __post_init__(self):
        coords = tuple(self.coords)
        if not coords:
            raise ValueError("a LaurentVector needs at least one coordinate")
        ring = coords[0].ring
        if any(c.ring is not ring for c in coords):
            raise TypeError("coordinates over different fields")
        object.__setattr__(self, "coords", coords)

    @property
    def n(self) -> int:
        return len(self.coords)

    @property
    def ring(self) -> type:
        return self.coords[0].ring

    @property
    def field(self):
        return self.coords[0].field

    @property
    def floor(self) -> DegValue:
        return max(c.floor for c in self.coords)

    @property
    def is_exact(self) -> bool:
        return self.floor is NEG_INF

    def in_unit_ball(self) -> bool:
        """Membership in Z_O^n: every coordinate has |x_i| <= 1."""
        return all(c.magnitude_bound <= 0 for c in self.coords)

    def __getitem__(self, i: int) -> LaurentSeries:
        return self.coords[i]

    def __iter__(self):
        return iter(self.coords)

    def __len__(self):
        return len(self.coords)

    def __add__(self, other: "LaurentVector") -> "LaurentVector":
        return LaurentVector(tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other: "LaurentVector") -> "LaurentVector":
        return LaurentVector(tuple(a - b for a, b in zip(self.coords, other.coords)))

    def truncate(self, floor: DegValue) -> "LaurentVector":
        return LaurentVector(tuple(c.truncate(floor) for c in self.coords))

    def cleared(self) -> Tuple[int, List[Poly]]:
        """
        Common denominator X^P of the known truncation

        Returns:
            (P, [a_1, ..., a_n]) with x_i truncated = a_i / X^P, P >= 0
        """
        shift = max(0, max(-c.lo for c in self.coords))
        return shift, [c.body << (c.lo + shift) for c in self.coords]

    @classmethod
    def zero(cls, ring: type, n: int, floor: DegValue = NEG_INF) -> "LaurentVector":
        return cls(tuple(LaurentSeries.zero(ring, floor) for _ in range(n)))

    def __str__(self):
        from src.algebra.text import format_vector
        return format_vector(self)


def abs_deg(r) -> DegValue:
    """
    Exponent of the absolute value

    Args:
        r: A Poly, a LaurentSeries, or a rational function given as an (f, g) pair

    Returns:
        log_q|r|; NEG_INF for an exact zero
    """
    if isinstance(r, Poly):
        return r.deg
    if isinstance(r, tuple):
        f, g = r
        if g.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")
        if f.is_zero():
            return NEG_INF
        return f.deg - g.deg
    top = r.top
    if top is NEG_INF and not r.is_exact:
        raise PrecisionExhausted(f"series is zero down to its floor {r.floor}", required_floor=r.floor - 1)
    return top


def frac_dist(x: LaurentVector) -> DegValue:
    """Exponent of the distance from x to the nearest polynomial vector."""
    return max(abs_deg(c.fractional_part()) for c in x.coords)
