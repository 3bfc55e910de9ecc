"""
Rational points v = f/g of F_q(X)^n and their distance to x
"""

from dataclasses import dataclass
from typing import Sequence, Tuple

from src.algebra.degree import NEG_INF, DegValue
from src.algebra.laurent import LaurentSeries, LaurentVector
from src.algebra.poly import Poly
from src.exceptions import PrecisionExhausted


@dataclass(frozen=True)
class RationalPoint:
    """
    v = (f_1/g, ..., f_n/g) with g monic

    The pair is kept as given (not reduced by a common gcd): the height H(v)
    = max(deg g, deg f_i) is the height of this representative.
    """

    g: Poly
    f: Tuple[Poly, ...]

    def __post_init__(self):
        if self.g.is_zero():
            raise ValueError("denominator of a rational point must be nonzero")
        f = tuple(self.f)
        if not f:
            raise ValueError("rational point needs at least one coordinate")
        if self.g.lc != 1:
            inv = self.g.field.inv(self.g.lc)
            object.__setattr__(self, "g", self.g.scale(inv))
            f = tuple(e.scale(inv) for e in f)
        object.__setattr__(self, "f", f)

    @classmethod
    def from_vector(cls, vector: Sequence[Poly]) -> "RationalPoint":
        """From a lattice coefficient vector (g, f_1, ..., f_n) with g != 0."""
        return cls(vector[0], tuple(vector[1:]))

    @property
    def n(self) -> int:
        return len(self.f)

    @property
    def height(self) -> int:
        return max([self.g.deg] + [e.deg for e in self.f if e])

    def as_vector(self) -> Tuple[Poly, ...]:
        return (self.g,) + self.f

    def expansion(self, floor: DegValue) -> LaurentVector:
        return LaurentVector(tuple(LaurentSeries.from_rational(e, self.g, floor) for e in self.f))

    def to_dict(self) -> dict:
        return {"g": str(self.g), "f": [str(e) for e in self.f], "height": self.height}


def dist(x: LaurentVector, v: RationalPoint) -> DegValue:
    """
    Exponent of |x - v| = max_i log|g x_i - f_i| - deg g

    Raises:
        PrecisionExhausted: the truncation of x cannot decide the distance
    """
    if x.n != v.n:
        raise ValueError(f"point has {x.n} coordinates, rational point has {v.n}")
    known, bounds = [], []
    for x_i, f_i in zip(x.coords, v.f):
        residual = x_i.mul_poly(v.g) - LaurentSeries.from_poly(f_i)
        top = residual.top
        if top is NEG_INF and not residual.is_exact:
            bounds.append(residual.floor)
        else:
            known.append(top)
    best = max(known) if known else NEG_INF
    if bounds and max(bounds) > best:
        raise PrecisionExhausted(
            f"distance to {v.to_dict()} lies below the precision of x",
            required_floor=x.floor - 1 - (max(bounds) - best if best is not NEG_INF else 0),
        )
    return best - v.g.deg
