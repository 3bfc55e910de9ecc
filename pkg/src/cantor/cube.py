"""
Cubes of Z_O^n

A level-l cube fixes, in every coordinate, the coefficients at exponents
0, -1, ..., -(w-1) with w = (n+1)Ml. It is stored as a LaurentVector whose
floor is the side exponent -w, so the cube is exactly the set of points that
agree with it above the floor.
"""

import itertools
from dataclasses import dataclass
from typing import List

from src.algebra.degree import NEG_INF
from src.algebra.laurent import LaurentSeries, LaurentVector
from src.algebra.poly import BinaryPoly, Poly
from src.exceptions import PrecisionExhausted


def _digits(value: int, q: int, k: int) -> List[int]:
    out = []
    for _ in range(k):
        value, d = divmod(value, q)
        out.append(d)
    return out


def _poly_int(p: Poly, q: int) -> int:
    """Coefficients read as base-q digits, X^0 least significant."""
    if isinstance(p, BinaryPoly):
        return p.value
    out = 0
    for c in reversed(p.coeffs()):
        out = out * q + c
    return out


def _prefix_int(series: LaurentSeries, q: int) -> int:
    return _poly_int(series.body, q)


@dataclass(frozen=True)
class Cube:
    level: int
    M: int
    point: LaurentVector

    def __post_init__(self):
        if self.point.floor != self.side:
            raise ValueError(f"level-{self.level} cube needs floor {self.side}, got {self.point.floor}")

    @classmethod
    def root(cls, ring: type, n: int, M: int) -> "Cube":
        """K_0 = Z_O^n."""
        return cls(0, M, LaurentVector.zero(ring, n, floor=0))

    @classmethod
    def containing(cls, y: LaurentVector, level: int, M: int) -> "Cube":
        side = -(y.n + 1) * M * level
        if y.floor > side:
            raise PrecisionExhausted(f"point known down to {y.floor} cannot fix a level-{level} cube",
                                     required_floor=side)
        if not y.in_unit_ball():
            raise ValueError("point lies outside Z_O^n")
        return cls(level, M, y.truncate(side))

    @property
    def n(self) -> int:
        return self.point.n

    @property
    def digits_per_level(self) -> int:
        return (self.n + 1) * self.M

    @property
    def side(self) -> int:
        """log_q of the side length: -(n+1)Ml."""
        return -(self.point.n + 1) * self.M * self.level

    @property
    def q(self) -> int:
        return self.point.field.q

    def center(self) -> LaurentVector:
        """The exact point of the cube with every coefficient below the prefix zero."""
        return LaurentVector(tuple(LaurentSeries(c.body, c.lo) for c in self.point.coords))

    def as_vector(self) -> LaurentVector:
        return self.point

    def contains(self, x: LaurentVector) -> bool:
        if x.n != self.n:
            return False
        if x.floor > self.side:
            raise PrecisionExhausted(f"point known down to {x.floor} cannot be placed in a cube of side {self.side}",
                                     required_floor=self.side)
        if not x.in_unit_ball():
            return False
        for a, b in zip(x.coords, self.point.coords):
            if (a.truncate(self.side) - b).top is not NEG_INF:
                return False
        return True

    def key(self) -> str:
        """Level and hex-encoded prefix per coordinate."""
        q = self.q
        return f"{self.level}:" + ",".join(format(_prefix_int(c, q), "x") for c in self.point.coords)

    def digit_key(self) -> str:
        """Hex-encoded digits this cube fixes beyond its parent, per coordinate."""
        q, k = self.q, self.digits_per_level
        return ",".join(format(_poly_int(c.body.low(k), q), "x") for c in self.point.coords)

    def children(self) -> List["Cube"]:
        """
        The N^n subcubes of the next level in coefficient-lexicographic order

        Coordinate 1 is most significant; within a coordinate the highest
        exponent is most significant.
        """
        ring = self.point.ring
        q, k = self.q, self.digits_per_level
        side = self.side - k
        per_coordinate = []
        for c in self.point.coords:
            shifted = c.body << k
            per_coordinate.append([
                LaurentSeries(shifted + ring.from_coeffs(_digits(v, q, k)), side + 1, side)
                for v in range(q ** k)
            ])
        return [
            Cube(self.level + 1, self.M, LaurentVector(coords))
            for coords in itertools.product(*per_coordinate)
        ]


def subdivide(c: Cube) -> List[Cube]:
    return c.children()
