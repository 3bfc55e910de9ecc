"""
Degree values

Absolute values in F_q((X^-1)) are stored by their exponent: log_q|a| is an
integer for nonzero elements and NEG_INF for zero. Rational exponents (r_psi,
t_k^x, ...) are plain fractions.Fraction values.
"""

import math
from fractions import Fraction
from typing import Iterable, Union


class _NegInf:
    """Exponent of the zero element. Absorbs addition, sorts below every number."""

    __slots__ = ()
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "NEG_INF"

    def __str__(self):
        return "-inf"

    def __reduce__(self):
        return (_NegInf, ())

    def __hash__(self):
        return hash("NEG_INF")

    def __eq__(self, other):
        return other is self

    def __ne__(self, other):
        return other is not self

    def __lt__(self, other):
        return other is not self

    def __le__(self, other):
        return True

    def __gt__(self, other):
        return False

    def __ge__(self, other):
        return other is self

    def __add__(self, other):
        return self

    __radd__ = __add__

    def __sub__(self, other):
        if other is self:
            raise ValueError("NEG_INF - NEG_INF is undefined")
        return self

    def __rsub__(self, other):
        raise ValueError("cannot subtract NEG_INF from a finite degree")

    def __neg__(self):
        raise ValueError("NEG_INF has no negation in the degree domain")


NEG_INF = _NegInf()

DegValue = Union[int, _NegInf]
DegValueQ = Union[int, Fraction, _NegInf]


def is_neg_inf(value) -> bool:
    return value is NEG_INF


def vec_norm(values: Iterable[DegValueQ]) -> DegValueQ:
    """
    Norm of a vector given by the exponents of its entries

    Args:
        values: Exponents log_q|v_i|, NEG_INF for zero entries

    Returns:
        The largest exponent (the sup norm in log domain)
    """
    values = list(values)
    if not values:
        raise ValueError("vec_norm needs a nonempty vector")
    best = values[0]
    for value in values[1:]:
        if value > best:
            best = value
    return best


def floor_q(value: DegValueQ) -> DegValue:
    """Largest integer exponent not above value."""
    if value is NEG_INF:
        return NEG_INF
    return math.floor(value)


def ceil_q(value: DegValueQ) -> DegValue:
    """Smallest integer exponent not below value."""
    if value is NEG_INF:
        return NEG_INF
    return math.ceil(value)


def as_fraction(value) -> Fraction:
    """Parse an int, Fraction or 'num/den' string into a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ValueError(f"not a rational value: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        try:
            return Fraction(text)
        except (ValueError, ZeroDivisionError) as e:
            raise ValueError(f"not a rational value: {value!r}") from e
    raise ValueError(f"not a rational value: {value!r}")


def format_degree(value: DegValueQ) -> str:
    """Text form used in CSV and JSON outputs: '-inf', '7', '-10/3'."""
    if value is NEG_INF:
        return "-inf"
    if isinstance(value, Fraction):
        if value.denominator == 1:
            return str(value.numerator)
        return f"{value.numerator}/{value.denominator}"
    return str(value)


def parse_degree(text: str) -> DegValueQ:
    text = text.strip()
    if text in ("-inf", "NEG_INF"):
        return NEG_INF
    value = as_fraction(text)
    return value.numerator if value.denominator == 1 else value
