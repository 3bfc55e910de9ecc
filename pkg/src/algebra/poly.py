"""
Polynomials over F_q

Generic polynomials are lists of field elements, low to high, with a nonzero
last entry; [] is the zero polynomial. Polynomials over F_2 use a packed int
(bit i is the coefficient of X^i), so addition is XOR and multiplication by a
monomial is a shift. Both share one interface; the ring type for a field comes
from poly_ring(), cached per FieldSpec.
"""

import functools
from typing import Iterable, List, Sequence, Tuple

from src.algebra.degree import NEG_INF, DegValue
from src.algebra.field import FieldSpec


class Poly:
    """Polynomial over a generic F_q, stored as a trimmed coefficient list."""

    __slots__ = ("value",)

    field: FieldSpec = None

    def __init__(self, value):
        self.value = value

    # ---- raw operations on internal values -------------------------------------------------

    @classmethod
    def _trim(cls, a: List[int]) -> List[int]:
        while a and not a[-1]:
            a.pop()
        return a

    @classmethod
    def _from_coeffs(cls, coeffs: Iterable[int]):
        f = cls.field
        return cls._trim([f.check(c % f.q if f.b == 1 else c) for c in coeffs])

    @classmethod
    def _to_coeffs(cls, a) -> List[int]:
        return list(a)

    @staticmethod
    def _deg(a) -> DegValue:
        return len(a) - 1 if a else NEG_INF

    @staticmethod
    def _coeff(a, i: int) -> int:
        return a[i] if 0 <= i < len(a) else 0

    @classmethod
    def _add(cls, a, b):
        f = cls.field
        if len(a) < len(b):
            a, b = b, a
        c = a[:]
        for i, b_i in enumerate(b):
            c[i] = f.add(c[i], b_i)
        return cls._trim(c)

    @classmethod
    def _neg(cls, a):
        f = cls.field
        return [f.neg(a_i) for a_i in a]

    @classmethod
    def _sub(cls, a, b):
        return cls._add(a, cls._neg(b))

    @classmethod
    def _scale(cls, a, c: int):
        if c == 0:
            return []
        f = cls.field
        return cls._trim([f.mul(a_i, c) for a_i in a])

    @classmethod
    def _mul(cls, a, b):
        if not a or not b:
            return []
        f = cls.field
        if len(a) > len(b):
            a, b = b, a
        c = [0] * (len(a) + len(b) - 1)
        for i, a_i in enumerate(a):
            if a_i:
                for j, b_j in enumerate(b):
                    if b_j:
                        c[i + j] = f.add(c[i + j], f.mul(a_i, b_j))
        return cls._trim(c)

    @staticmethod
    def _lshift(a, n: int):
        return [0] * n + a if a else []

    @staticmethod
    def _rshift(a, n: int):
        return a[n:]

    @staticmethod
    def _low(a, n: int):
        b = a[:max(n, 0)]
        while b and not b[-1]:
            b.pop()
        return b

    @classmethod
    def _divmod(cls, a, b):
        if not b:
            raise ZeroDivisionError("division by zero polynomial")
        f = cls.field
        m, n = len(a), len(b)
        if m < n:
            return [], a[:]
        b1 = f.inv(b[-1])
        q, r = [0] * (m - n + 1), a[:]
        for i in range(m - n, -1, -1):
            if len(r) >= i + n:
                q[i] = q_i = f.mul(r[-1], b1)
                for j in range(n):
                    r[i + j] = f.sub(r[i + j], f.mul(q_i, b[j]))
                cls._trim(r)
        return cls._trim(q), r

    @classmethod
    def _monic(cls, a):
        if not a or a[-1] == 1:
            return a
        return cls._scale(a, cls.field.inv(a[-1]))

    @staticmethod
    def _valuation(a) -> DegValue:
        for i, a_i in enumerate(a):
            if a_i:
                return i
        return NEG_INF

    @classmethod
    def _submul_shift(cls, a, b, c: int, k: int):
        # a - c * X^k * b
        if c == 0 or not b:
            return a
        f = cls.field
        size = max(len(a), len(b) + k)
        out = a + [0] * (size - len(a))
        for j, b_j in enumerate(b):
            if b_j:
                out[j + k] = f.sub(out[j + k], f.mul(c, b_j))
        return cls._trim(out)

    # ---- constructors -----------------------------------------------------------------------

    @classmethod
    def zero(cls):
        return cls(cls._from_coeffs([]))

    @classmethod
    def one(cls):
        return cls(cls._from_coeffs([1]))

    @classmethod
    def from_coeffs(cls, coeffs: Sequence[int]):
        """Build from coefficients listed low to high."""
        return cls(cls._from_coeffs(coeffs))

    @classmethod
    def constant(cls, c: int):
        return cls(cls._from_coeffs([c]))

    @classmethod
    def monomial(cls, c: int, e: int):
        if e < 0:
            raise ValueError(f"negative exponent {e} in a polynomial")
        return cls(cls._from_coeffs([0] * e + [c]))

    @classmethod
    def x(cls):
        return cls.monomial(1, 1)

    # ---- public interface -------------------------------------------------------------------

    @property
    def deg(self) -> DegValue:
        return self._deg(self.value)

    @property
    def lc(self) -> int:
        """Leading coefficient (0 for the zero polynomial)."""
        d = self.deg
        return 0 if d is NEG_INF else self._coeff(self.value, d)

    @property
    def valuation(self) -> DegValue:
        return self._valuation(self.value)

    def coeff(self, i: int) -> int:
        return self._coeff(self.value, i)

    def coeffs(self) -> List[int]:
        return self._to_coeffs(self.value)

    def is_zero(self) -> bool:
        return not self.value

    def __bool__(self):
        return bool(self.value)

    def _check(self, other):
        if type(other) is not type(self):
            raise TypeError(f"polynomial over F_{self.field.q} expected, got {other!r}")
        return other.value

    def __add__(self, other):
        return type(self)(self._add(self.value, self._check(other)))

    def __sub__(self, other):
        return type(self)(self._sub(self.value, self._check(other)))

    def __neg__(self):
        return type(self)(self._neg(self.value))

    def __mul__(self, other):
        if isinstance(other, int):
            return self.scale(other)
        return type(self)(self._mul(self.value, self._check(other)))

    __rmul__ = __mul__

    def scale(self, c: int):
        return type(self)(self._scale(self.value, self.field.check(c)))

    def __lshift__(self, n: int):
        if n < 0:
            return self >> -n
        return type(self)(self._lshift(self.value, n))

    def __rshift__(self, n: int):
        if n < 0:
            return self << -n
        return type(self)(self._rshift(self.value, n))

    def low(self, n: int):
        """Remainder modulo X^n."""
        return type(self)(self._low(self.value, n))

    def __divmod__(self, other):
        q, r = self._divmod(self.value, self._check(other))
        return type(self)(q), type(self)(r)

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    def monic(self):
        return type(self)(self._monic(self.value))

    def submul_shift(self, other, c: int, k: int):
        """Return self - c * X^k * other."""
        return type(self)(self._submul_shift(self.value, self._check(other), c, k))

    def __eq__(self, other):
        if not isinstance(other, Poly):
            return NotImplemented
        return self.field == other.field and self.value == other.value

    def __hash__(self):
        return hash((self.field.q, self.field.modulus, tuple(self.coeffs())))

    def __repr__(self):
        from src.algebra.text import format_poly
        return f"Poly({format_poly(self)})"

    def __str__(self):
        from src.algebra.text import format_poly
        return format_poly(self)

    def sort_key(self) -> Tuple:
        """Degree first, then coefficients from high to low."""
        d = self.deg
        if d is NEG_INF:
            return (-1,)
        return (d,) + tuple(self.coeff(i) for i in range(d, -1, -1))


class BinaryPoly(Poly):
    """Polynomial over F_2 packed into an int."""

    __slots__ = ()

    @classmethod
    def _from_coeffs(cls, coeffs: Iterable[int]):
        a = 0
        for i, c in enumerate(coeffs):
            if c % 2:
                a |= 1 << i
        return a

    @classmethod
    def _to_coeffs(cls, a) -> List[int]:
        return [(a >> i) & 1 for i in range(a.bit_length())]

    @staticmethod
    def _deg(a) -> DegValue:
        return a.bit_length() - 1 if a else NEG_INF

    @staticmethod
    def _coeff(a, i: int) -> int:
        return (a >> i) & 1 if i >= 0 else 0

    @staticmethod
    def _add(a, b):
        return a ^ b

    _sub = _add

    @staticmethod
    def _neg(a):
        return a

    @staticmethod
    def _scale(a, c: int):
        return a if c else 0

    @staticmethod
    def _mul(a, b):
        if a < b:
            a, b = b, a
        c = 0
        while b:
            if b & 1:
                c ^= a
            a <<= 1
            b >>= 1
        return c

    @staticmethod
    def _lshift(a, n: int):
        return a << n

    @staticmethod
    def _rshift(a, n: int):
        return a >> n

    @staticmethod
    def _low(a, n: int):
        return a & ((1 << n) - 1) if n > 0 else 0

    @staticmethod
    def _divmod(a, b):
        if b == 0:
            raise ZeroDivisionError("division by zero polynomial")
        m = a.bit_length()
        n = b.bit_length()
        if m < n:
            return 0, a
        b <<= m - n
        q = 1
        a ^= b
        for i in range(m - 2, n - 2, -1):
            b >>= 1
            q <<= 1
            if (a >> i) & 1:
                q ^= 1
                a ^= b
        return q, a

    @staticmethod
    def _monic(a):
        return a

    @staticmethod
    def _valuation(a) -> DegValue:
        return (a & -a).bit_length() - 1 if a else NEG_INF

    @staticmethod
    def _submul_shift(a, b, c: int, k: int):
        return a ^ (b << k) if c else a

    def __hash__(self):
        return hash((2, None, self.value))


@functools.cache
def poly_ring(field: FieldSpec) -> type:
    """Polynomial type for a field: packed for F_2, list-based otherwise."""
    base = BinaryPoly if field.is_binary else Poly
    return type(f"F{field.q}[X]", (base,), {"__slots__": (), "field": field})


def generic_ring(field: FieldSpec) -> type:
    """List-based ring even for F_2; used to cross-check the packed representation."""
    return _generic_ring(field)


@functools.cache
def _generic_ring(field: FieldSpec) -> type:
    return type(f"F{field.q}[X]/generic", (Poly,), {"__slots__": (), "field": field})


def poly_gcd(a: Poly, b: Poly) -> Poly:
    """Monic gcd by Euclid's algorithm; gcd(0, 0) is 0."""
    while b:
        a, b = b, a % b
    return a.monic()


def poly_arith(op: str, a: Poly, b: Poly):
    """
    Ring operations on two polynomials over the same field

    Args:
        op: One of 'add', 'sub', 'mul', 'divmod', 'gcd'
        a: Left operand
        b: Right operand (nonzero for divmod)

    Returns:
        A Poly, or a (quotient, remainder) pair for divmod
    """
    if type(a) is not type(b):
        raise TypeError("operands live in different polynomial rings")
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "divmod":
        return divmod(a, b)
    if op == "gcd":
        return poly_gcd(a, b)
    raise ValueError(f"unknown polynomial operation '{op}'")
