"""
Finite field F_q, q = p^b

Elements are ints in [0, q). For b = 1 they are residues mod p. For b > 1 the
base-p digits of an element are the coefficients (low to high) of its
representative modulo the irreducible modulus; multiplication goes through
log/antilog tables built once per field.
"""

import functools
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

logger = logging.getLogger(__name__)


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p % 2 == 0:
        return p == 2
    d = 3
    while d * d <= p:
        if p % d == 0:
            return False
        d += 2
    return True


def _poly_mod_p(a: List[int], m: List[int], p: int) -> List[int]:
    # remainder of a modulo monic m, lists low to high
    a = a[:]
    n = len(m) - 1
    for i in range(len(a) - 1, n - 1, -1):
        c = a[i] % p
        if c:
            for j in range(n + 1):
                a[i - n + j] = (a[i - n + j] - c * m[j]) % p
    a = [c % p for c in a[:n]]
    return a + [0] * (n - len(a))


def _mul_mod_p(a: List[int], b: List[int], m: List[int], p: int) -> List[int]:
    c = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                c[i + j] += ai * bj
    return _poly_mod_p(c, m, p)


def _is_irreducible_mod_p(m: List[int], p: int) -> bool:
    """Rabin-style check by trial division against all monic polynomials of degree <= b/2."""
    b = len(m) - 1
    if b <= 0:
        return False
    for d in range(1, b // 2 + 1):
        for index in range(p ** d):
            divisor = [(index // p ** i) % p for i in range(d)] + [1]
            rem = m[:]
            for i in range(len(rem) - 1, d - 1, -1):
                c = rem[i] % p
                if c:
                    for j in range(d + 1):
                        rem[i - d + j] = (rem[i - d + j] - c * divisor[j]) % p
            if not any(c % p for c in rem[:d]):
                return False
    return True


@dataclass(frozen=True)
class FieldSpec:
    """
    Field description with element arithmetic

    Args:
        p: Prime characteristic
        b: Extension degree
        modulus: Coefficients (low to high) of a monic irreducible of degree b over F_p, None when b = 1
    """

    p: int
    b: int = 1
    modulus: Optional[Tuple[int, ...]] = None
    _tables: Dict = field(default=None, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        if not _is_prime(self.p):
            raise ValueError(f"characteristic {self.p} is not prime")
        if self.b < 1:
            raise ValueError(f"extension degree must be >= 1, got {self.b}")
        if self.b == 1:
            if self.modulus is not None and len(self.modulus) != 2:
                raise ValueError("prime fields take no modulus")
            object.__setattr__(self, "modulus", None)
            return
        if self.modulus is None or len(self.modulus) != self.b + 1:
            raise ValueError(f"F_{self.q} needs an irreducible modulus of degree {self.b}")
        modulus = tuple(c % self.p for c in self.modulus)
        if modulus[-1] != 1:
            raise ValueError("modulus must be monic")
        if not _is_irreducible_mod_p(list(modulus), self.p):
            raise ValueError(f"modulus {modulus} is reducible over F_{self.p}")
        object.__setattr__(self, "modulus", modulus)
        object.__setattr__(self, "_tables", self._build_tables())
        logger.debug(f"Built arithmetic tables for F_{self.q}")

    @classmethod
    def prime(cls, p: int) -> "FieldSpec":
        return cls(p=p)

    @classmethod
    def parse(cls, text: str) -> "FieldSpec":
        """FieldSpec from "q=4; modulus=X^2+X+1"."""
        from src.algebra.text import parse_field
        return parse_field(text)

    @property
    def q(self) -> int:
        return self.p ** self.b

    @property
    def is_binary(self) -> bool:
        return self.p == 2 and self.b == 1

    def _digits(self, a: int) -> List[int]:
        return [(a // self.p ** i) % self.p for i in range(self.b)]

    def _from_digits(self, digits: List[int]) -> int:
        return sum((d % self.p) * self.p ** i for i, d in enumerate(digits))

    def _build_tables(self) -> Dict:
        q, p, m = self.q, self.p, list(self.modulus)
        add = [[self._from_digits([x + y for x, y in zip(self._digits(a), self._digits(c))])
                for c in range(q)] for a in range(q)]
        # find a primitive element by brute force
        for g in range(2 if q > 2 else 1, q):
            exp = [0] * (q - 1)
            log = [None] * q
            cur = [1] + [0] * (self.b - 1)
            ok = True
            for k in range(q - 1):
                value = self._from_digits(cur)
                if log[value] is not None:
                    ok = False
                    break
                exp[k] = value
                log[value] = k
                cur = _mul_mod_p(cur, self._digits(g), m, p)
            if ok:
                return {"add": add, "exp": exp, "log": log}
        raise ValueError(f"no primitive element found for F_{q}")  # unreachable for irreducible moduli

    def check(self, a: int) -> int:
        if not 0 <= a < self.q:
            raise ValueError(f"{a} is not an element of F_{self.q}")
        return a

    def add(self, a: int, c: int) -> int:
        if self.b == 1:
            return (a + c) % self.p
        return self._tables["add"][a][c]

    def neg(self, a: int) -> int:
        if self.b == 1:
            return (-a) % self.p
        return self._from_digits([-d for d in self._digits(a)])

    def sub(self, a: int, c: int) -> int:
        return self.add(a, self.neg(c))

    def mul(self, a: int, c: int) -> int:
        if self.b == 1:
            return (a * c) % self.p
        if a == 0 or c == 0:
            return 0
        t = self._tables
        return t["exp"][(t["log"][a] + t["log"][c]) % (self.q - 1)]

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError(f"0 has no inverse in F_{self.q}")
        if self.b == 1:
            return pow(a, self.p - 2, self.p)
        t = self._tables
        return t["exp"][(-t["log"][a]) % (self.q - 1)]

    def div(self, a: int, c: int) -> int:
        return self.mul(a, self.inv(c))

    def pow(self, a: int, e: int) -> int:
        if e < 0:
            return self.pow(self.inv(a), -e)
        if a == 0:
            return 1 if e == 0 else 0
        if self.b == 1:
            return pow(a, e, self.p)
        t = self._tables
        return t["exp"][(t["log"][a] * e) % (self.q - 1)]

    def successor(self, a: int) -> int:
        """Deterministic 'next' element, a different field element than a."""
        return (a + 1) % self.q

    def elements(self) -> range:
        return range(self.q)

    def describe(self) -> str:
        from src.algebra.text import format_field
        return format_field(self)


@functools.cache
def prime_field(p: int) -> FieldSpec:
    return FieldSpec(p=p)


F2 = prime_field(2)
