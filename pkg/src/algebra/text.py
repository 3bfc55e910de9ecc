"""
Text grammar shared by every CLI input and output

  field   := "q=" INT [ "; modulus=" poly ]       e.g. "q=4; modulus=X^2+X+1"
  poly    := term { ("+"|"-") term } | "0"         e.g. "X^3+X+1", "2X^2-1"
  term    := [INT] "X" [ "^" INT ] | INT           coefficient = field element as an int in [0, q)
  series  := terms with any integer exponents, optionally followed by
             "(prec F)" (coefficients at exponents <= F unknown) or "(exact)"
  vector  := series { ";" series }
"""

import re
from typing import List, Tuple

from src.algebra.degree import NEG_INF
from src.algebra.field import FieldSpec
from src.algebra.laurent import LaurentSeries, LaurentVector
from src.algebra.poly import Poly, poly_ring

_TERM = re.compile(r"\s*([+-])?\s*(?:(\d+)\s*\*?\s*)?(X(?:\^\s*(-?\d+))?)?\s*")
_SUFFIX = re.compile(r"\(\s*(?:prec\s+(-?\d+)|(exact))\s*\)\s*$")


def _prime_power(q: int) -> Tuple[int, int]:
    for p in range(2, q + 1):
        if q % p == 0:
            b, rest = 0, q
            while rest % p == 0:
                rest //= p
                b += 1
            if rest != 1:
                raise ValueError(f"q={q} is not a prime power")
            return p, b
    raise ValueError(f"q={q} is not a prime power")


def _parse_terms(text: str, field: FieldSpec) -> List[Tuple[int, int]]:
    text = text.strip()
    if not text:
        raise ValueError("empty polynomial text")
    if text == "0":
        return []
    terms, pos = [], 0
    while pos < len(text):
        m = _TERM.match(text, pos)
        sign, coef, xpart, exp = m.groups()
        if m.end() == pos or (coef is None and xpart is None):
            raise ValueError(f"cannot parse term at '{text[pos:]}'")
        if pos > 0 and sign is None:
            raise ValueError(f"missing '+' or '-' before '{text[pos:]}'")
        c = int(coef) if coef is not None else 1
        if field.b == 1:
            c %= field.p
        else:
            field.check(c)
        if sign == "-":
            c = field.neg(c)
        e = (int(exp) if exp is not None else 1) if xpart else 0
        terms.append((c, e))
        pos = m.end()
    return terms


def _format_terms(terms: List[Tuple[int, int]]) -> str:
    if not terms:
        return "0"
    out = []
    for c, e in terms:
        if e == 0:
            out.append(str(c))
            continue
        head = "" if c == 1 else str(c)
        out.append(f"{head}X" if e == 1 else f"{head}X^{e}")
    return "+".join(out)


def parse_field(text: str) -> FieldSpec:
    """Parse 'q=4; modulus=X^2+X+1' (or 'p=3', 'q=5')."""
    items = {}
    for part in text.split(";"):
        if not part.strip():
            continue
        if "=" not in part:
            raise ValueError(f"expected key=value in field spec, got '{part.strip()}'")
        key, value = part.split("=", 1)
        items[key.strip().lower()] = value.strip()
    if "q" in items:
        p, b = _prime_power(int(items["q"]))
    elif "p" in items:
        p, b = int(items["p"]), int(items.get("b", 1))
    else:
        raise ValueError(f"field spec needs q= or p=: '{text}'")
    if b == 1:
        return FieldSpec(p=p)
    if "modulus" not in items:
        raise ValueError(f"F_{p ** b} needs a modulus")
    base = FieldSpec(p=p)
    coeffs = [0] * (b + 1)
    for c, e in _parse_terms(items["modulus"], base):
        if not 0 <= e <= b:
            raise ValueError(f"modulus term X^{e} out of range for degree {b}")
        coeffs[e] = base.add(coeffs[e], c)
    return FieldSpec(p=p, b=b, modulus=tuple(coeffs))


def format_field(field: FieldSpec) -> str:
    if field.b == 1:
        return f"q={field.q}"
    terms = [(c, e) for e, c in reversed(list(enumerate(field.modulus))) if c]
    return f"q={field.q}; modulus={_format_terms(terms)}"


def parse_poly(text: str, field: FieldSpec) -> Poly:
    ring = poly_ring(field)
    terms = _parse_terms(text, field)
    if any(e < 0 for _, e in terms):
        raise ValueError(f"negative exponent in polynomial '{text}'")
    if not terms:
        return ring.zero()
    coeffs = [0] * (max(e for _, e in terms) + 1)
    for c, e in terms:
        coeffs[e] = field.add(coeffs[e], c)
    return ring.from_coeffs(coeffs)


def format_poly(p: Poly) -> str:
    d = p.deg
    if d is NEG_INF:
        return "0"
    return _format_terms([(p.coeff(i), i) for i in range(d, -1, -1) if p.coeff(i)])


def parse_series(text: str, field: FieldSpec) -> LaurentSeries:
    ring = poly_ring(field)
    floor = NEG_INF
    m = _SUFFIX.search(text)
    if m:
        if m.group(1) is not None:
            floor = int(m.group(1))
        text = text[:m.start()]
    return LaurentSeries.from_terms(ring, _parse_terms(text, field), floor)


def format_series(x: LaurentSeries) -> str:
    body = _format_terms(x.terms())
    if x.floor is NEG_INF:
        return body
    return f"{body} (prec {x.floor})"


def parse_vector(text: str, field: FieldSpec) -> LaurentVector:
    return LaurentVector(tuple(parse_series(part, field) for part in text.split(";")))


def format_vector(x: LaurentVector) -> str:
    return "; ".join(format_series(c) for c in x.coords)
