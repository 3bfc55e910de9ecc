"""
Best-approximation tables and the exact-approximability verdict

For n = 1 the table comes from the continued fraction of the truncation; for
n >= 2 it is enumerated over monic denominators (small degrees), and the
verdict is decided by a reduction sweep over the heights instead.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from src.algebra.degree import NEG_INF, DegValue, format_degree
from src.algebra.field import FieldSpec, prime_field
from src.algebra.laurent import LaurentSeries, LaurentVector
from src.algebra.poly import Poly, poly_ring
from src.dynamics.flow import flow_lattice
from src.dynamics.rational import RationalPoint, dist
from src.exceptions import BudgetExceeded, PrecisionExhausted
from src.lattice.shifted import ReductionSession
from src.template.psi import PsiFunction

logger = logging.getLogger(__name__)

DEFAULT_BUDGET = 1 << 16
METHODS = ("auto", "table", "sweep")
BUILTINS = ("zero", "xstar", "random")


@dataclass(frozen=True)
class ApproxEntry:
    """
    Best distance exponent over monic denominators of degree d

    When `certified` is False the distance is only an upper bound, valid for
    every point matching the truncation.
    """

    d: int
    distance: DegValue
    certified: bool
    g: Optional[Poly] = None
    f: Tuple[Poly, ...] = ()

    def to_row(self) -> Dict:
        return {
            "d": self.d,
            "min_dist_exponent": format_degree(self.distance),
            "certified": self.certified,
            "g": "" if self.g is None else str(self.g),
            "f": ";".join(str(e) for e in self.f),
        }


@dataclass
class BestApproxTable:
    n: int
    d_max: int
    method: str
    entries: List[ApproxEntry] = field(default_factory=list)

    def entry(self, d: int) -> ApproxEntry:
        return self.entries[d]

    def rows(self) -> List[Dict]:
        return [e.to_row() for e in self.entries]


def _continued_fraction_table(x: LaurentVector, d_max: int, strict: bool) -> BestApproxTable:
    """Convergents p_k/q_k of the truncation; entry(d) = -(D_k + D_{k+1}) for D_k <= d < D_{k+1}."""
    ring = x.ring
    floor = x.floor
    P, (a,) = x.cleared()
    num, den = a, ring.one() << P
    quotient, rest = divmod(num, den)
    p_prev, p = ring.one(), quotient
    q_prev, q = ring.zero(), ring.one()
    convergents = [(p, q)]
    num, den = den, rest
    while not den.is_zero():
        quotient, rest = divmod(num, den)
        p_prev, p = p, quotient * p + p_prev
        q_prev, q = q, quotient * q + q_prev
        convergents.append((p, q))
        num, den = den, rest
    degrees = [c[1].deg for c in convergents]

    table = BestApproxTable(n=1, d_max=d_max, method="continued_fraction")
    k = 0
    for d in range(d_max + 1):
        while k + 1 < len(degrees) and degrees[k + 1] <= d:
            k += 1
        p_k, q_k = convergents[k]
        g = (q_k << (d - degrees[k])).monic()
        f = (p_k << (d - degrees[k])).scale(g.field.inv((q_k << (d - degrees[k])).lc))
        if k + 1 < len(degrees):
            value = -(degrees[k] + degrees[k + 1])
            if floor is NEG_INF or degrees[k] + degrees[k + 1] < -floor:
                table.entries.append(ApproxEntry(d, value, True, g, (f,)))
                continue
            required = value - 1
        elif floor is NEG_INF:
            table.entries.append(ApproxEntry(d, NEG_INF, True, g, (f,)))
            continue
        else:
            required = floor - d - 1
        if strict:
            raise PrecisionExhausted(f"best approximation at degree {d} needs coefficients below {floor}",
                                     required_floor=required)
        table.entries.append(ApproxEntry(d, floor, False, g, (f,)))
    return table


def _monic_of_degree(ring: type, d: int):
    q = ring.field.q
    for v in range(q ** d):
        coeffs = []
        for _ in range(d):
            v, c = divmod(v, q)
            coeffs.append(c)
        yield ring.from_coeffs(coeffs + [1])


def _enumerated_table(x: LaurentVector, d_max: int, strict: bool, budget: int) -> BestApproxTable:
    ring = x.ring
    q = ring.field.q
    requested = sum(q ** d for d in range(d_max + 1))
    if requested > budget:
        raise BudgetExceeded(f"{requested} denominators up to degree {d_max} exceed the budget {budget}",
                             budget=budget, requested=requested)
    table = BestApproxTable(n=x.n, d_max=d_max, method="enumeration")
    for d in range(d_max + 1):
        best: Optional[ApproxEntry] = None
        for g in _monic_of_degree(ring, d):
            fs, tops, certain = [], [], True
            for c in x.coords:
                product = c.mul_poly(g)
                fs.append(product.polynomial_part())
                rest = product.fractional_part()
                top = rest.top
                if top is NEG_INF and not rest.is_exact:
                    top, certain = rest.floor, False
                tops.append(top)
            value = max(tops) - d if max(tops) is not NEG_INF else NEG_INF
            candidate = ApproxEntry(d, value, certain, g, tuple(fs))
            if best is None or value < best.distance or (value == best.distance and certain and not best.certified):
                best = candidate
        if not best.certified:
            if strict:
                raise PrecisionExhausted(f"best approximation at degree {d} needs coefficients below {x.floor}",
                                         required_floor=best.distance - 1)
        table.entries.append(best)
    return table


def best_approx_table(
    x: LaurentVector, d_max: int, budget: int = DEFAULT_BUDGET, strict: bool = True, method: str = "auto",
) -> BestApproxTable:
    """
    Minimal distance exponent min_{deg g = d} max_i log|x_i - f_i/g| for d <= d_max

    Args:
        x: Point of Z_O^n
        d_max: Largest denominator degree
        budget: Denominators enumerated at most (n >= 2)
        strict: Raise instead of returning upper bounds for undecidable entries
        method: 'auto' (continued fractions for n = 1), or 'table' to force enumeration

    Raises:
        PrecisionExhausted: strict and an entry depends on coefficients below the floor
        BudgetExceeded: enumeration too large
    """
    if d_max < 0:
        raise ValueError("d_max must be >= 0")
    if not x.in_unit_ball():
        raise ValueError("point lies outside Z_O^n")
    if x.n == 1 and method != "table":
        return _continued_fraction_table(x, d_max, strict)
    return _enumerated_table(x, d_max, strict, budget)


@dataclass
class MembershipVerdict:
    holds: bool
    method: str
    h0: int
    d_max: int
    min_equalities: int
    equality_heights: List[int] = field(default_factory=list)
    violations: List[Tuple[int, DegValue]] = field(default_factory=list)
    tightest: List[Tuple[int, DegValue, int]] = field(default_factory=list)

    @property
    def clause_approximation(self) -> bool:
        return len(self.equality_heights) >= self.min_equalities

    @property
    def clause_lower_bound(self) -> bool:
        return not self.violations

    def summary(self) -> str:
        if self.holds:
            return f"equalities at heights {self.equality_heights}, no violation in [{self.h0}, {self.d_max}]"
        parts = []
        if not self.clause_lower_bound:
            d, value = self.violations[0]
            parts.append(f"distance {format_degree(value)} below psi_hat at height {d}")
        if not self.clause_approximation:
            parts.append(f"{len(self.equality_heights)} equalities, {self.min_equalities} required")
        return "; ".join(parts)

    def to_dict(self) -> Dict:
        return {
            "holds": self.holds,
            "method": self.method,
            "h0": self.h0,
            "d_max": self.d_max,
            "min_equalities": self.min_equalities,
            "clause_approximation": self.clause_approximation,
            "clause_lower_bound": self.clause_lower_bound,
            "equality_heights": self.equality_heights,
            "violations": [{"d": d, "distance": format_degree(v)} for d, v in self.violations],
            "tightest": [{"d": d, "distance": format_degree(v), "slack": s} for d, v, s in self.tightest],
        }


def default_d_max(x: LaurentVector, psi: PsiFunction) -> int:
    """Largest height whose psi_hat stays above the precision floor."""
    if x.floor is NEG_INF:
        raise ValueError("exact points need an explicit d_max")
    d = 0
    while psi.psi_hat(d + 1) > x.floor:
        d += 1
    return d


def _from_table(table: BestApproxTable, psi: PsiFunction, h0: int, min_equalities: int) -> MembershipVerdict:
    verdict = MembershipVerdict(False, table.method, h0, table.d_max, min_equalities)
    slacks = []
    for entry in table.entries:
        target = psi.psi_hat(entry.d)
        if entry.distance is NEG_INF or entry.distance < target:
            if entry.d >= h0:
                verdict.violations.append((entry.d, entry.distance))
            continue
        if not entry.certified:
            raise PrecisionExhausted(f"entry at degree {entry.d} is undecided against psi_hat = {target}",
                                     required_floor=target - 1)
        if entry.d < h0:
            continue
        if entry.distance == target:
            verdict.equality_heights.append(entry.d)
        slacks.append((entry.d, entry.distance, entry.distance - target))
    verdict.tightest = sorted(slacks, key=lambda item: (item[2], item[0]))[:5]
    return verdict


def _sweep(x: LaurentVector, psi: PsiFunction, h0: int, d_max: int, min_equalities: int) -> MembershipVerdict:
    """
    Decide both clauses by reducing u_x F_q[X]^{n+1} with height-dependent shifts

    At height h the shifts (-h, -(h + psi_hat(h) - e), ...) make a row with
    shifted degree rho <= 0 a vector with deg g <= h and
    log|g x - f| <= h + psi_hat(h) - e. Multiplying by X^-rho gives one of
    height deg g - rho. e = 1 finds sub-psi_hat points, e = 0 the equality candidates.
    """
    n = x.n
    verdict = MembershipVerdict(False, "sweep", h0, d_max, min_equalities)
    session = ReductionSession(flow_lattice(x, 0))
    seen = set()
    for h in range(h0, d_max + 1):
        target = psi.psi_hat(h)
        if x.floor is not NEG_INF and target <= x.floor:
            raise PrecisionExhausted(f"height {h} needs coefficients below {x.floor}", required_floor=target - 1)
        for e in (1, 0):
            session.set_shifts([-h] + [-(h + target - e)] * n)
            for i in range(session.dim):
                rho = session.info[i][0]
                g = session.trans[i][0]
                if rho > 0 or g.is_zero() or g.deg - rho < h0:
                    continue
                height = g.deg - rho
                if e == 1:
                    verdict.violations.append((height, h + target - 1 - height))
                    continue
                v = RationalPoint.from_vector([p << -rho for p in session.trans[i]])
                if v.height in seen:
                    continue
                distance = dist(x, v)
                if distance == psi.psi_hat(v.height):
                    seen.add(v.height)
                    verdict.equality_heights.append(v.height)
        if verdict.violations:
            break
    verdict.equality_heights.sort()
    return verdict


def verify_exact_membership(
    x: LaurentVector,
    psi: PsiFunction,
    d_max: Optional[int] = None,
    h0: int = 1,
    min_equalities: int = 1,
    method: str = "auto",
    budget: int = DEFAULT_BUDGET,
) -> MembershipVerdict:
    """
    Exact(psi) on a finite height range

    Clause 1: at least `min_equalities` heights d <= d_max with best distance
    exactly psi_hat(d). Clause 2: no height d in [h0, d_max] with best
    distance below psi_hat(d).

    Args:
        x: Point of Z_O^n
        psi: Approximation function
        d_max: Largest height, by default the last one the truncation decides
        h0: First height of the lower-bound clause
        min_equalities: Equality heights required
        method: 'auto', 'table' or 'sweep'
        budget: Enumeration budget for 'table' with n >= 2
    """
    if method not in METHODS:
        raise ValueError(f"unknown method '{method}' (expected one of {', '.join(METHODS)})")
    if psi.n != x.n:
        raise ValueError(f"psi is for n={psi.n}, point has n={x.n}")
    d_max = default_d_max(x, psi) if d_max is None else d_max
    if method == "sweep" or (method == "auto" and x.n >= 2):
        verdict = _sweep(x, psi, h0, d_max, min_equalities)
    else:
        table = best_approx_table(x, d_max, budget=budget, strict=False, method=method)
        verdict = _from_table(table, psi, h0, min_equalities)
    verdict.holds = verdict.clause_approximation and verdict.clause_lower_bound
    logger.info(f"Exact membership on heights <= {d_max}: {'pass' if verdict.holds else 'fail'} ({verdict.summary()})")
    return verdict


def builtin_point(
    name: str, n: int = 1, floor: DegValue = NEG_INF, field_spec: Optional[FieldSpec] = None, seed: int = 0,
) -> LaurentVector:
    """
    Named points: 'zero', 'xstar' (root of x^2 + Xx + 1 over F_2) and 'random'

    'xstar' and 'random' need a finite floor.
    """
    field_ = field_spec or prime_field(2)
    ring = poly_ring(field_)
    if name == "zero":
        return LaurentVector.zero(ring, n, floor)
    if floor is NEG_INF:
        raise ValueError(f"builtin '{name}' needs a finite precision floor")
    if name == "xstar":
        if n != 1 or field_.q != 2:
            raise ValueError("xstar is defined for n=1 over F_2")
        terms, k = [], 1
        while -(2 ** k - 1) > floor:
            terms.append((1, -(2 ** k - 1)))
            k += 1
        return LaurentVector((LaurentSeries.from_terms(ring, terms, floor),))
    if name == "random":
        rng = np.random.default_rng(seed)
        width = -floor
        coords = []
        for _ in range(n):
            digits = rng.integers(0, field_.q, size=width).tolist()
            coords.append(LaurentSeries.from_terms(ring, [(int(c), -i) for i, c in enumerate(digits)], floor))
        return LaurentVector(tuple(coords))
    raise ValueError(f"unknown builtin '{name}' (expected one of {', '.join(BUILTINS)})")
