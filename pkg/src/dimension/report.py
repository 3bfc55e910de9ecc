"""
Dimension statistics of a Cantor tree

alpha_l = log(b_1 ... b_l) / (l log N) from the branching counts, the
theoretical lower bound for given N and R3, and box-counting slopes.
Logarithms are base q; ratios that are not rational are carried as text
with an approximate float next to them.
"""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.algebra.degree import NEG_INF
from src.algebra.laurent import LaurentVector
from src.cantor.construction import CantorTree
from src.template.schedule import epoch_checkpoints, fraction_text

logger = logging.getLogger(__name__)

TRIM = 2


def _int_root(value: int, e: int) -> Optional[int]:
    lo, hi = 0, 1 << (value.bit_length() // e + 1)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if mid ** e <= value:
            lo = mid
        else:
            hi = mid
    return lo if lo ** e == value else None


def _int_log(value: int, base: int) -> Optional[int]:
    """k with base^k == value, None when value is not a power of base."""
    if value < 1 or base < 2:
        return None
    k = 0
    while value % base == 0:
        value //= base
        k += 1
    return k if value == 1 else None


def _primitive_base(value: int) -> int:
    """Smallest r with value = r^e."""
    for e in range(value.bit_length(), 1, -1):
        root = _int_root(value, e)
        if root is not None and root > 1:
            return root
    return value


@dataclass(frozen=True)
class LogRatio:
    """
    factor * log(numerator) / log(denominator)

    `exact` is set when the ratio of logarithms is rational.
    """

    numerator: int
    denominator: int
    factor: Fraction = Fraction(1)
    base: int = 0

    @property
    def exact(self) -> Optional[Fraction]:
        if self.numerator == 1:
            return Fraction(0)
        base = self.base or _primitive_base(self.denominator)
        top, bottom = _int_log(self.numerator, base), _int_log(self.denominator, base)
        if top is None or not bottom:
            return None
        return self.factor * Fraction(top, bottom)

    @property
    def approx(self) -> float:
        return float(self.factor) * math.log(self.numerator) / math.log(self.denominator)

    def text(self) -> str:
        exact = self.exact
        if exact is not None:
            return fraction_text(exact)
        scale = "" if self.factor == 1 else f" * {fraction_text(self.factor)}"
        return f"log({self.numerator})/log({self.denominator}){scale}"

    def to_dict(self) -> Dict:
        return {"value": self.text(), "approx": round(self.approx, 12)}


@dataclass(frozen=True)
class AlphaValue:
    level: int
    product: int
    ratio: LogRatio
    label: str = ""

    def to_dict(self) -> Dict:
        out = {"level": self.level, "alpha": self.ratio.text(), "alpha_approx": round(self.ratio.approx, 12)}
        if self.label:
            out["checkpoint"] = self.label
        return out


def mass_alpha(source: Union[CantorTree, Sequence[int]], N: Optional[int] = None) -> List[AlphaValue]:
    """
    alpha_l = log(b_1 ... b_l) / log(N^l) for l = 1..L

    Args:
        source: A tree or its branching counts b_1..b_L
        N: Subdivisions per coordinate and level (taken from the tree when omitted)
    """
    if isinstance(source, CantorTree):
        counts, N = source.counts(), source.schedule.N
    else:
        counts = list(source)
        if N is None:
            raise ValueError("N is required with bare counts")
    if N < 2:
        raise ValueError("N must be >= 2")
    alphas, product, base = [], 1, _primitive_base(N)
    for level, b in enumerate(counts, start=1):
        if b < 1:
            raise ValueError(f"b_{level} = {b} must be >= 1")
        product *= b
        alphas.append(AlphaValue(level, product, LogRatio(product, N ** level, base=base)))
    return alphas


def checkpoint_alphas(tree: CantorTree) -> List[AlphaValue]:
    """alpha at every l_k^- and l_k^+ reached by the tree, labelled."""
    alphas = mass_alpha(tree)
    out = []
    for k, (l_minus, l_plus) in enumerate(epoch_checkpoints(tree.schedule), start=1):
        for level, tag in ((l_minus, "minus"), (l_plus, "plus")):
            if 1 <= level <= len(alphas):
                a = alphas[level - 1]
                out.append(AlphaValue(a.level, a.product, a.ratio, f"l_{k}^{tag}"))
    return out


def branching_threshold(N: int, R3: int, n: int) -> Tuple[int, int]:
    """
    floor and ceil of N^n - R3 N^{n - 1/(n+1)}, computed exactly

    b <= N^n - R3 N^{n-1/(n+1)} iff (N^n - b)^{n+1} >= R3^{n+1} N^{n(n+1)-1} for b <= N^n.
    """
    if R3 < 0:
        raise ValueError("R3 must be >= 0")
    top = N ** n
    if R3 == 0:
        return top, top
    rhs = R3 ** (n + 1) * N ** (n * (n + 1) - 1)
    lo, hi = -1, top
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if (top - mid) ** (n + 1) >= rhs:
            lo = mid
        else:
            hi = mid
    floor_value = lo
    exact = (top - floor_value) ** (n + 1) == rhs
    return floor_value, floor_value if exact else floor_value + 1


def theoretical_lower_bound(N: int, R3: int, n: int, lam) -> LogRatio:
    """
    log floor(N^n - R3 N^{n-1/(n+1)}) / log N * (n+1)/(n lam)

    Raises:
        ValueError: N^n <= R3 N^{n-1/(n+1)} (equivalently N <= R3^{n+1}) or the floor is below 1
    """
    lam = Fraction(lam)
    if N <= R3 ** (n + 1):
        raise ValueError(f"N={N} must exceed R3^(n+1)={R3 ** (n + 1)}")
    B, _ = branching_threshold(N, R3, n)
    if B < 1:
        raise ValueError(f"floor(N^n - R3 N^(n-1/(n+1))) = {B} leaves no branching")
    return LogRatio(B, N, Fraction(n + 1) / (n * lam))


@dataclass(frozen=True)
class BoxEstimate:
    scales: Tuple[int, ...]
    log_counts: Tuple[float, ...]
    window: Tuple[int, int]
    slope: float
    intercept: float
    residual: float

    def to_dict(self) -> Dict:
        return {
            "window": list(self.window),
            "slope_approx": round(self.slope, 12),
            "intercept_approx": round(self.intercept, 12),
            "residual_approx": round(self.residual, 12),
        }

    def rows(self) -> List[Dict]:
        return [{"m": m, "log_q_count": round(c, 12)} for m, c in zip(self.scales, self.log_counts)]


def fit_box_counts(scales: Sequence[int], log_counts: Sequence[float], trim: int = TRIM) -> BoxEstimate:
    """Least-squares slope of log_q(count) against m without the `trim` coarsest and finest scales."""
    if len(scales) != len(log_counts):
        raise ValueError("one count per scale is required")
    if len(scales) < 2 * trim + 2:
        raise ValueError(f"{len(scales)} scales leave fewer than 2 after trimming {trim} at each end")
    m = np.asarray(scales[trim:len(scales) - trim], dtype=float)
    y = np.asarray(log_counts[trim:len(log_counts) - trim], dtype=float)
    (slope, intercept), residuals, *_ = np.polyfit(m, y, 1, full=True)
    residual = float(residuals[0]) if len(residuals) else 0.0
    return BoxEstimate(
        scales=tuple(scales),
        log_counts=tuple(float(c) for c in log_counts),
        window=(int(m[0]), int(m[-1])),
        slope=float(slope),
        intercept=float(intercept),
        residual=residual,
    )


def box_dimension(points: Sequence[LaurentVector], scales: Optional[Sequence[int]] = None, trim: int = TRIM) -> BoxEstimate:
    """
    Box-counting slope of a finite point set of Z_O^n

    A ball of radius q^-m is fixed by the coefficients at exponents 0..-(m-1)
    of every coordinate, so the occupied balls are the distinct prefixes.
    Two points share the ball at scale m iff they agree on at least m leading
    digits; the metric is ultrametric, so the number of balls at scale m is
    P minus the edges of weight >= m in a maximum spanning tree over the
    pairwise agreements.

    Raises:
        ValueError: fewer than q^2 points, or scales below the common precision
    """
    if not points:
        raise ValueError("no points")
    q = points[0].field.q
    if len(points) < q * q:
        raise ValueError(f"{len(points)} points, at least q^2 = {q * q} needed")
    deepest = min(-p.floor for p in points if not p.is_exact) if any(not p.is_exact for p in points) else None
    if scales is None:
        if deepest is None:
            raise ValueError("exact points need explicit scales")
        scales = list(range(0, deepest + 1))
    if deepest is not None and max(scales) > deepest:
        raise ValueError(f"scale {max(scales)} below the common precision {deepest}")
    scales = list(scales)
    merges = np.sort(np.asarray(_spanning_agreements(points, max(scales)), dtype=np.int64))
    merged = len(merges) - np.searchsorted(merges, np.asarray(scales, dtype=np.int64), side="left")
    log_counts = (np.log(len(points) - merged) / math.log(q)).tolist()
    return fit_box_counts(scales, log_counts, trim)


def _agreement(a: LaurentVector, b: LaurentVector, limit: int) -> int:
    """Leading digits (exponents 0, -1, ...) shared by every coordinate, capped at limit."""
    depth = limit
    for x, y in zip(a.coords, b.coords):
        top = (x - y).top
        if top is not NEG_INF:
            depth = min(depth, -top)
    return depth


def _spanning_agreements(points: Sequence[LaurentVector], limit: int) -> List[int]:
    """Edge weights of a maximum spanning tree of the complete agreement graph (Kruskal)."""
    edges = sorted(
        ((_agreement(points[i], points[j], limit), i, j) for i in range(len(points)) for j in range(i + 1, len(points))),
        reverse=True,
    )
    parent = list(range(len(points)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    weights = []
    for weight, i, j in edges:
        a, b = find(i), find(j)
        if a != b:
            parent[a] = b
            weights.append(weight)
    return weights


def level_box_counts(tree: CantorTree) -> Tuple[List[int], List[float]]:
    """
    Occupied level-l cubes of the regularized tree at scale m = (n+1)Ml

    The count is b_1 ... b_l, so log_q count = sum_j log_q b_j.
    """
    schedule = tree.schedule
    q, step = schedule.q, (schedule.n + 1) * schedule.M
    scales, log_counts, total = [0], [0.0], 0.0
    for level, b in enumerate(tree.counts(), start=1):
        total += math.log(b, q)
        scales.append(step * level)
        log_counts.append(total)
    return scales, log_counts


@dataclass(frozen=True)
class BranchingCheck:
    level: int
    min_included: int
    threshold: int
    holds: bool

    def to_dict(self) -> Dict:
        return {"level": self.level, "min_included": self.min_included, "threshold": self.threshold, "holds": self.holds}


def branching_checks(tree: CantorTree) -> List[BranchingCheck]:
    """Every Case-1 level's included counts against N^n - R3 N^{n-1/(n+1)}."""
    schedule = tree.schedule
    _, threshold = branching_threshold(schedule.N, schedule.constants.R3, schedule.n)
    return [
        BranchingCheck(r.level, min(r.included), threshold, min(r.included) >= threshold)
        for r in tree.case1_levels()
    ]


@dataclass
class DimensionReport:
    counts: List[int]
    alphas: List[AlphaValue]
    checkpoints: List[AlphaValue]
    bound: Optional[LogRatio]
    target: Fraction
    box: Optional[BoxEstimate]
    branching: List[BranchingCheck] = field(default_factory=list)

    @property
    def final_alpha(self) -> Optional[AlphaValue]:
        return self.alphas[-1] if self.alphas else None

    def to_dict(self) -> Dict:
        return {
            "counts": self.counts,
            "final_alpha": self.final_alpha.to_dict() if self.final_alpha else None,
            "checkpoints": [a.to_dict() for a in self.checkpoints],
            "theoretical_lower_bound": self.bound.to_dict() if self.bound else None,
            "target": fraction_text(self.target),
            "box_counting": self.box.to_dict() if self.box else None,
            "branching": [b.to_dict() for b in self.branching],
            "branching_holds": all(b.holds for b in self.branching),
        }

    def level_rows(self) -> List[Dict]:
        return [
            {"l": a.level, "b_l": b, "alpha_l": a.ratio.text(), "alpha_l_approx": round(a.ratio.approx, 12)}
            for a, b in zip(self.alphas, self.counts)
        ]


def dimension_report(tree: CantorTree) -> DimensionReport:
    """Counts, alphas, checkpoints, the theoretical bound, the level box-count fit and the branching check."""
    schedule = tree.schedule
    psi = schedule.psi
    target = Fraction(psi.n + 1) / psi.s
    try:
        bound = theoretical_lower_bound(schedule.N, schedule.constants.R3, psi.n, psi.s)
    except ValueError as e:
        logger.warning(f"No theoretical lower bound: {e}")
        bound = None
    scales, log_counts = level_box_counts(tree)
    try:
        box = fit_box_counts(scales, log_counts)
    except ValueError as e:
        logger.warning(f"No box-counting fit: {e}")
        box = None
    report = DimensionReport(
        counts=tree.counts(),
        alphas=mass_alpha(tree),
        checkpoints=checkpoint_alphas(tree),
        bound=bound,
        target=target,
        box=box,
        branching=branching_checks(tree),
    )
    final = report.final_alpha
    logger.info(
        f"Dimension report: alpha_L={final.ratio.text() if final else '-'}, target {fraction_text(target)}"
        + (f", box slope ~{box.slope:.4f}" if box else "")
    )
    return report
