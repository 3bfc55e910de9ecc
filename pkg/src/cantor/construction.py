"""
Cantor construction of points whose trajectory follows the template

Levels in (l_{k-1}^+, l_k^-] keep the subcubes on which c_x(lM) is certified
to stay above ceil(-M_k) + M. At level l_k^- every kept cube receives a
rational point v_k, and the levels up to l_k^+ follow the single point y_k at
distance exactly psi_hat(H(v_k)) from v_k.

Only the frontier (at most `width` cubes) and the epoch witnesses are kept.
Each level records its frontier as parent index plus the digits added at that
level, so a frontier cube is rebuilt by following parents back to the root;
full prefixes are written for the leaves only.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

import numpy as np
from tqdm import tqdm

from src.algebra.degree import NEG_INF, ceil_q, floor_q, format_degree
from src.algebra.field import FieldSpec, prime_field
from src.algebra.laurent import LaurentSeries, LaurentVector
from src.algebra.poly import poly_ring
from src.cantor.cube import Cube
from src.config.settings import settings
from src.dynamics.flow import FlowSession, NormProfile
from src.dynamics.rational import RationalPoint, dist
from src.dynamics.trajectory import check_exactness_certificate, trajectory
from src.exceptions import PrecisionExhausted, UncertifiableCube, VerificationFailure
from src.template.schedule import Schedule

logger = logging.getLogger(__name__)

PRECONDITION = "precondition c_x(t) >= -R"


@dataclass(frozen=True)
class Check:
    name: str
    epoch: Optional[int]
    level: Optional[int]
    holds: bool
    margin: Optional[Fraction] = None
    detail: str = ""

    def to_dict(self) -> Dict:
        margin = None if self.margin is None else format_degree(self.margin)
        return {
            "name": self.name,
            "epoch": self.epoch,
            "level": self.level,
            "holds": self.holds,
            "margin": margin,
            "detail": self.detail,
        }


@dataclass(frozen=True)
class GoodRational:
    v: RationalPoint
    t: int
    R: Fraction
    height: int
    distance: int
    checks: Tuple[Check, ...]


@dataclass(frozen=True)
class EpochWitness:
    k: int
    branch: int
    level: int
    t: int
    R: Fraction
    v: RationalPoint
    y: LaurentVector
    h: int
    m: int
    t_x: Fraction
    checks: Tuple[Check, ...]

    def to_dict(self) -> Dict:
        return {
            "k": self.k,
            "branch": self.branch,
            "level": self.level,
            "t": self.t,
            "R": format_degree(self.R),
            "v": self.v.to_dict(),
            "y": str(self.y),
            "height": self.h,
            "m": self.m,
            "t_x": format_degree(self.t_x),
            "checks": [c.to_dict() for c in self.checks],
        }


@dataclass(frozen=True)
class Selection:
    """Case-1 outcome for one parent cube; included children keep their sessions."""

    parent: Cube
    included: Tuple[Tuple[Cube, FlowSession], ...]
    certified_bad: int
    uncertified: int


@dataclass
class LevelRecord:
    level: int
    kind: str
    epoch: int
    b: int
    included: Tuple[int, ...] = ()
    certified_bad: int = 0
    uncertified: int = 0
    frontier: Tuple[str, ...] = ()

    def to_dict(self) -> Dict:
        return {
            "level": self.level,
            "kind": self.kind,
            "epoch": self.epoch,
            "b": self.b,
            "included": list(self.included),
            "certified_bad": self.certified_bad,
            "uncertified": self.uncertified,
            "frontier": list(self.frontier),
        }


@dataclass
class _Branch:
    cube: Cube
    session: Optional[FlowSession]
    lineage: Tuple[EpochWitness, ...] = ()
    y: Optional[LaurentVector] = None
    parent: int = 0


def _frontier(branches: List[_Branch]) -> Tuple[str, ...]:
    """One 'parent:digits' entry per kept cube; parent indexes the previous level's frontier."""
    return tuple(f"{br.parent}:{br.cube.digit_key()}" for br in branches)


@dataclass
class CantorTree:
    schedule: Schedule
    field: FieldSpec
    depth: int
    seed: int
    width: int
    levels: List[LevelRecord] = field(default_factory=list)
    witnesses: List[EpochWitness] = field(default_factory=list)
    leaves: List[Cube] = field(default_factory=list)
    lineages: List[Tuple[EpochWitness, ...]] = field(default_factory=list)
    verification: List[Check] = field(default_factory=list)

    def counts(self) -> List[int]:
        """b_1, ..., b_L."""
        return [record.b for record in self.levels]

    def case1_levels(self) -> List[LevelRecord]:
        return [record for record in self.levels if record.kind == "case1"]

    def manifest(self) -> Dict:
        return {
            "depth": self.depth,
            "seed": self.seed,
            "width": self.width,
            "N": self.schedule.N,
            "levels": [r.to_dict() for r in self.levels],
            "witnesses": [w.to_dict() for w in self.witnesses],
            "leaves": [c.key() for c in self.leaves],
            "verification": [c.to_dict() for c in self.verification],
        }


def _certified_min(session: FlowSession, cube: Cube, depth: int) -> Optional[int]:
    """Certified c at the session's time over the cube, refining up to `depth` levels; None if impossible."""
    if session.certified():
        return session.session.first_minimum()
    if depth <= 0:
        return None
    values = []
    for child in cube.children():
        sub = session.copy()
        sub.refine(child.point)
        value = _certified_min(sub, child, depth - 1)
        if value is None:
            return None
        values.append(value)
    return min(values)


def case1_select(
    cube: Cube, k: int, schedule: Schedule, session: Optional[FlowSession] = None, fallback_depth: int = 1,
) -> Selection:
    """
    Children of `cube` with c_x(lM) >= ceil(-M_k) + M certified on the whole child

    Args:
        cube: Parent at level l-1
        k: Epoch whose Case-1 range contains l
        schedule: Epoch schedule
        session: Flow session of the parent at time (l-1)M, built when omitted
        fallback_depth: Extra levels tried when a child does not certify

    Raises:
        UncertifiableCube: no child certified and at least one child undecided
    """
    M = schedule.M
    if session is None:
        session = FlowSession(cube.point, cube.level * M)
    bound = ceil_q(-schedule.bound_M(k)) + M
    included, certified_bad, uncertified = [], 0, 0
    for child in cube.children():
        sub = session.copy()
        sub.refine(child.point, dt=(child.level * M) - sub.t)
        value = _certified_min(sub, child, fallback_depth)
        if value is None:
            uncertified += 1
            logger.warning(f"Child {child.key()} could not be certified at t={child.level * M}")
        elif value >= bound:
            included.append((child, sub))
        else:
            certified_bad += 1
    if not included and uncertified:
        raise UncertifiableCube(cube.level + 1, cube.key())
    return Selection(cube, tuple(included), certified_bad, uncertified)


def find_good_rational(
    x: LaurentVector, t: int, R, session: Optional[FlowSession] = None,
) -> GoodRational:
    """
    Rational point v with nt - R <= H(v) <= n(t + 2nR) and d(x, v) <= -(n+1)t - 1

    v is read off the shortest vector at time t + 2nR.

    Raises:
        VerificationFailure: the precondition c_x(t) >= -R or one of the bounds fails
    """
    n = x.n
    R = Fraction(R)
    shift = 2 * n * R
    if shift.denominator != 1:
        raise ValueError(f"2nR = {shift} must be an integer")
    if session is None:
        session = FlowSession(x, t)
    c = session.c()
    if c < -R:
        raise VerificationFailure(PRECONDITION, detail=f"c_x({t}) = {c} < -{R}")
    later = session.copy()
    later.advance(int(shift))
    vector = later.shortest()
    if vector[0].is_zero():
        raise VerificationFailure("nonzero denominator", detail=f"shortest vector at t={later.t} has g = 0")
    v = RationalPoint.from_vector(vector)
    h = v.height
    d = dist(x, v)
    T = t + shift
    checks = (
        Check("height lower bound", None, None, h >= n * t - R, h - (n * t - R)),
        Check("height upper bound", None, None, h <= n * T, n * T - h),
        Check("distance bound", None, None, d <= -(n + 1) * t - 1,
              None if d is NEG_INF else -(n + 1) * t - 1 - d),
        Check("height-distance bound", None, None, d <= -T - h, None if d is NEG_INF else -T - h - d),
    )
    for check in checks:
        if not check.holds:
            raise VerificationFailure(check.name, detail=f"t={t}, R={R}, H={h}, d={d}")
    return GoodRational(v=v, t=t, R=R, height=h, distance=d, checks=checks)


def pick_target_point(v: RationalPoint, m: int, cube: Cube) -> LaurentVector:
    """
    Exact point y in `cube` with d(v, y) = -m

    y is the expansion of v down to X^-m with the coefficient of X^-m in the
    first coordinate replaced by its successor and every deeper coefficient 0.
    """
    if m <= -cube.side:
        raise ValueError(f"target exponent -{m} is not below the cube side {cube.side}")
    expansion = v.expansion(-m - 1)
    if not cube.contains(expansion):
        raise ValueError("rational point lies outside the cube")
    field_ = expansion.field
    ring = expansion.ring
    coords = []
    for i, c in enumerate(expansion.coords):
        exact = LaurentSeries(c.body, c.lo)
        if i == 0:
            old = c.coefficient(-m)
            exact = exact + LaurentSeries.monomial(ring, field_.sub(field_.successor(old), old), -m)
        coords.append(exact)
    return LaurentVector(tuple(coords))


def _case2(branch: _Branch, index: int, k: int, schedule: Schedule) -> EpochWitness:
    """Witness v_k, y_k for one branch at level l_k^-."""
    psi, M = schedule.psi, schedule.M
    n = psi.n
    epoch = schedule.epoch(k)
    cube = branch.cube
    t = cube.level * M
    center = cube.center()
    session = FlowSession(center, t)
    step = Fraction(1, 2 * n)
    R = 2 * epoch.M_k
    R = Fraction(math.floor(R * 2 * n), 2 * n)
    h_lo = floor_q(n * epoch.t_minus) - 5 * schedule.constants.R0 * epoch.M_k
    h_hi = ceil_q(n * epoch.t_minus) - 3 * schedule.constants.R0 * epoch.M_k
    t_x_lo = floor_q(epoch.t - schedule.constants.R1 * epoch.M_k)
    t_x_hi = ceil_q(epoch.t + 1)
    m_lo, m_hi = (n + 1) * M * epoch.l_minus, (n + 1) * M * epoch.l_plus
    rejected = []
    while R >= 1:
        try:
            good = find_good_rational(center, t, R, session)
        except VerificationFailure as e:
            if e.inequality == PRECONDITION:
                logger.debug(f"Epoch {k} branch {index}: {e}")
                break
            rejected.append(f"R={R}: {e.inequality}")
            R -= step
            continue
        h = good.height
        m = -psi.psi_hat(h)
        t_x = Fraction(m, n + 1)
        checks = good.checks + (
            Check("B(i)", k, cube.level, h_lo <= h <= h_hi, min(h - h_lo, h_hi - h)),
            Check("B(iii)", k, cube.level, t_x_lo < t_x < t_x_hi, min(t_x - t_x_lo, t_x_hi - t_x)),
            Check("target exponent", k, cube.level, m_lo < m < m_hi, min(m - m_lo, m_hi - m)),
        )
        failed = next((c for c in checks if not c.holds), None)
        if failed is None:
            y = pick_target_point(good.v, m, cube)
            exact = dist(y, good.v)
            checks += (Check("B(ii)", k, cube.level, exact == -m, 0 if exact == -m else exact + m),)
            logger.info(f"Epoch {k} branch {index}: v with H={h} at R={R}, d(v, y)=-{m}, t_x={t_x}")
            return EpochWitness(k=k, branch=index, level=cube.level, t=t, R=R, v=good.v, y=y,
                                h=h, m=m, t_x=t_x, checks=checks)
        rejected.append(f"R={R}: {failed.name}")
        R -= step
    raise VerificationFailure(
        "case-2 witness", epoch=k, level=cube.level,
        detail="; ".join(rejected[-4:]) or "precondition fails at R = 2M_k",
    )


def build_cantor(
    schedule: Schedule,
    depth: Optional[int] = None,
    seed: int = 0,
    width: Optional[int] = None,
    fallback_depth: Optional[int] = None,
    threads: int = 1,
    verify: bool = True,
    verify_leaves: int = 1,
    field_spec: Optional[FieldSpec] = None,
    show_progress: bool = False,
) -> CantorTree:
    """
    Build the frontier of the Cantor tree level by level

    Args:
        schedule: Validated epoch schedule
        depth: Last level L, at most l_K^+ (the default)
        seed: Seed of the frontier chooser
        width: Cubes kept per level, FRONTIER_WIDTH by default
        fallback_depth: Extra levels tried for uncertified children, FALLBACK_DEPTH by default
        threads: Worker threads expanding frontier cubes
        verify: Re-verify every condition on extracted leaves
        verify_leaves: Number of leaves verified
        field_spec: Coefficient field (F_q with q prime by default)
        show_progress: Show a progress bar

    Raises:
        VerificationFailure: a level or witness predicate failed
        UncertifiableCube: a parent had no certified child
    """
    width = settings.FRONTIER_WIDTH if width is None else width
    fallback_depth = settings.FALLBACK_DEPTH if fallback_depth is None else fallback_depth
    field_ = field_spec or prime_field(schedule.q)
    if field_.q != schedule.q:
        raise ValueError(f"field has q={field_.q}, schedule has q={schedule.q}")
    L = schedule.last_level if depth is None else depth
    if L < 0 or L > schedule.last_level:
        raise ValueError(f"depth {L} outside [0, {schedule.last_level}]")
    if width < 1:
        raise ValueError("width must be >= 1")
    M, n = schedule.M, schedule.n
    ring = poly_ring(field_)
    root = Cube.root(ring, n, M)
    tree = CantorTree(schedule=schedule, field=field_, depth=L, seed=seed, width=width)
    branches = [_Branch(root, FlowSession(root.point, 0))]
    rng = np.random.default_rng(seed)
    logger.info(f"Building Cantor tree: n={n}, q={field_.q}, M={M}, depth {L}, width {width}, seed {seed}")

    with ThreadPoolExecutor(max_workers=max(1, threads)) as executor:
        for level in tqdm(range(1, L + 1), desc="levels", disable=not show_progress):
            k, single = schedule.epoch_at_level(level)
            if not single:
                selections = list(executor.map(
                    lambda br: case1_select(br.cube, k, schedule, br.session, fallback_depth), branches,
                ))
                b = min(len(s.included) for s in selections)
                if b == 0:
                    raise VerificationFailure("case-1 selection", epoch=k, level=level,
                                              detail="a frontier cube has no certified child")
                pool = [
                    _Branch(child, sub, branch.lineage, parent=index)
                    for index, (branch, selection) in enumerate(zip(branches, selections))
                    for child, sub in selection.included[:b]
                ]
                if len(pool) > width:
                    chosen = sorted(rng.choice(len(pool), size=width, replace=False).tolist())
                    pool = [pool[i] for i in chosen]
                branches = pool
                record = LevelRecord(
                    level=level, kind="case1", epoch=k, b=b,
                    included=tuple(len(s.included) for s in selections),
                    certified_bad=sum(s.certified_bad for s in selections),
                    uncertified=sum(s.uncertified for s in selections),
                    frontier=_frontier(branches),
                )
                logger.debug(f"Level {level} (epoch {k}, case 1): b={b}, counts {record.included}")
            else:
                epoch = schedule.epoch(k)
                if level == epoch.l_minus + 1:
                    witnesses = list(executor.map(
                        lambda item: _case2(item[1], item[0], k, schedule), enumerate(branches),
                    ))
                    for branch, witness in zip(branches, witnesses):
                        branch.y = witness.y
                        branch.lineage = branch.lineage + (witness,)
                    tree.witnesses.extend(witnesses)
                for index, branch in enumerate(branches):
                    branch.cube = Cube.containing(branch.y, level, M)
                    branch.session = None
                    branch.parent = index
                if level == epoch.l_plus:
                    for branch in branches:
                        branch.session = FlowSession(branch.cube.point, level * M)
                record = LevelRecord(level=level, kind="case2", epoch=k, b=1,
                                     frontier=_frontier(branches))
            tree.levels.append(record)

    tree.leaves = [br.cube for br in branches]
    tree.lineages = [br.lineage for br in branches]
    logger.info(f"Cantor tree built: {len(tree.leaves)} leaves at level {L}, {len(tree.witnesses)} witnesses")

    if verify:
        for index in range(min(verify_leaves, len(tree.leaves))):
            checks = verify_tree(tree, index)
            tree.verification.extend(checks)
            failed = next((c for c in checks if not c.holds), None)
            if failed is not None:
                raise VerificationFailure(failed.name, epoch=failed.epoch, level=failed.level, detail=failed.detail)
        logger.info(f"✅ Verified {len(tree.verification)} checks on {min(verify_leaves, len(tree.leaves))} leaves")
    return tree


def extract_point(tree: CantorTree, leaf: int = 0) -> LaurentVector:
    """The fixed coefficients of a leaf, floor at its side exponent."""
    if not 0 <= leaf < len(tree.leaves):
        raise IndexError(f"leaf {leaf} outside [0, {len(tree.leaves)})")
    return tree.leaves[leaf].as_vector()


def _range_check(name, k, level, traj, lo, hi, bound_of) -> Optional[Check]:
    """Check c(t) >= bound_of(t) for integer t in [lo, hi]; None when the range is empty."""
    lo, hi = max(lo, traj.t_lo), min(hi, traj.t_hi)
    if lo > hi:
        return None
    worst, worst_t = None, None
    for t in range(lo, hi + 1):
        slack = traj.c(t) - bound_of(t)
        if worst is None or slack < worst:
            worst, worst_t = slack, t
    return Check(name, k, level, worst >= 0, Fraction(worst), f"t in [{lo}, {hi}], tightest at t={worst_t}")


def verify_tree(tree: CantorTree, leaf: int = 0) -> List[Check]:
    """
    Replay every construction inequality on one extracted leaf

    Returns:
        Named checks with margins, in epoch order
    """
    from src.cantor.approximation import verify_exact_membership

    schedule = tree.schedule
    psi, M, n = schedule.psi, schedule.M, schedule.n
    R0 = schedule.constants.R0
    x = extract_point(tree, leaf)
    lineage = {w.k: w for w in tree.lineages[leaf]}
    horizon = tree.depth * M
    traj = trajectory(x, 0, horizon)
    checks: List[Check] = []

    def add(check):
        if check is not None:
            checks.append(check)

    previous_plus = Fraction(0)
    for epoch in schedule.epochs:
        k = epoch.k
        bound = ceil_q(-epoch.M_k)
        add(_range_check("A", k, None, traj, ceil_q(previous_plus),
                         floor_q(epoch.t_minus - 4 * R0 * epoch.M_k), lambda t: bound))
        previous_level = schedule.epoch(k - 1).l_plus if k > 1 else 0
        for level in range(previous_level + 1, min(epoch.l_minus, tree.depth) + 1):
            c = traj.c(level * M)
            if c < bound + M:
                checks.append(Check("A1", k, level, False, Fraction(c - bound - M), f"c_x({level * M}) = {c}"))
                break
        else:
            if previous_level < min(epoch.l_minus, tree.depth):
                checks.append(Check("A1", k, None, True, None, f"levels ({previous_level}, {min(epoch.l_minus, tree.depth)}]"))
        deep = ceil_q(-5 * R0 * epoch.M_k)
        add(_range_check("A second range", k, None, traj, floor_q(epoch.t_minus - 4 * R0 * epoch.M_k) + 1,
                         ceil_q(epoch.t_minus) - 1, lambda t: deep))
        witness = lineage.get(k)
        if witness is None or epoch.l_plus > tree.depth:
            break
        v = witness.v
        h = v.height
        h_lo = floor_q(n * epoch.t_minus) - 5 * R0 * epoch.M_k
        h_hi = ceil_q(n * epoch.t_minus) - 3 * R0 * epoch.M_k
        checks.append(Check("B(i)", k, witness.level, h_lo <= h <= h_hi, min(h - h_lo, h_hi - h)))
        d = dist(x, v)
        target = psi.psi_hat(h)
        checks.append(Check("B(ii)", k, witness.level, d == target,
                            Fraction(0) if d == target else None, f"d(x, v_k) = {d}, psi_hat(H) = {target}"))
        t_x = Fraction(-d, n + 1) if d is not NEG_INF else None
        t_x_lo = floor_q(epoch.t - schedule.constants.R1 * epoch.M_k)
        holds = t_x is not None and t_x_lo < t_x < epoch.t + 1
        checks.append(Check("B(iii)", k, witness.level, holds,
                            min(t_x - t_x_lo, epoch.t + 1 - t_x) if t_x is not None else None))

        profile = NormProfile(x, v.as_vector())
        lo, hi = max(ceil_q(epoch.t_minus), 0), min(floor_q(epoch.t_plus), horizon)
        mismatch = next((t for t in range(lo, hi + 1) if profile.at(t) != traj.c(t)), None)
        checks.append(Check("claim", k, None, mismatch is None, None,
                            f"v_k attains c_x on [{lo}, {hi}]" if mismatch is None
                            else f"norm {profile.at(mismatch)} != c_x({mismatch}) = {traj.c(mismatch)}"))

        closing = ceil_q(-schedule.bound_M(k + 1)) + M
        add(_range_check("closing", k, None, traj, ceil_q(epoch.t_plus), epoch.l_plus * M, lambda t: closing))
        if t_x is not None:
            add(_range_check("tail", k, None, traj, ceil_q(t_x), floor_q(epoch.t_plus),
                             lambda t: ceil_q(psi.r(t))))
        previous_plus = epoch.t_plus

    windows = [
        (floor_q(w.t_x), ceil_q(w.t_x))
        for w in tree.lineages[leaf] if schedule.epoch(w.k).l_plus <= tree.depth
    ]
    if not windows:
        logger.info(f"Depth {tree.depth} completes no epoch; exactness checks skipped")
        return checks
    t0 = min(schedule.t0, horizon)
    verdict = check_exactness_certificate(traj, psi, t0, windows)
    checks.append(Check("exactness certificate", None, None, verdict.holds, verdict.margin,
                        verdict.reason or f"equalities at {list(verdict.equality_times)}"))

    try:
        membership = verify_exact_membership(
            x, psi, h0=ceil_q(Fraction((n + 1) * schedule.t0) / psi.s), min_equalities=len(windows),
        )
        checks.append(Check("exact membership", None, None, membership.holds, None, membership.summary()))
    except PrecisionExhausted as e:
        checks.append(Check("exact membership", None, None, False, None, str(e)))
    return checks
