"""
Epoch schedule of the Cantor construction

An epoch k is centred at an integer time t_k. From it derive

    M_k       = -sup_{t >= t_{k-1}} r_psi(t)
    t_k^-     = t_k + r_psi(t_k) / n
    t_k^+     = t_k - r_psi(t_k)          (template)
    t_k^+     = t_k + R2 M_k              (construction)
    l_k^-     = ceil(floor(t_k^- - 4 R0 M_k) / M)
    l_k^+     = floor((t_k + R2 M_k) / M)

Levels in (l_{k-1}^+, l_k^-] select cubes with a uniform lower bound on c_x,
levels in (l_k^-, l_k^+] follow a single rational approximation.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from src.algebra.degree import as_fraction
from src.exceptions import UnsatisfiablePredicate
from src.template.psi import PsiFunction, lambda_gamma

logger = logging.getLogger(__name__)

# ratio l_{k-1}^+ / l_k^- must stay below this
DEFAULT_EPSILON = Fraction(1, 10)
DEFAULT_SEARCH_BUDGET = 32
PRESETS = ("paper", "desk")


def fraction_text(value: Fraction) -> str:
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


@dataclass(frozen=True)
class ScheduleConstants:
    R0: Fraction
    R1: Fraction
    R2: Fraction
    R3: Fraction = Fraction(2)
    C1: Fraction = Fraction(4)

    def __post_init__(self):
        for name in ("R0", "R1", "R2", "R3", "C1"):
            value = as_fraction(getattr(self, name))
            if value < 0:
                raise ValueError(f"constant {name} must be non-negative, got {value}")
            object.__setattr__(self, name, value)

    def to_dict(self) -> Dict[str, str]:
        return {name: fraction_text(getattr(self, name)) for name in ("R0", "R1", "R2", "R3", "C1")}


def preset_constants(preset: str, psi: PsiFunction, overrides: Optional[Dict] = None) -> Tuple[ScheduleConstants, int]:
    """
    Constants and cube exponent M for a named preset

    paper: R0 = 4n^2, R1 = 10 R0 / (1 - gamma), R2 = R1 + 6 R0 + C1 + 1
    desk:  R0 = 2,    R1 = 10 R0 / (1 - gamma), R2 = 16
    Overrides replace single constants; R2 is recomputed for 'paper' unless overridden.
    """
    if preset not in PRESETS:
        raise ValueError(f"unknown preset '{preset}' (expected one of {', '.join(PRESETS)})")
    overrides = {k: as_fraction(v) for k, v in (overrides or {}).items() if v is not None}
    _, gamma = lambda_gamma(psi)
    n = psi.n
    C1 = overrides.get("C1", Fraction(4))
    R3 = overrides.get("R3", Fraction(2))
    R0 = overrides.get("R0", Fraction(4 * n * n) if preset == "paper" else Fraction(2))
    R1 = overrides.get("R1", 10 * R0 / (1 - gamma))
    if preset == "paper":
        R2 = overrides.get("R2", R1 + 6 * R0 + C1 + 1)
    else:
        R2 = overrides.get("R2", Fraction(16))
    M = 2 if n == 1 else 1
    return ScheduleConstants(R0=R0, R1=R1, R2=R2, R3=R3, C1=C1), M


@dataclass(frozen=True)
class Epoch:
    k: int
    t: int
    M_k: Fraction
    r: Fraction
    t_minus: Fraction
    t_plus_template: Fraction
    t_plus: Fraction
    l_minus: int
    l_plus: int

    def to_dict(self) -> Dict:
        return {
            "k": self.k,
            "t": self.t,
            "M_k": fraction_text(self.M_k),
            "r_psi": fraction_text(self.r),
            "t_minus": fraction_text(self.t_minus),
            "t_plus_template": fraction_text(self.t_plus_template),
            "t_plus": fraction_text(self.t_plus),
            "l_minus": self.l_minus,
            "l_plus": self.l_plus,
        }


def make_epoch(psi: PsiFunction, constants: ScheduleConstants, M: int, k: int, t: int, t_prev) -> Epoch:
    n = psi.n
    r = psi.r(t)
    M_k = -psi.sup_r(t_prev)
    t_minus = t + r / n
    t_plus = t + constants.R2 * M_k
    return Epoch(
        k=k,
        t=t,
        M_k=M_k,
        r=r,
        t_minus=t_minus,
        t_plus_template=t - r,
        t_plus=t_plus,
        l_minus=math.ceil(Fraction(math.floor(t_minus - 4 * constants.R0 * M_k), M)),
        l_plus=math.floor(t_plus / M),
    )


@dataclass(frozen=True)
class Schedule:
    psi: PsiFunction
    q: int
    M: int
    constants: ScheduleConstants
    t0: int
    epochs: Tuple[Epoch, ...]
    gamma: Fraction
    lam: Fraction
    epsilon: Fraction = DEFAULT_EPSILON

    @property
    def n(self) -> int:
        return self.psi.n

    @property
    def K(self) -> int:
        return len(self.epochs)

    @property
    def N(self) -> int:
        """Number of subdivisions per coordinate and level: q^{(n+1)M}."""
        return self.q ** ((self.n + 1) * self.M)

    @property
    def last_level(self) -> int:
        return self.epochs[-1].l_plus if self.epochs else 0

    def epoch(self, k: int) -> Epoch:
        return self.epochs[k - 1]

    def epoch_at_level(self, level: int) -> Tuple[int, bool]:
        """
        Epoch responsible for a level and whether the level is in its
        single-approximation range (l_k^-, l_k^+]

        Levels past the last epoch belong to a virtual epoch K+1.
        """
        for e in self.epochs:
            if level <= e.l_minus:
                return e.k, False
            if level <= e.l_plus:
                return e.k, True
        return self.K + 1, False

    def bound_M(self, k: int) -> Fraction:
        """M_k, extended past the last epoch by M_{K+1} = -r_psi(t_K)."""
        if k <= self.K:
            return self.epoch(k).M_k
        return -self.psi.sup_r(self.epochs[-1].t if self.epochs else self.t0)


@dataclass(frozen=True)
class PredicateResult:
    name: str
    epoch: int
    holds: bool
    lhs: Fraction
    rhs: Fraction
    detail: str = ""

    def to_dict(self) -> Dict:
        return {
            "name": self.name,
            "epoch": self.epoch,
            "holds": self.holds,
            "lhs": fraction_text(self.lhs),
            "rhs": fraction_text(self.rhs),
            "detail": self.detail,
        }


def _witness_window(psi: PsiFunction, constants: ScheduleConstants, epoch: Epoch) -> PredicateResult:
    """
    Some admissible witness height puts t_x strictly inside (floor(t - R1 M_k), t + 1)

    Heights run over [floor(n t^-) - 5 R0 M_k, ceil(n t^-) - 3 R0 M_k] and
    t_x = -psi_hat(h) / (n+1) grows with h.
    """
    n, R0 = psi.n, constants.R0
    h_lo = math.ceil(math.floor(n * epoch.t_minus) - 5 * R0 * epoch.M_k)
    h_hi = math.floor(math.ceil(n * epoch.t_minus) - 3 * R0 * epoch.M_k)
    lo = Fraction(math.floor(epoch.t - constants.R1 * epoch.M_k))
    hi = Fraction(epoch.t + 1)
    reachable = [Fraction(-psi.psi_hat(h), n + 1) for h in range(h_lo, h_hi + 1)]
    holds = any(lo < t_x < hi for t_x in reachable)
    lhs = reachable[-1] if reachable else lo
    detail = f"t_x in [{reachable[0]}, {reachable[-1]}]" if reachable else "no admissible height"
    return PredicateResult("witness_window", epoch.k, holds, lhs, lo, f"{detail} against ({lo}, {hi})")


def _epoch_predicates(
    psi: PsiFunction, constants: ScheduleConstants, M: int, gamma: Fraction, epsilon: Fraction,
    epoch: Epoch, previous: Optional[Epoch],
) -> List[PredicateResult]:
    n, k = psi.n, epoch.k
    R0, R1 = constants.R0, constants.R1
    results = []

    prev_time = Fraction(math.ceil(previous.t_plus_template)) if previous else Fraction(0)
    chain = [prev_time, Fraction(math.floor(epoch.t_minus)), Fraction(epoch.t), Fraction(math.ceil(epoch.t_plus_template))]
    broken = next((i for i in range(len(chain) - 1) if not chain[i] < chain[i + 1]), None)
    if broken is None:
        results.append(PredicateResult("interleaving", k, True, chain[1], chain[0], "times"))
    else:
        results.append(PredicateResult("interleaving", k, False, chain[broken + 1], chain[broken], "times"))

    prev_level = previous.l_plus if previous else 0
    levels_ok = prev_level < epoch.l_minus < epoch.l_plus
    rhs = prev_level if not prev_level < epoch.l_minus else epoch.l_minus
    lhs = epoch.l_minus if not prev_level < epoch.l_minus else epoch.l_plus
    results.append(PredicateResult("interleaving", k, levels_ok, Fraction(lhs), Fraction(rhs), "levels"))

    results.append(PredicateResult("growth", k, epoch.M_k > (2 * n - 1) * M, epoch.M_k, Fraction((2 * n - 1) * M)))

    R = R1 * epoch.M_k
    lhs = psi.r(math.floor(epoch.t - R))
    rhs = epoch.r + (1 + gamma) / 2 * R
    results.append(PredicateResult("drop_at_floor", k, lhs <= rhs, lhs, rhs))

    ratio = epoch.r / (n * epoch.t)
    results.append(PredicateResult("slope_ratio", k, abs(ratio + gamma) <= Fraction(1, k), ratio, -gamma))

    lhs = psi.r(epoch.t - R)
    results.append(PredicateResult("drop", k, lhs <= rhs, lhs, rhs))

    lhs = psi.sup_r(epoch.t)
    results.append(PredicateResult("sup_after", k, lhs <= epoch.r + R, lhs, epoch.r + R))

    start = math.ceil(epoch.t_minus - 4 * R0 * epoch.M_k)
    lhs = psi.sup_r(max(start, 0))
    rhs = -5 * R0 * epoch.M_k
    results.append(PredicateResult("sup", k, lhs < rhs, lhs, rhs))
    results.append(_witness_window(psi, constants, epoch))

    ratio = Fraction(prev_level, epoch.l_minus) if epoch.l_minus > 0 else Fraction(prev_level)
    results.append(PredicateResult("ratio", k, epoch.l_minus > 0 and ratio < epsilon, ratio, epsilon))
    return results


def validate_schedule(schedule: Schedule) -> List[PredicateResult]:
    """Every predicate of every epoch, in evaluation order."""
    results = []
    previous = None
    for epoch in schedule.epochs:
        results.extend(_epoch_predicates(
            schedule.psi, schedule.constants, schedule.M, schedule.gamma, schedule.epsilon, epoch, previous,
        ))
        previous = epoch
    return results


def default_t0(psi: PsiFunction, M: int) -> int:
    """Smallest t0 >= 1 with -r_psi(t0) >= (2n-1)M + 1."""
    target = (2 * psi.n - 1) * M + 1
    offset = psi.r(0)
    t0 = math.ceil((target + offset) / -psi.r_slope)
    t0 = max(t0, 1)
    while -psi.r(t0) < target:
        t0 += 1
    return t0


def _check_linear_drop(psi: PsiFunction, gamma: Fraction) -> None:
    n = psi.n
    if gamma * (2 * n - 1) > 1:
        raise UnsatisfiablePredicate(
            "drop_at_floor", None, f"gamma*(2n-1) = {gamma * (2 * n - 1)} > 1 for a linear r_psi; no t_k satisfies it",
        )


def choose_schedule(
    psi: PsiFunction,
    q: int,
    M: int,
    constants: ScheduleConstants,
    K: int,
    t1: Optional[int] = None,
    growth: Optional[Fraction] = None,
    times: Optional[Sequence[int]] = None,
    t0: Optional[int] = None,
    epsilon: Fraction = DEFAULT_EPSILON,
    budget: int = DEFAULT_SEARCH_BUDGET,
) -> Schedule:
    """
    Epoch times meeting every schedule predicate

    Args:
        psi: Approximation function
        q: Field size
        M: Cube exponent, each level refines coordinates by (n+1)M digits
        constants: R0, R1, R2, R3, C1
        K: Number of epochs
        t1: First epoch time, kept fixed when given
        growth: Factor between candidate times (> 1)
        times: Explicit epoch times, validated as given
        t0: Start time; default_t0 when omitted
        epsilon: Bound on l_{k-1}^+ / l_k^-
        budget: Candidate times tried per epoch

    Raises:
        UnsatisfiablePredicate: naming the first predicate that cannot be met
    """
    lam, gamma = lambda_gamma(psi)
    _check_linear_drop(psi, gamma)
    if t0 is None:
        t0 = default_t0(psi, M)
    epsilon = as_fraction(epsilon)

    def build(epochs):
        return Schedule(psi=psi, q=q, M=M, constants=constants, t0=t0, epochs=tuple(epochs),
                        gamma=gamma, lam=lam, epsilon=epsilon)

    def failure(epoch, previous):
        for result in _epoch_predicates(psi, constants, M, gamma, epsilon, epoch, previous):
            if not result.holds:
                return result
        return None

    epochs: List[Epoch] = []
    if times is not None:
        if len(times) != K:
            raise ValueError(f"{len(times)} epoch times given for K={K}")
        t_prev = t0
        for k, t in enumerate(times, start=1):
            epoch = make_epoch(psi, constants, M, k, int(t), t_prev)
            bad = failure(epoch, epochs[-1] if epochs else None)
            if bad:
                raise UnsatisfiablePredicate(bad.name, k, f"lhs={bad.lhs} rhs={bad.rhs} {bad.detail}".strip())
            epochs.append(epoch)
            t_prev = epoch.t
        return build(epochs)

    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    growth = as_fraction(growth) if growth is not None else None
    if growth is None or growth <= 1:
        raise ValueError(f"growth factor must be > 1, got {growth}")
    t_prev = t0
    for k in range(1, K + 1):
        previous = epochs[-1] if epochs else None
        fixed = k == 1 and t1 is not None
        candidate = Fraction(t1) if fixed else t_prev * growth
        bad = None
        for _ in range(1 if fixed else budget):
            epoch = make_epoch(psi, constants, M, k, math.ceil(candidate), t_prev)
            bad = failure(epoch, previous)
            if bad is None:
                break
            logger.debug(f"Epoch {k}: t={epoch.t} fails {bad.name} ({bad.detail or 'value'})")
            candidate *= growth
        if bad is not None:
            raise UnsatisfiablePredicate(bad.name, k, f"lhs={bad.lhs} rhs={bad.rhs} {bad.detail}".strip())
        logger.info(f"Epoch {k}: t={epoch.t}, M_k={epoch.M_k}, levels ({epoch.l_minus}, {epoch.l_plus}]")
        epochs.append(epoch)
        t_prev = epoch.t
    return build(epochs)


def epoch_checkpoints(schedule: Schedule) -> List[Tuple[int, int]]:
    return [(e.l_minus, e.l_plus) for e in schedule.epochs]


def schedule_document(schedule: Schedule) -> Dict:
    """Serializable schedule; every rational written as num/den."""
    return {
        "psi": schedule.psi.to_dict(),
        "q": schedule.q,
        "M": schedule.M,
        "N": schedule.N,
        "t0": schedule.t0,
        "gamma": fraction_text(schedule.gamma),
        "lambda": fraction_text(schedule.lam),
        "epsilon": fraction_text(schedule.epsilon),
        "constants": schedule.constants.to_dict(),
        "epochs": [e.to_dict() for e in schedule.epochs],
        "predicates": [p.to_dict() for p in validate_schedule(schedule)],
    }
