"""
Trajectories t -> c_x(t) and the exactness certificate
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

from tqdm import tqdm

from src.algebra.degree import ceil_q
from src.algebra.laurent import LaurentVector
from src.dynamics.flow import FlowSession
from src.lattice.shifted import Vector
from src.template.psi import PsiFunction

logger = logging.getLogger(__name__)

Window = Union[int, Tuple[int, int]]


@dataclass(frozen=True)
class Trajectory:
    n: int
    x: LaurentVector
    t_lo: int
    t_hi: int
    values: Tuple[int, ...]
    witnesses: Optional[Tuple[Vector, ...]] = None

    def __post_init__(self):
        if len(self.values) != self.t_hi - self.t_lo + 1:
            raise ValueError("trajectory needs exactly one value per integer time")

    def covers(self, t: int) -> bool:
        return self.t_lo <= t <= self.t_hi

    def c(self, t: int) -> int:
        if not self.covers(t):
            raise KeyError(f"t={t} outside the trajectory range [{self.t_lo}, {self.t_hi}]")
        return self.values[t - self.t_lo]

    def witness(self, t: int) -> Optional[Vector]:
        if self.witnesses is None:
            return None
        return self.witnesses[t - self.t_lo]

    def times(self) -> range:
        return range(self.t_lo, self.t_hi + 1)

    def deltas(self) -> List[int]:
        return [b - a for a, b in zip(self.values, self.values[1:])]

    def rows(self, psi: Optional[PsiFunction] = None, template=None) -> List[Dict]:
        """Export rows: t, c_x, r_psi as num/den, template value, witness."""
        out = []
        for t in self.times():
            row = {"t": t, "c_x": self.c(t)}
            if psi is not None:
                r = psi.r(t)
                row["r_psi_num"], row["r_psi_den"] = r.numerator, r.denominator
            if template is not None:
                value = template.value(t)
                row["template"] = f"{value.numerator}/{value.denominator}"
            w = self.witness(t)
            if w is not None:
                row["witness"] = "(" + ", ".join(str(e) for e in w) + ")"
            out.append(row)
        return out

    def slack_summary(self, psi: PsiFunction) -> Dict:
        """min over t of c_x(t) - r_psi(t), where it happens, and the first t with c below r."""
        best, argmin, first_negative = None, None, None
        for t in self.times():
            slack = self.c(t) - psi.r(t)
            if best is None or slack < best:
                best, argmin = slack, t
            if first_negative is None and slack < 0:
                first_negative = t
        return {
            "min_slack": f"{best.numerator}/{best.denominator}" if best is not None else None,
            "argmin": argmin,
            "first_negative_t": first_negative,
        }


def trajectory(
    x: LaurentVector, t_lo: int, t_hi: int, witnesses: bool = False, show_progress: bool = False,
) -> Trajectory:
    """
    c_x(t) for every integer t in [t_lo, t_hi], one reduction session advanced step by step

    Raises:
        PrecisionExhausted: the truncation of x cannot certify some c_x(t)
    """
    if t_lo < 0 or t_hi < t_lo:
        raise ValueError(f"invalid time range [{t_lo}, {t_hi}]")
    session = FlowSession(x, t_lo)
    values, found = [], []
    for t in tqdm(range(t_lo, t_hi + 1), desc="trajectory", disable=not show_progress):
        if t > t_lo:
            session.advance(1)
        values.append(session.c())
        if witnesses:
            found.append(session.shortest())
    logger.debug(f"Trajectory on [{t_lo}, {t_hi}] took {session.steps} reduction steps")
    return Trajectory(
        n=x.n, x=x, t_lo=t_lo, t_hi=t_hi, values=tuple(values),
        witnesses=tuple(found) if witnesses else None,
    )


@dataclass(frozen=True)
class ExactnessVerdict:
    holds: bool
    reason: str = ""
    t: Optional[int] = None
    margin: Optional[Fraction] = None
    equality_times: Tuple[int, ...] = field(default_factory=tuple)


def check_exactness_certificate(
    traj: Trajectory, psi: PsiFunction, t0: int, equality_times: Sequence[Window]
) -> ExactnessVerdict:
    """
    c_x(t) >= ceil(r_psi(t)) on [t0, t_hi] and c_x(t) = ceil(r_psi(t)) inside every window

    Args:
        traj: Trajectory covering [t0, t_hi]
        psi: Approximation function
        t0: First time of the lower bound
        equality_times: Integers or inclusive (lo, hi) windows, each needing one equality

    Returns:
        Verdict; the first violation is reported
    """
    if not traj.covers(t0):
        raise ValueError(f"trajectory [{traj.t_lo}, {traj.t_hi}] does not cover t0={t0}")
    for t in range(t0, traj.t_hi + 1):
        bound = ceil_q(psi.r(t))
        c = traj.c(t)
        if c < bound:
            return ExactnessVerdict(False, "lower bound", t, Fraction(c - bound))
    if not equality_times:
        return ExactnessVerdict(False, "no equality times")
    hits = []
    for window in equality_times:
        lo, hi = (window, window) if isinstance(window, int) else window
        lo, hi = max(lo, traj.t_lo), min(hi, traj.t_hi)
        hit = next((t for t in range(lo, hi + 1) if traj.c(t) == ceil_q(psi.r(t))), None)
        if hit is None:
            return ExactnessVerdict(False, "no equality in window", lo, None, tuple(hits))
        hits.append(hit)
    return ExactnessVerdict(True, "", None, None, tuple(hits))
