"""
Piecewise-linear template T with slopes in {-n, 0, 1}

T is 0 outside the epochs; around t_k it falls with slope -n from t_k^- to
(t_k, r_psi(t_k)) and climbs back with slope 1 to the template t_k^+. The
breakpoints are the exact rational times, so T(t_k) = r_psi(t_k).
"""

import bisect
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from src.template.schedule import Schedule, fraction_text

logger = logging.getLogger(__name__)

Breakpoint = Tuple[Fraction, Fraction]


@dataclass(frozen=True)
class Template:
    n: int
    breakpoints: Tuple[Breakpoint, ...]

    def __post_init__(self):
        points = self.breakpoints
        if not points or points[0] != (0, 0):
            raise ValueError("template must start at (0, 0)")
        for (t_a, v_a), (t_b, v_b) in zip(points, points[1:]):
            if not t_b > t_a:
                raise ValueError(f"breakpoints out of order at t={t_b}")
            slope = (v_b - v_a) / (t_b - t_a)
            if slope not in (-self.n, 0, 1):
                raise ValueError(f"slope {slope} on [{t_a}, {t_b}] is not one of -n, 0, 1")

    @property
    def horizon(self) -> Fraction:
        return self.breakpoints[-1][0]

    def slopes(self) -> List[Fraction]:
        points = self.breakpoints
        return [(v_b - v_a) / (t_b - t_a) for (t_a, v_a), (t_b, v_b) in zip(points, points[1:])]

    def value(self, t) -> Fraction:
        t = Fraction(t)
        if t < 0 or t > self.horizon:
            raise ValueError(f"t={t} outside [0, {self.horizon}]")
        times = [p[0] for p in self.breakpoints]
        i = bisect.bisect_right(times, t) - 1
        if i >= len(times) - 1:
            return self.breakpoints[-1][1]
        (t_a, v_a), (t_b, v_b) = self.breakpoints[i], self.breakpoints[i + 1]
        return v_a + (v_b - v_a) * (t - t_a) / (t_b - t_a)

    def first_below(self, r) -> Optional[int]:
        """First integer time where T < r(t), None when T dominates r on the grid."""
        for t in range(0, math.floor(self.horizon) + 1):
            if self.value(t) < r(t):
                return t
        return None


def build_template(schedule: Schedule, horizon=None) -> Template:
    """
    Template of a schedule on [0, horizon]

    The horizon defaults to the last template t_k^+ (or 1 for an empty schedule).
    """
    psi = schedule.psi
    points: List[Breakpoint] = [(Fraction(0), Fraction(0))]
    for epoch in schedule.epochs:
        points.append((epoch.t_minus, Fraction(0)))
        points.append((Fraction(epoch.t), epoch.r))
        points.append((epoch.t_plus_template, Fraction(0)))
    end = Fraction(horizon) if horizon is not None else (points[-1][0] if schedule.epochs else Fraction(1))
    if end < points[-1][0]:
        raise ValueError(f"horizon {end} ends before the last epoch at {points[-1][0]}")
    if end > points[-1][0]:
        points.append((end, Fraction(0)))
    template = Template(n=psi.n, breakpoints=tuple(points))
    logger.debug(f"Template with {len(points)} breakpoints on [0, {end}]")
    return template


def template_rows(template: Template, psi=None) -> List[Dict]:
    """Breakpoint rows (t, T, r_psi) with rationals as num/den."""
    rows = []
    for t, value in template.breakpoints:
        row = {"t": fraction_text(t), "T": fraction_text(value)}
        if psi is not None:
            row["r_psi"] = fraction_text(psi.r(t))
        rows.append(row)
    return rows
