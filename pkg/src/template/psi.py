"""
Approximation functions psi and the exponent function r_psi

Every value is kept in exponent form: log_psi(h) is log_q psi(q^h), an exact
Fraction. Two families are supported:

    power   log_psi(h) = -s h
    affine  log_psi(h) = -s h + c0

With Psi = psi^(-n/(n+1)) this gives the closed form
r_psi(t) = -n t + log_q Psi^-1(q^{nt}) = -n t + ((n+1) t + c0) / s.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Tuple

from src.algebra.degree import as_fraction, floor_q

logger = logging.getLogger(__name__)

FAMILIES = ("power", "affine")

# integer times sampled by slope_conditions when no horizon is given
DEFAULT_SAMPLE_HORIZON = 200


@dataclass(frozen=True)
class PsiFunction:
    n: int
    s: Fraction
    family: str = "power"
    c0: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "s", as_fraction(self.s))
        object.__setattr__(self, "c0", as_fraction(self.c0))
        if self.n < 1:
            raise ValueError(f"dimension n must be >= 1, got {self.n}")
        if self.family not in FAMILIES:
            raise ValueError(f"unsupported psi family '{self.family}' (expected one of {', '.join(FAMILIES)})")
        if self.family == "power" and self.c0:
            raise ValueError("the power family has no constant term; use family 'affine'")
        if self.s * self.n <= self.n + 1:
            raise ValueError(
                f"psi must decay faster than |q|^-(n+1)/n: s*n = {self.s * self.n} <= n+1 = {self.n + 1}"
            )

    def log_psi(self, h) -> Fraction:
        return -self.s * h + self.c0

    def psi_hat(self, h) -> int:
        """Largest integer exponent e with q^e <= psi(q^h)."""
        return floor_q(self.log_psi(h))

    def log_Psi(self, h) -> Fraction:
        """log_q Psi(q^h) with Psi = psi^(-n/(n+1))."""
        return Fraction(self.n, self.n + 1) * (self.s * h - self.c0)

    def Psi_inverse(self, y) -> Fraction:
        """Height exponent h with log_Psi(h) = y."""
        return (Fraction(self.n + 1, self.n) * y + self.c0) / self.s

    def log_alpha(self, h) -> Fraction:
        """log_q of alpha(H) = H psi(H)."""
        return h + self.log_psi(h)

    @property
    def alpha_monotone(self) -> bool:
        """alpha(H) = H psi(H) is non-increasing."""
        return self.s >= 1

    def r(self, t) -> Fraction:
        return -self.n * t + self.Psi_inverse(self.n * t)

    @property
    def r_slope(self) -> Fraction:
        return -self.n + Fraction(self.n + 1) / self.s

    def sup_r(self, t0) -> Fraction:
        """sup over t >= t0 of r_psi(t); r_psi is linear and decreasing."""
        return self.r(t0)

    def describe(self) -> str:
        if self.family == "power":
            return f"psi(h) = q^(-{self.s} h), n={self.n}"
        return f"psi(h) = q^(-{self.s} h + {self.c0}), n={self.n}"

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "family": self.family,
            "s": f"{self.s.numerator}/{self.s.denominator}",
            "c0": f"{self.c0.numerator}/{self.c0.denominator}",
        }


def r_psi(psi: PsiFunction, t: int) -> Fraction:
    """r_psi(t) = -nt + log Psi^-1(q^{nt}), exact."""
    if t < 0:
        raise ValueError(f"r_psi is defined for t >= 0, got {t}")
    return psi.r(t)


def lambda_gamma(psi: PsiFunction) -> Tuple[Fraction, Fraction]:
    """
    Lower order lambda_psi of 1/psi and gamma_psi = -limsup r_psi(t)/(nt)

    Both families share the linear part -s h, so lambda = s and
    gamma = (ns - n - 1) / (ns).
    """
    if psi.family not in FAMILIES:
        raise ValueError(f"unsupported psi family '{psi.family}'")
    n, s = psi.n, psi.s
    return s, (n * s - n - 1) / (n * s)


@dataclass(frozen=True)
class SlopeVerdict:
    holds: bool
    violation: Optional[str] = None
    t: Optional[int] = None
    detail: str = ""


def slope_conditions(
    psi: PsiFunction,
    horizon: int = DEFAULT_SAMPLE_HORIZON,
    r: Optional[Callable[[int], Fraction]] = None,
) -> SlopeVerdict:
    """
    Check that r - t is decreasing, r + nt is increasing and r tends to -inf

    Args:
        psi: Function whose r_psi is checked (also supplies n)
        horizon: Largest sampled integer time
        r: Replacement exponent function, for families without a closed form

    Returns:
        Verdict naming the first violated condition
    """
    n = psi.n
    evaluate = r or psi.r
    previous = evaluate(0)
    for t in range(1, horizon + 1):
        current = evaluate(t)
        if not current - t < previous - (t - 1):
            return SlopeVerdict(False, "r - t decreasing", t, f"r({t}) - {t} = {current - t} >= {previous - t + 1}")
        if not current + n * t > previous + n * (t - 1):
            return SlopeVerdict(False, "r + nt increasing", t, f"r({t}) + {n * t} = {current + n * t}")
        previous = current
    if r is None:
        slope = psi.r_slope
        if not (-n < slope < 1):
            return SlopeVerdict(False, "closed-form slope", None, f"slope {slope} outside (-{n}, 1)")
        if slope >= 0:
            return SlopeVerdict(False, "r tends to -inf", None, f"slope {slope} >= 0")
    elif not evaluate(horizon) < evaluate(0):
        return SlopeVerdict(False, "r tends to -inf", horizon, f"r({horizon}) = {evaluate(horizon)}")
    return SlopeVerdict(True)
