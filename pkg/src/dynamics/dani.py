"""
Both directions of the correspondence between rational approximations of x
and short vectors of g_t u_x F_q[X]^{n+1}

Forward: a rational point v with d(x, v) <= psi(H(v)) gives a vector of norm
at most q^{-nt} Psi^-1(q^{nt}) at the time t with q^{nt} = Psi(H(v)).
Backward: a short vector at time t whose first coordinate attains its norm
gives back such a rational point.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from src.algebra.degree import NEG_INF, DegValue, ceil_q, floor_q
from src.algebra.laurent import LaurentVector
from src.dynamics.flow import FlowSession, NormProfile
from src.dynamics.rational import RationalPoint, dist
from src.template.psi import PsiFunction

logger = logging.getLogger(__name__)

MODES = ("e1", "monotone")


@dataclass(frozen=True)
class DaniForward:
    t: int
    norm_bound_holds: bool
    e1_attains: bool
    adjusted: bool
    norm: DegValue
    bound: int
    distance: DegValue
    distance_ok: bool

    def as_tuple(self):
        return self.t, self.norm_bound_holds, self.e1_attains


def dani_forward(x: LaurentVector, v: RationalPoint, psi: PsiFunction) -> DaniForward:
    """
    Flow time matched to the height of v, and the norm checks at that time

    When log Psi(H(v)) is not a multiple of n the time is rounded up and the
    bound is weakened by the rounding; `adjusted` reports it.
    """
    h = v.height
    exact_t = psi.log_Psi(h) / psi.n
    t = ceil_q(exact_t)
    adjusted = t != exact_t
    if t < 0:
        raise ValueError(f"height {h} maps to negative flow time {exact_t}")
    bound = floor_q(h - psi.n * exact_t + (t - exact_t))
    profile = NormProfile(x, v.as_vector())
    norm = profile.at(t)
    distance = dist(x, v)
    result = DaniForward(
        t=t,
        norm_bound_holds=norm <= bound,
        e1_attains=profile.first_coordinate_attains(t),
        adjusted=adjusted,
        norm=norm,
        bound=bound,
        distance=distance,
        distance_ok=distance <= psi.log_psi(h),
    )
    if adjusted:
        logger.info(f"log Psi(H)={psi.log_Psi(h)} is not a multiple of n={psi.n}; using t={t}")
    return result


def dani_backward(x: LaurentVector, t: int, psi: PsiFunction, mode: str = "e1") -> Optional[RationalPoint]:
    """
    Rational point read off the shortest vector of g_t u_x F_q[X]^{n+1}

    Args:
        x: Point of Z_O^n, truncated finely enough for time t
        t: Flow time
        psi: Approximation function
        mode: 'e1' needs the first coordinate to attain the norm; 'monotone'
            needs alpha(H) = H psi(H) non-increasing and checks both bounds

    Returns:
        v with H(v) <= Psi^-1(q^{nt}) and d(x, v) <= psi(H(v)), or None
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode '{mode}' (expected one of {', '.join(MODES)})")
    if mode == "monotone" and not psi.alpha_monotone:
        raise ValueError(f"alpha(H) = H psi(H) is increasing for s={psi.s}")
    session = FlowSession(x, t)
    c = session.c()
    vector = session.shortest()
    g = vector[0]
    if g.is_zero():
        return None
    if c > floor_q(psi.r(t)):
        logger.debug(f"c_x({t})={c} above r_psi({t})={psi.r(t)}; no approximation at this time")
        return None
    if mode == "e1" and g.deg - psi.n * t != c:
        return None
    v = RationalPoint.from_vector(vector)
    height_limit: Fraction = psi.Psi_inverse(psi.n * t)
    if v.height > height_limit:
        return None
    distance = dist(x, v)
    if distance is not NEG_INF and distance > psi.log_psi(v.height):
        return None
    return v
