"""
The diagonal flow on u_x F_q[X]^{n+1}

For x in F_q((X^-1))^n the lattice g_t u_x F_q[X]^{n+1} is spanned by the
images of (g, f_1, ..., f_n), whose coordinates are g * X^{-nt} and
(f_i - g x_i) * X^t. The truncation of x is cleared to a common denominator
X^P, so the polynomial basis is

    row 0:  (1, -a_1, ..., -a_n)            with x_i ~ a_i / X^P
    row i:  X^P e_i

with shifts (-nt, t, ..., t) and column offsets (0, -P, ..., -P). Coefficient
vectors relative to this basis are exactly (g, f_1, ..., f_n).

A result computed from a truncation is only returned when it is certified for
every point agreeing with the truncation above its floor.
"""

import logging
from dataclasses import dataclass
from typing import Sequence, Tuple

from src.algebra.degree import NEG_INF, DegValue
from src.algebra.laurent import LaurentSeries, LaurentVector
from src.algebra.poly import Poly
from src.exceptions import PrecisionExhausted
from src.lattice.shifted import MinimaProfile, ReductionSession, ShiftedLattice, Vector

logger = logging.getLogger(__name__)


def flow_shifts(n: int, t: int) -> Tuple[int, ...]:
    return (-n * t,) + (t,) * n


def required_floor(n: int, t: int) -> int:
    """
    Floor at which every flow lattice at time t certifies

    A reduced row with denominator g has degree at least deg g - nt, and a
    perturbation below floor -(n+1)t moves it by at most deg g - (n+1)t + t,
    so the certificate never fails. A session that will advance past t
    without a finer truncation needs the floor of its last time instead.
    """
    return -(n + 1) * t


def _flow_basis(x: LaurentVector) -> Tuple[int, Tuple[Vector, ...]]:
    P, numerators = x.cleared()
    ring = x.ring
    zero = ring.zero()
    top = (ring.one(),) + tuple(-a for a in numerators)
    rows = [top]
    for i in range(x.n):
        row = [zero] * (x.n + 1)
        row[i + 1] = ring.monomial(1, P)
        rows.append(tuple(row))
    return P, tuple(rows)


def flow_lattice(x: LaurentVector, t: int) -> ShiftedLattice:
    """The lattice of the truncation of x, without any precision check."""
    P, basis = _flow_basis(x)
    n = x.n
    return ShiftedLattice(basis, flow_shifts(n, t), (0,) + (-P,) * n, covolume=0)


@dataclass(frozen=True)
class FlowContext:
    """A point x of Z_O^n at flow time t."""

    n: int
    x: LaurentVector
    t: int

    def __post_init__(self):
        if self.x.n != self.n:
            raise ValueError(f"point has {self.x.n} coordinates, expected {self.n}")

    def lattice(self) -> ShiftedLattice:
        return apply_flow(self.x, self.t)

    def c(self) -> int:
        return c_value(self.x, self.t)


class FlowSession:
    """
    Incremental reduction of g_t u_x F_q[X]^{n+1}

    advance() moves t; refine() replaces x by a finer truncation (new
    coefficients below the current floor) while keeping the reduced basis.
    Single owner.
    """

    def __init__(self, x: LaurentVector, t: int = 0):
        self.x = x
        self.n = x.n
        self.t = t
        self.P, self.numerators = x.cleared()
        self.session = ReductionSession(flow_lattice(x, t))

    def copy(self) -> "FlowSession":
        other = object.__new__(FlowSession)
        other.x, other.n, other.t, other.P = self.x, self.n, self.t, self.P
        other.numerators = list(self.numerators)
        other.session = self.session.copy()
        return other

    @property
    def steps(self) -> int:
        return self.session.steps

    def advance(self, dt: int = 1) -> None:
        self.t += dt
        self.session.advance(dt)

    def refine(self, x: LaurentVector, dt: int = 0) -> None:
        """
        Continue with a finer truncation of the same point, optionally moving t

        Args:
            x: Truncation agreeing with the current one above the current floor
            dt: Flow time to add in the same reduction pass
        """
        if x.n != self.n:
            raise ValueError("refinement changes the dimension")
        P_new, numerators = x.cleared()
        target = max(self.P, P_new)
        k = target - self.P
        old_floor = self.x.floor
        session = self.session
        deltas = []
        for a_new, a_old in zip(numerators, self.numerators):
            delta = (a_new << (target - P_new)) - (a_old << k)
            if delta and (old_floor is NEG_INF or delta.deg > old_floor + target):
                raise ValueError("refinement disagrees with the current truncation")
            deltas.append(delta)
        for i in range(session.dim):
            g = session.trans[i][0]
            row = session.rows[i]
            session.rows[i] = [row[0]] + [(row[j + 1] << k) - g * deltas[j] for j in range(self.n)]
        session.offsets = [0] + [-target] * self.n
        if dt:
            self.t += dt
            session.shifts = list(flow_shifts(self.n, self.t))
        self.x = x
        self.P = target
        self.numerators = [a << (target - P_new) for a in numerators]
        session.reduce()

    def certified(self) -> bool:
        return self.session.certify(self.x.floor)

    def _check(self) -> None:
        if not self.certified():
            raise PrecisionExhausted(
                f"truncation with floor {self.x.floor} cannot certify minima at t={self.t}",
                required_floor=required_floor(self.n, self.t),
            )

    def c(self) -> int:
        """Certified first minimum exponent c_x(t)."""
        self._check()
        return self.session.first_minimum()

    def profile(self) -> MinimaProfile:
        self._check()
        return self.session.profile()

    def shortest(self) -> Vector:
        self._check()
        return self.session.shortest()


def apply_flow(x: LaurentVector, t: int) -> ShiftedLattice:
    """
    Lattice g_t u_x F_q[X]^{n+1} for a truncated x

    Raises:
        PrecisionExhausted: the truncation cannot certify the minima at time t
    """
    session = FlowSession(x, t)
    session._check()
    return flow_lattice(x, t)


def c_value(x: LaurentVector, t: int) -> int:
    """c_x(t) = log_q lambda_1(g_t u_x F_q[X]^{n+1})."""
    return FlowSession(x, t).c()


def minima(x: LaurentVector, t: int) -> MinimaProfile:
    return FlowSession(x, t).profile()


def shortest_flow_vector(x: LaurentVector, t: int) -> Vector:
    """Canonical (g, f_1, ..., f_n) attaining c_x(t)."""
    return FlowSession(x, t).shortest()


class NormProfile:
    """
    Exponents of g_t u_x v as a function of t

    ||g_t u_x v|| = max(deg g - nt, t + e) with e = max_i log|g x_i - f_i|.
    e is computed once; when a coordinate is unknown down to its floor only an
    upper bound for it is available and it must not decide the maximum.
    """

    def __init__(self, x: LaurentVector, vector: Sequence[Poly]):
        if len(vector) != x.n + 1:
            raise ValueError("vector must have n+1 entries (g, f_1, ..., f_n)")
        g, fs = vector[0], vector[1:]
        self.n = x.n
        self.g_deg = g.deg
        known, bounds = [], []
        for x_i, f_i in zip(x.coords, fs):
            residual = x_i.mul_poly(g) - LaurentSeries.from_poly(f_i)
            top = residual.top
            if top is NEG_INF and not residual.is_exact:
                bounds.append(residual.floor)
            else:
                known.append(top)
        self.e = max(known) if known else NEG_INF
        self.unknown_bound = max(bounds) if bounds else NEG_INF
        self.floor = x.floor

    def at(self, t: int) -> DegValue:
        head = self.g_deg - self.n * t if self.g_deg is not NEG_INF else NEG_INF
        best = max(head, self.e + t)
        if self.unknown_bound is not NEG_INF and self.unknown_bound + t > best:
            raise PrecisionExhausted(
                f"norm at t={t} depends on coefficients at or below the floor {self.floor}",
                required_floor=None if self.floor is NEG_INF else self.floor - 1,
            )
        return best

    def first_coordinate_attains(self, t: int) -> bool:
        head = self.g_deg - self.n * t if self.g_deg is not NEG_INF else NEG_INF
        return head == self.at(t)


def vector_norm(x: LaurentVector, vector: Sequence[Poly], t: int) -> DegValue:
    """Exact exponent of ||g_t u_x v|| for v = (g, f_1, ..., f_n)."""
    return NormProfile(x, vector).at(t)
