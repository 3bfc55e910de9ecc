import random

import pytest

from src.algebra.field import F2, FieldSpec
from src.algebra.laurent import LaurentSeries, LaurentVector
from src.algebra.poly import poly_gcd, poly_ring
from src.algebra.text import parse_poly, parse_vector
from src.cantor.approximation import builtin_point
from src.dynamics.dani import dani_backward, dani_forward
from src.dynamics.flow import FlowSession, NormProfile, c_value, minima, required_floor
from src.dynamics.rational import RationalPoint, dist
from src.dynamics.trajectory import check_exactness_certificate, trajectory
from src.exceptions import PrecisionExhausted
from src.template.psi import PsiFunction


def xstar(floor=-80):
    """Root of x^2 + Xx + 1 over F_2, continued fraction [0; X, X, ...]"""
    return builtin_point("xstar", n=1, floor=floor)


class TestFlow:
    """Tests for c_x(t) on the diagonal flow"""

    def test_zero_point_decays(self):
        """For x = 0 the vector (1, 0) has norm -nt"""
        x = builtin_point("zero", n=2)
        assert [c_value(x, t) for t in range(5)] == [0, -2, -4, -6, -8]

    def test_time_zero(self):
        """Every point of the unit ball has c_x(0) = 0"""
        x = parse_vector("X^-1+X^-4 (prec -9); 1+X^-2 (prec -9)", F2)
        assert c_value(x, 0) == 0

    def test_xstar_is_bounded(self):
        """Convergent denominators of degree k at distance -(2k+1) keep c_x(t) = 0"""
        x = xstar()
        assert all(c_value(x, t) == 0 for t in range(0, 30))

    def test_minima_sum_to_zero(self):
        """The flow preserves covolume"""
        x = xstar()
        for t in (3, 11, 20):
            assert sum(minima(x, t).d) == 0

    def test_precision_exhausted(self):
        """A floor of -4 cannot certify the minima at t = 10"""
        x = xstar(floor=-4)
        with pytest.raises(PrecisionExhausted) as excinfo:
            c_value(x, 10)
        assert excinfo.value.required_floor == required_floor(1, 10)

    def test_refine_matches_fresh_session(self):
        """Refining a truncation and advancing gives the same c as a fresh reduction"""
        coarse, fine = xstar(floor=-8), xstar(floor=-40)
        session = FlowSession(coarse, 2)
        session.refine(fine, dt=10)
        assert session.t == 12
        assert session.c() == c_value(fine, 12)

    @pytest.mark.slow
    def test_minima_sum_to_zero_on_random_points(self):
        """1000 random flow lattices over F_2, F_3, F_5 with n <= 3 and t <= 50 keep covolume 0"""
        rng = random.Random(20241018)
        for _ in range(1000):
            field = FieldSpec(p=rng.choice([2, 3, 5]))
            n, t = rng.randint(1, 3), rng.randint(0, 50)
            x = builtin_point("random", n=n, floor=required_floor(n, t) - 1, field_spec=field,
                              seed=rng.randrange(2 ** 32))
            assert sum(minima(x, t).d) == 0

    @pytest.mark.slow
    def test_required_floor_always_certifies(self):
        """A truncation at -(n+1)t certifies c_x(t) for every point"""
        rng = random.Random(7)
        for _ in range(200):
            n, t = rng.randint(1, 3), rng.randint(0, 40)
            x = builtin_point("random", n=n, floor=required_floor(n, t), seed=rng.randrange(2 ** 32))
            assert FlowSession(x, t).certified()

    def test_refine_rejects_disagreeing_point(self):
        session = FlowSession(xstar(floor=-8), 0)
        other = parse_vector("X^-2 (prec -20)", F2)
        with pytest.raises(ValueError):
            session.refine(other)


class TestRational:
    """Tests for rational points and distances"""

    def test_distance_of_convergent(self):
        """The convergent p_k/q_k of x* lies at distance q^-(2k+1)"""
        x = xstar()
        session = FlowSession(x, 3)
        v = RationalPoint.from_vector(session.shortest())
        assert v.g.deg in (2, 3)
        assert dist(x, v) == -(2 * v.g.deg + 1)

    def test_monic_normalization(self):
        from src.algebra.field import FieldSpec
        from src.algebra.poly import poly_ring
        f3 = FieldSpec(p=3)
        ring = poly_ring(f3)
        v = RationalPoint(ring.monomial(2, 1), (ring.constant(1),))
        assert v.g.lc == 1
        assert v.f[0] == ring.constant(2)
        assert v.height == 1

    def test_zero_denominator(self):
        ring = type(parse_poly("X", F2))
        with pytest.raises(ValueError):
            RationalPoint(ring.zero(), (ring.one(),))

    def test_distance_below_precision(self):
        """1/X is exactly the truncation of X^-1 (prec -6); the distance is undecidable"""
        x = parse_vector("X^-1 (prec -6)", F2)
        v = RationalPoint(parse_poly("X", F2), (parse_poly("1", F2),))
        with pytest.raises(PrecisionExhausted):
            dist(x, v)

    def test_norm_profile(self):
        """||g_t u_x v|| = max(deg g - t, t + log|gx - f|) for n = 1"""
        x = xstar()
        v = RationalPoint(parse_poly("X", F2), (parse_poly("1", F2),))
        profile = NormProfile(x, v.as_vector())
        assert profile.e == -2
        assert profile.at(0) == 1
        assert profile.at(1) == 0
        assert profile.at(4) == 2
        assert profile.first_coordinate_attains(0)


class TestDani:
    """Tests for the approximation/short-vector correspondence"""

    @pytest.fixture
    def psi(self):
        return PsiFunction(n=1, s=3)

    def test_forward_matches_height(self, psi):
        """The first convergent 1/X of x* maps to log Psi(H) = 3/2, rounded up to t = 2"""
        x = xstar()
        v = RationalPoint(parse_poly("X", F2), (parse_poly("1", F2),))
        forward = dani_forward(x, v, psi)
        assert forward.t == 2
        assert forward.adjusted
        assert forward.norm == 0
        assert forward.norm_bound_holds
        assert forward.distance == -3
        assert forward.distance_ok

    def test_backward_from_zero(self, psi):
        """For x = 0 the shortest vector (1, 0) gives back v = 0 at every time"""
        x = builtin_point("zero", n=1)
        v = dani_backward(x, 3, psi)
        assert v is not None
        assert v.g.deg == 0
        assert v.height == 0

    def test_backward_badly_approximable(self, psi):
        """c_x*(4) = 0 lies above r_psi(4) = -4/3, so nothing comes back"""
        assert dani_backward(xstar(), 4, psi) is None

    @pytest.mark.slow
    def test_round_trip_on_random_conforming_points(self, psi):
        """x at distance exactly psi_hat(h) from a reduced v of even height: both flags hold and backward gives v"""
        rng = random.Random(20241018)
        done = 0
        while done < 200:
            field = rng.choice([F2, FieldSpec(p=3)])
            ring = poly_ring(field)
            h = 2 * rng.randint(1, 6)
            g = ring.from_coeffs([rng.randrange(field.q) for _ in range(h)] + [1])
            f = ring.from_coeffs([rng.randrange(field.q) for _ in range(h)])
            if poly_gcd(f, g).deg > 0:
                continue
            floor = -3 * h - 20
            noise = [(1, -3 * h)] + [(rng.randrange(field.q), e) for e in range(-3 * h - 1, floor, -1)]
            x = LaurentVector((LaurentSeries.from_rational(f, g, floor) + LaurentSeries.from_terms(ring, noise, floor),))
            v = RationalPoint(g, (f,))
            forward = dani_forward(x, v, psi)
            assert forward.t == 3 * h // 2
            assert not forward.adjusted
            assert forward.norm_bound_holds
            assert forward.e1_attains
            assert forward.distance == -3 * h
            assert dani_backward(x, forward.t, psi) == v
            done += 1

    def test_unknown_mode(self, psi):
        with pytest.raises(ValueError):
            dani_backward(xstar(), 2, psi, mode="bogus")


class TestTrajectory:
    """Tests for trajectories and the exactness certificate"""

    def test_zero_trajectory(self):
        x = builtin_point("zero", n=1, floor=-12)
        traj = trajectory(x, 0, 6)
        assert traj.values == (0, -1, -2, -3, -4, -5, -6)
        assert traj.deltas() == [-1] * 6

    def test_slack_summary(self):
        """c_0(t) - r_psi(t) = -t + t/3 is smallest at the horizon"""
        psi = PsiFunction(n=1, s=3)
        traj = trajectory(builtin_point("zero", n=1, floor=-12), 0, 6)
        summary = traj.slack_summary(psi)
        assert summary["min_slack"] == "-4/1"
        assert summary["argmin"] == 6
        assert summary["first_negative_t"] == 1

    def test_rows_with_witnesses(self):
        psi = PsiFunction(n=1, s=3)
        traj = trajectory(xstar(floor=-20), 0, 4, witnesses=True)
        rows = traj.rows(psi)
        assert len(rows) == 5
        assert rows[3]["r_psi_num"] == -1
        assert rows[3]["r_psi_den"] == 1
        assert rows[0]["witness"].startswith("(")

    def test_invalid_range(self):
        with pytest.raises(ValueError):
            trajectory(xstar(), 5, 2)

    def test_certificate_lower_bound_violation(self):
        """x = 0 drops below ceil(r_psi) right after t0"""
        psi = PsiFunction(n=1, s=3)
        traj = trajectory(builtin_point("zero", n=1, floor=-12), 0, 6)
        verdict = check_exactness_certificate(traj, psi, 1, [3])
        assert not verdict.holds
        assert verdict.reason == "lower bound"
        assert verdict.t == 1

    def test_certificate_needs_equality(self):
        """x* stays at 0 >= ceil(r_psi); equality needs ceil(-t/3) = 0, i.e. t <= 2"""
        psi = PsiFunction(n=1, s=3)
        traj = trajectory(xstar(), 0, 12)
        assert check_exactness_certificate(traj, psi, 0, [(1, 2)]).holds
        verdict = check_exactness_certificate(traj, psi, 0, [(6, 9)])
        assert not verdict.holds
        assert verdict.reason == "no equality in window"
