import pytest
from fractions import Fraction

from src.exceptions import UnsatisfiablePredicate
from src.template.psi import PsiFunction, lambda_gamma, r_psi, slope_conditions
from src.template.schedule import (
    choose_schedule,
    default_t0,
    epoch_checkpoints,
    preset_constants,
    schedule_document,
    validate_schedule,
)
from src.template.template import Template, build_template, template_rows


class TestPsi:
    """Tests for psi, r_psi and the slope conditions"""

    def test_closed_form(self):
        """r_psi(t) = -nt + ((n+1)t + c0)/s"""
        psi = PsiFunction(n=1, s=3)
        assert r_psi(psi, 9) == -3
        assert psi.r(10) == Fraction(-10, 3)
        affine = PsiFunction(n=2, s=2, family="affine", c0=1)
        assert affine.r(4) == -8 + Fraction(13, 2)

    def test_psi_hat(self):
        psi = PsiFunction(n=1, s=Fraction(5, 2))
        assert psi.psi_hat(3) == -8
        assert psi.psi_hat(0) == 0

    def test_psi_inverse_round_trip(self):
        psi = PsiFunction(n=2, s=3, family="affine", c0=Fraction(1, 2))
        for h in (0, 5, 17):
            assert psi.Psi_inverse(psi.log_Psi(h)) == h

    def test_decay_too_slow(self):
        """s n <= n + 1 is outside the range the construction handles"""
        with pytest.raises(ValueError):
            PsiFunction(n=1, s=2)
        with pytest.raises(ValueError):
            PsiFunction(n=2, s=Fraction(3, 2))

    def test_power_family_has_no_constant(self):
        with pytest.raises(ValueError):
            PsiFunction(n=1, s=3, c0=1)

    def test_lambda_gamma(self):
        """lambda = s and gamma = (ns - n - 1)/(ns)"""
        assert lambda_gamma(PsiFunction(n=1, s=3)) == (3, Fraction(1, 3))
        assert lambda_gamma(PsiFunction(n=2, s=2)) == (2, Fraction(1, 4))

    def test_slope_conditions_hold(self):
        assert slope_conditions(PsiFunction(n=1, s=3)).holds
        assert slope_conditions(PsiFunction(n=3, s=2)).holds

    def test_slope_conditions_custom_r(self):
        """r(t) = -2t falls faster than -nt for n = 1"""
        psi = PsiFunction(n=1, s=3)
        verdict = slope_conditions(psi, horizon=20, r=lambda t: Fraction(-2 * t))
        assert not verdict.holds
        assert verdict.violation == "r + nt increasing"
        assert verdict.t == 1

    def test_slope_conditions_constant_r(self):
        """A constant exponent function never tends to -inf"""
        psi = PsiFunction(n=1, s=3)
        verdict = slope_conditions(psi, horizon=20, r=lambda t: Fraction(0))
        assert not verdict.holds
        assert verdict.violation == "r tends to -inf"

    def test_r_psi_negative_time(self):
        with pytest.raises(ValueError):
            r_psi(PsiFunction(n=1, s=3), -1)


class TestSchedule:
    """Tests for the epoch schedule"""

    @pytest.fixture
    def psi(self):
        return PsiFunction(n=1, s=3)

    @pytest.fixture
    def desk(self, psi):
        constants, M = preset_constants("desk", psi)
        return constants, M

    def test_desk_constants(self, desk):
        """desk for n = 1, s = 3: R0 = 2, R1 = 10 R0/(1 - 1/3) = 30, R2 = 16, M = 2"""
        constants, M = desk
        assert M == 2
        assert constants.R0 == 2
        assert constants.R1 == 30
        assert constants.R2 == 16
        assert constants.R3 == 2
        assert constants.C1 == 4

    def test_paper_constants(self, psi):
        """paper: R0 = 4n^2, R2 = R1 + 6 R0 + C1 + 1"""
        constants, M = preset_constants("paper", psi)
        assert constants.R0 == 4
        assert constants.R1 == 60
        assert constants.R2 == 60 + 24 + 4 + 1

    def test_overrides(self, psi):
        constants, _ = preset_constants("desk", psi, {"R3": "1", "R2": None})
        assert constants.R3 == 1
        assert constants.R2 == 16

    def test_unknown_preset(self, psi):
        with pytest.raises(ValueError):
            preset_constants("lab", psi)

    def test_default_t0(self, psi):
        """Smallest t0 with -r_psi(t0) >= (2n-1)M + 1 = 3"""
        assert default_t0(psi, 2) == 9

    def test_desk_schedule(self, psi, desk):
        """t1 = 360 and growth 60 pass every predicate with K = 2"""
        constants, M = desk
        schedule = choose_schedule(psi, q=2, M=M, constants=constants, K=2, t1=360, growth=60)
        assert schedule.t0 == 9
        first, second = schedule.epochs
        assert (first.t, first.M_k, first.l_minus, first.l_plus) == (360, 3, 108, 204)
        assert (second.t, second.M_k, second.l_minus, second.l_plus) == (21600, 120, 6720, 11760)
        assert first.t_minus == 240
        assert first.t_plus_template == 480
        assert all(p.holds for p in validate_schedule(schedule))
        assert schedule.N == 16
        assert schedule.last_level == 11760
        assert epoch_checkpoints(schedule) == [(108, 204), (6720, 11760)]

    def test_epoch_at_level(self, psi, desk):
        constants, M = desk
        schedule = choose_schedule(psi, q=2, M=M, constants=constants, K=2, t1=360, growth=60)
        assert schedule.epoch_at_level(1) == (1, False)
        assert schedule.epoch_at_level(108) == (1, False)
        assert schedule.epoch_at_level(109) == (1, True)
        assert schedule.epoch_at_level(204) == (1, True)
        assert schedule.epoch_at_level(205) == (2, False)
        assert schedule.epoch_at_level(20000) == (3, False)
        assert schedule.bound_M(3) == 7200

    def test_desk_n2(self):
        """n = 2, s = 2 with M = 1: t0 = 8, M_1 = 4, levels (328, 544]"""
        psi = PsiFunction(n=2, s=2)
        constants, M = preset_constants("desk", psi)
        assert M == 1
        schedule = choose_schedule(psi, q=2, M=M, constants=constants, K=1, t1=480, growth=60)
        epoch = schedule.epoch(1)
        assert schedule.t0 == 8
        assert epoch.M_k == 4
        assert (epoch.l_minus, epoch.l_plus) == (328, 544)
        assert schedule.N == 8

    def test_paper_schedule(self, psi):
        constants, M = preset_constants("paper", psi)
        schedule = choose_schedule(psi, q=2, M=M, constants=constants, K=2, t1=600, growth=100)
        assert schedule.epoch(1).t == 600
        assert all(p.holds for p in validate_schedule(schedule))

    def test_interleaving_fails_for_small_t1(self, psi):
        constants, M = preset_constants("paper", psi)
        with pytest.raises(UnsatisfiablePredicate) as excinfo:
            choose_schedule(psi, q=2, M=M, constants=constants, K=2, t1=30, growth=100)
        assert excinfo.value.predicate == "interleaving"
        assert excinfo.value.exit_code == 3

    def test_sup_fails_for_desk_t1_60(self, psi, desk):
        constants, M = desk
        with pytest.raises(UnsatisfiablePredicate) as excinfo:
            choose_schedule(psi, q=2, M=M, constants=constants, K=1, t1=60, growth=60)
        assert excinfo.value.predicate == "sup"

    def test_r1_eight_fails_sup_at_t1_60(self, psi):
        """R1 = 8, t1 = 60, growth 12, K = 3: sup_r(16) = -16/3 is not below -5 R0 M_1 = -30"""
        constants, M = preset_constants("desk", psi, {"R1": 8})
        with pytest.raises(UnsatisfiablePredicate) as excinfo:
            choose_schedule(psi, q=2, M=M, constants=constants, K=3, t1=60, growth=12)
        assert excinfo.value.predicate == "sup"
        assert excinfo.value.epoch == 1

    def test_r1_eight_leaves_no_witness_window(self, psi):
        """At t1 = 360 heights [210, 222] give t_x <= 333, below floor(360 - 8 * 3) = 336"""
        constants, M = preset_constants("desk", psi, {"R1": 8})
        with pytest.raises(UnsatisfiablePredicate) as excinfo:
            choose_schedule(psi, q=2, M=M, constants=constants, K=2, t1=360, growth=60)
        assert excinfo.value.predicate == "witness_window"
        assert excinfo.value.epoch == 1

    def test_witness_window_on_desk_schedule(self, psi, desk):
        constants, M = desk
        schedule = choose_schedule(psi, q=2, M=M, constants=constants, K=2, t1=360, growth=60)
        windows = [p for p in validate_schedule(schedule) if p.name == "witness_window"]
        assert [p.holds for p in windows] == [True, True]
        assert windows[0].lhs == 333
        assert windows[0].rhs == 270

    def test_linear_r_psi_unsatisfiable(self):
        """gamma (2n - 1) > 1 for n = 2, s = 3 leaves no epoch time"""
        psi = PsiFunction(n=2, s=3)
        constants, M = preset_constants("desk", psi)
        with pytest.raises(UnsatisfiablePredicate) as excinfo:
            choose_schedule(psi, q=2, M=M, constants=constants, K=1, growth=60)
        assert excinfo.value.predicate == "drop_at_floor"

    def test_explicit_times(self, psi, desk):
        constants, M = desk
        schedule = choose_schedule(psi, q=2, M=M, constants=constants, K=2, times=[360, 21600])
        assert [e.t for e in schedule.epochs] == [360, 21600]
        with pytest.raises(ValueError):
            choose_schedule(psi, q=2, M=M, constants=constants, K=2, times=[360])

    def test_growth_must_exceed_one(self, psi, desk):
        constants, M = desk
        with pytest.raises(ValueError):
            choose_schedule(psi, q=2, M=M, constants=constants, K=1, growth=1)

    def test_document_uses_fraction_text(self, psi, desk):
        constants, M = desk
        schedule = choose_schedule(psi, q=2, M=M, constants=constants, K=2, t1=360, growth=60)
        document = schedule_document(schedule)
        assert document["gamma"] == "1/3"
        assert document["constants"]["R1"] == "30/1"
        assert document["epochs"][0]["r_psi"] == "-120/1"
        assert all(p["holds"] for p in document["predicates"])


class TestTemplate:
    """Tests for the piecewise-linear template"""

    @pytest.fixture
    def schedule(self):
        psi = PsiFunction(n=1, s=3)
        constants, M = preset_constants("desk", psi)
        return choose_schedule(psi, q=2, M=M, constants=constants, K=2, t1=360, growth=60)

    def test_breakpoints(self, schedule):
        """T falls from t_1^- = 240 to (360, -120) and climbs back to 0 at 480"""
        template = build_template(schedule)
        assert template.breakpoints[:4] == ((0, 0), (240, 0), (360, -120), (480, 0))
        assert template.value(300) == -60
        assert template.value(420) == -60
        assert template.value(100) == 0
        assert set(template.slopes()) <= {-1, 0, 1}

    def test_template_meets_r_psi_at_epochs(self, schedule):
        template = build_template(schedule)
        for epoch in schedule.epochs:
            assert template.value(epoch.t) == schedule.psi.r(epoch.t)

    def test_horizon(self, schedule):
        template = build_template(schedule, horizon=30000)
        assert template.horizon == 30000
        assert template.value(30000) == 0
        with pytest.raises(ValueError):
            build_template(schedule, horizon=1000)

    def test_rows(self, schedule):
        rows = template_rows(build_template(schedule), schedule.psi)
        assert rows[2] == {"t": "360/1", "T": "-120/1", "r_psi": "-120/1"}

    def test_invalid_slope(self):
        with pytest.raises(ValueError):
            Template(n=1, breakpoints=((Fraction(0), Fraction(0)), (Fraction(2), Fraction(-1))))
