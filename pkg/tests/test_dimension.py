import math

import pytest
from itertools import product

from src.algebra.field import F2
from src.algebra.laurent import LaurentSeries, LaurentVector
from src.algebra.poly import poly_ring
from src.cantor.construction import build_cantor
from src.dimension.report import (
    box_dimension,
    branching_threshold,
    dimension_report,
    fit_box_counts,
    mass_alpha,
    theoretical_lower_bound,
)
from src.template.psi import PsiFunction
from src.template.schedule import choose_schedule, preset_constants

RING = poly_ring(F2)


def grid_points(depth):
    """Every x in Z_O with digits at X^-1..X^-depth, known to -depth"""
    points = []
    for digits in product((0, 1), repeat=depth):
        terms = [(1, -(i + 1)) for i, d in enumerate(digits) if d]
        points.append(LaurentVector((LaurentSeries.from_terms(RING, terms, floor=-depth),)))
    return points


class TestMassAlpha:
    """Tests for alpha_l from branching counts"""

    def test_power_of_base_is_exact(self):
        """b = 4 out of N = 16 per level gives alpha = 1/2 at every level"""
        alphas = mass_alpha([4, 4], 16)
        assert [a.ratio.text() for a in alphas] == ["1/2", "1/2"]
        assert alphas[1].product == 16

    def test_single_branch(self):
        assert mass_alpha([1], 16)[0].ratio.text() == "0/1"

    def test_irrational_ratio_is_text(self):
        alpha = mass_alpha([3], 16)[0]
        assert alpha.ratio.exact is None
        assert alpha.ratio.text() == "log(3)/log(16)"
        assert alpha.ratio.approx == pytest.approx(0.396241, abs=1e-6)

    def test_bare_counts_need_N(self):
        with pytest.raises(ValueError):
            mass_alpha([2, 2])

    def test_empty_level(self):
        with pytest.raises(ValueError):
            mass_alpha([2, 0], 16)


class TestLowerBound:
    """Tests for the branching threshold and the theoretical bound"""

    def test_threshold_exact_root(self):
        """16 - 16^(1/2) = 12 exactly"""
        assert branching_threshold(16, 1, 1) == (12, 12)

    def test_threshold_irrational(self):
        """10 - sqrt(10) lies between 6 and 7"""
        assert branching_threshold(10, 1, 1) == (6, 7)

    def test_no_loss(self):
        assert branching_threshold(16, 0, 2) == (256, 256)

    def test_bound_text(self):
        bound = theoretical_lower_bound(16, 1, 1, 3)
        assert bound.text() == "log(12)/log(16) * 2/3"
        assert bound.approx == pytest.approx(0.5975, abs=1e-4)

    def test_bound_exact(self):
        """R3 = 2 leaves floor 8 of 16: log_16 8 * 2/3 = 1/2"""
        assert theoretical_lower_bound(16, 2, 1, 3).text() == "1/2"

    def test_N_too_small(self):
        with pytest.raises(ValueError):
            theoretical_lower_bound(4, 2, 1, 3)


class TestBoxCounting:
    """Tests for box-counting slopes"""

    def test_full_grid_has_slope_one(self):
        """All 2^6 digit strings fill every ball down to q^-6"""
        estimate = box_dimension(grid_points(6))
        assert estimate.slope == pytest.approx(1.0)
        assert estimate.residual == pytest.approx(0.0, abs=1e-9)
        assert estimate.window == (2, 4)

    def test_identical_points_have_slope_zero(self):
        point = grid_points(6)[5]
        estimate = box_dimension([point] * 4)
        assert estimate.slope == pytest.approx(0.0, abs=1e-9)

    def test_too_few_points(self):
        with pytest.raises(ValueError):
            box_dimension(grid_points(1))

    def test_counts_match_distinct_prefixes(self):
        """Spanning-tree counts equal the number of distinct digit prefixes at every scale"""
        points = grid_points(8)[::7]
        estimate = box_dimension(points)
        for m, log_count in zip(estimate.scales, estimate.log_counts):
            prefixes = {tuple(p.coords[0].coefficient(-e) for e in range(m)) for p in points}
            assert log_count == pytest.approx(math.log(len(prefixes), 2))

    def test_exact_points_need_scales(self):
        exact = [LaurentVector((LaurentSeries.monomial(RING, 1, -k),)) for k in range(1, 6)]
        with pytest.raises(ValueError):
            box_dimension(exact)
        assert box_dimension(exact, scales=range(0, 7)).slope >= 0

    def test_fit_needs_enough_scales(self):
        with pytest.raises(ValueError):
            fit_box_counts([0, 1, 2, 3, 4], [0.0, 1.0, 2.0, 3.0, 4.0])


class TestDimensionReport:
    """Tests for the report assembled from a tree"""

    @pytest.fixture
    def tree(self):
        psi = PsiFunction(n=1, s=3)
        constants, M = preset_constants("desk", psi)
        schedule = choose_schedule(psi, q=2, M=M, constants=constants, K=2, t1=360, growth=60)
        return build_cantor(schedule, depth=3, seed=0, width=8, verify=False)

    def test_report_fields(self, tree):
        """Three Case-1 levels: target (n+1)/s = 2/3, bound 1/2 for R3 = 2"""
        report = dimension_report(tree).to_dict()
        assert report["target"] == "2/3"
        assert report["counts"][0] == 14
        assert report["final_alpha"]["level"] == 3
        assert report["theoretical_lower_bound"]["value"] == "1/2"
        assert report["checkpoints"] == []
        assert report["box_counting"] is None

    def test_branching_rows(self, tree):
        report = dimension_report(tree)
        assert [b.level for b in report.branching] == [1, 2, 3]
        assert report.branching[0].min_included == 14
        assert report.branching[0].threshold == 8
        assert report.branching[0].holds
        assert len(report.level_rows()) == 3
