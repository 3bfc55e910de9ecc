import random

import pytest
from fractions import Fraction

from src.algebra.degree import NEG_INF, as_fraction, format_degree, parse_degree, vec_norm
from src.algebra.field import F2, FieldSpec
from src.algebra.laurent import LaurentSeries, LaurentVector, abs_deg, frac_dist
from src.algebra.poly import generic_ring, poly_arith, poly_gcd, poly_ring
from src.algebra.text import format_vector, parse_field, parse_poly, parse_vector
from src.exceptions import PrecisionExhausted

F4 = FieldSpec(p=2, b=2, modulus=(1, 1, 1))


class TestDegree:
    """Tests for exponent values"""

    def test_neg_inf_ordering(self):
        """NEG_INF sorts below every number and absorbs addition"""
        assert NEG_INF < -10 ** 9
        assert not NEG_INF > -10 ** 9
        assert NEG_INF + 5 is NEG_INF
        assert vec_norm([NEG_INF, -3, 2]) == 2
        assert vec_norm([NEG_INF, NEG_INF]) is NEG_INF

    def test_neg_inf_subtraction_undefined(self):
        """-inf minus -inf has no value"""
        with pytest.raises(ValueError):
            NEG_INF - NEG_INF

    def test_fraction_text(self):
        """Rationals parse from num/den and format back without a unit denominator"""
        assert as_fraction("-10/3") == Fraction(-10, 3)
        assert format_degree(Fraction(-10, 3)) == "-10/3"
        assert format_degree(Fraction(4, 2)) == "2"
        assert parse_degree("-inf") is NEG_INF
        with pytest.raises(ValueError):
            as_fraction("ten")


class TestField:
    """Tests for F_q arithmetic"""

    def test_prime_field(self):
        """F_5 arithmetic is arithmetic mod 5"""
        f = FieldSpec(p=5)
        assert f.mul(3, 4) == 2
        assert f.inv(3) == 2
        assert f.sub(1, 3) == 3

    def test_extension_field(self):
        """F_4 = F_2[X]/(X^2+X+1): element 2 is X, 3 is X+1"""
        assert F4.q == 4
        assert F4.mul(2, 2) == 3
        assert F4.mul(2, 3) == 1
        assert F4.add(2, 3) == 1
        assert F4.inv(2) == 3
        for a in range(1, 4):
            assert F4.mul(a, F4.inv(a)) == 1

    def test_reducible_modulus_rejected(self):
        """X^2+1 = (X+1)^2 over F_2 cannot define F_4"""
        with pytest.raises(ValueError):
            FieldSpec(p=2, b=2, modulus=(1, 0, 1))

    def test_non_prime_characteristic(self):
        with pytest.raises(ValueError):
            FieldSpec(p=6)

    def test_zero_has_no_inverse(self):
        with pytest.raises(ZeroDivisionError):
            F4.inv(0)


class TestPoly:
    """Tests for polynomial rings"""

    @pytest.fixture
    def ring(self):
        return poly_ring(F2)

    def test_binary_divmod(self, ring):
        """X^3+X+1 = (X+1)(X^2+X) + 1 over F_2"""
        a = parse_poly("X^3+X+1", F2)
        b = parse_poly("X+1", F2)
        q, r = divmod(a, b)
        assert q == parse_poly("X^2+X", F2)
        assert r == ring.one()
        assert q * b + r == a

    def test_packed_matches_generic(self, ring):
        """The packed F_2 ring agrees with the list-based ring"""
        generic = generic_ring(F2)
        a_coeffs, b_coeffs = [1, 0, 1, 1, 0, 1], [1, 1, 0, 1]
        packed = ring.from_coeffs(a_coeffs) * ring.from_coeffs(b_coeffs)
        listed = generic.from_coeffs(a_coeffs) * generic.from_coeffs(b_coeffs)
        assert packed.coeffs() == listed.coeffs()
        q1, r1 = divmod(ring.from_coeffs(a_coeffs), ring.from_coeffs(b_coeffs))
        q2, r2 = divmod(generic.from_coeffs(a_coeffs), generic.from_coeffs(b_coeffs))
        assert (q1.coeffs(), r1.coeffs()) == (q2.coeffs(), r2.coeffs())

    def test_gcd(self, ring):
        """gcd((X+1)^2, X(X+1)) = X+1"""
        a = parse_poly("X^2+1", F2)
        b = parse_poly("X^2+X", F2)
        assert poly_gcd(a, b) == parse_poly("X+1", F2)
        assert poly_arith("gcd", a, b) == parse_poly("X+1", F2)

    def test_extension_field_division(self):
        """Division over F_4 leaves a remainder of lower degree"""
        a = parse_poly("2X^3+X+3", F4)
        b = parse_poly("3X+1", F4)
        q, r = divmod(a, b)
        assert q * b + r == a
        assert r.deg is NEG_INF or r.deg < b.deg

    def test_zero_polynomial_degree(self, ring):
        assert ring.zero().deg is NEG_INF
        assert ring.zero().is_zero()

    def test_division_by_zero(self, ring):
        with pytest.raises(ZeroDivisionError):
            divmod(ring.one(), ring.zero())

    def test_unknown_operation(self, ring):
        with pytest.raises(ValueError):
            poly_arith("pow", ring.one(), ring.one())


class TestLaurent:
    """Tests for truncated Laurent series"""

    @pytest.fixture
    def ring(self):
        return poly_ring(F2)

    def test_rational_expansion(self, ring):
        """1/(X+1) = X^-1 + X^-2 + ... known down to the floor"""
        x = LaurentSeries.from_rational(ring.one(), parse_poly("X+1", F2), floor=-6)
        assert x.terms() == [(1, -1), (1, -2), (1, -3), (1, -4), (1, -5)]
        assert abs_deg(x) == -1
        assert x.coefficient(-5) == 1

    def test_coefficient_below_floor(self, ring):
        """Coefficients at or below the floor are unknown"""
        x = LaurentSeries.from_rational(ring.one(), parse_poly("X+1", F2), floor=-6)
        with pytest.raises(PrecisionExhausted):
            x.coefficient(-6)

    def test_infinite_expansion_needs_floor(self, ring):
        with pytest.raises(PrecisionExhausted):
            LaurentSeries.from_rational(ring.one(), parse_poly("X+1", F2), floor=NEG_INF)

    def test_parts(self, ring):
        """X^2 + X^-3 splits into X^2 and X^-3"""
        x = LaurentSeries.from_terms(ring, [(1, 2), (1, -3)])
        assert x.polynomial_part() == parse_poly("X^2", F2)
        assert x.fractional_part().terms() == [(1, -3)]
        assert frac_dist(LaurentVector((x,))) == -3

    def test_zero_series_with_floor(self, ring):
        """A series known to be zero down to its floor has no decidable magnitude"""
        x = LaurentSeries.zero(ring, floor=-4)
        assert x.magnitude_bound == -4
        with pytest.raises(PrecisionExhausted):
            abs_deg(x)

    def test_sum_keeps_coarser_floor(self, ring):
        a = LaurentSeries.from_terms(ring, [(1, -1)], floor=-8)
        b = LaurentSeries.from_terms(ring, [(1, -2)], floor=-4)
        assert (a + b).floor == -4
        assert (a + b).terms() == [(1, -1), (1, -2)]

    def test_rational_abs_deg(self, ring):
        f, g = parse_poly("X+1", F2), parse_poly("X^3", F2)
        assert abs_deg((f, g)) == -2

    def test_unit_ball(self, ring):
        inside = LaurentVector((LaurentSeries.from_terms(ring, [(1, 0), (1, -2)]),))
        outside = LaurentVector((LaurentSeries.from_terms(ring, [(1, 1)]),))
        assert inside.in_unit_ball()
        assert not outside.in_unit_ball()


class TestText:
    """Tests for the text grammar"""

    def test_field_spec(self):
        """q=4 needs a modulus; q=6 is not a prime power"""
        assert parse_field("q=4; modulus=X^2+X+1") == F4
        assert parse_field("q=2") == F2
        with pytest.raises(ValueError):
            parse_field("q=4")
        with pytest.raises(ValueError):
            parse_field("q=6")

    def test_vector_text(self):
        """A vector literal with a precision suffix formats back to the same text"""
        text = "X^-1+X^-3 (prec -5); X^-2"
        x = parse_vector(text, F2)
        assert x.n == 2
        assert x.floor == -5
        assert format_vector(x) == text

    def test_coefficients_reduce_mod_p(self):
        """Over F_3 the literal 4X means X"""
        f3 = parse_field("q=3")
        assert parse_poly("4X+2", f3) == parse_poly("X+2", f3)

    def test_malformed_polynomial(self):
        with pytest.raises(ValueError):
            parse_poly("X^2 X", F2)


class TestRandomArithmetic:
    """Seeded property checks over small fields"""

    @pytest.mark.parametrize("field", [F2, FieldSpec(p=3), F4])
    def test_divmod_identity(self, field):
        """a = qb + r with deg r < deg b for random polynomials"""
        rng = random.Random(20240611)
        ring = poly_ring(field)
        for _ in range(50):
            a = ring.from_coeffs([rng.randrange(field.q) for _ in range(rng.randint(1, 9))])
            b = ring.from_coeffs([rng.randrange(field.q) for _ in range(rng.randint(1, 5))] + [1])
            q, r = divmod(a, b)
            assert q * b + r == a
            assert r.deg is NEG_INF or r.deg < b.deg

    @pytest.mark.slow
    def test_ultrametric_inequality(self):
        """|a + b| <= max(|a|, |b|) on 10^4 random pairs, with equality whenever |a| != |b|"""
        rng = random.Random(20241018)
        unequal = 0
        for index in range(10 ** 4):
            field = (F2, FieldSpec(p=3), F4)[index % 3]
            ring = poly_ring(field)
            a, b = (
                LaurentSeries.from_terms(
                    ring, [(rng.randrange(field.q), e) for e in range(rng.randint(-12, 0), rng.randint(-6, 8))],
                )
                for _ in range(2)
            )
            top = (a + b).top
            assert top <= max(a.top, b.top)
            if a.top != b.top:
                assert top == max(a.top, b.top)
                unequal += 1
        assert unequal > 1000

    def test_field_pow(self):
        """The multiplicative group of F_4 has order 3"""
        assert FieldSpec.parse("q=4; modulus=X^2+X+1") == F4
        assert all(F4.pow(a, 3) == 1 for a in range(1, 4))
        assert F4.pow(2, -1) == F4.inv(2)
        assert FieldSpec(p=7).pow(3, 6) == 1
        assert F4.pow(0, 0) == 1
