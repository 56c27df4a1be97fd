import random
from fractions import Fraction

import pytest

from thetabody.polycore import (
    GRLEX,
    Monomial,
    NonConfluentError,
    Polynomial,
    ReducerSet,
    VariableMismatchError,
    compare_monomials,
    format_polynomial,
    linear_polynomial,
    normal_form,
    parse_polynomial,
)
from thetabody.quotient import cycle_graph, stable_set_reducers

def mono(*exps):
    return Monomial(exps)


class TestOrdering:
    def test_same_degree_tiebreak(self):
        assert compare_monomials(mono(2, 0), mono(1, 1)) == 1

    def test_degree_dominates(self):
        assert compare_monomials(mono(0, 3), mono(2, 0)) == 1

    def test_reflexivity(self):
        assert compare_monomials(mono(1, 2), mono(1, 2)) == 0

    def test_orders_differ_where_expected(self):
        a, b = mono(1, 0, 1), mono(0, 2, 0)
        assert compare_monomials(a, b) == -1
        assert compare_monomials(a, b, GRLEX) == 1

    def test_total_order_refines_degree(self):
        rng = random.Random(0)
        monos = [Monomial(tuple(rng.randint(0, 3) for _ in range(3))) for _ in range(40)]
        for a in monos:
            for b in monos:
                cmp = compare_monomials(a, b)
                if a.degree < b.degree:
                    assert cmp == -1
                if cmp == 0:
                    assert a == b

    def test_nvars_mismatch(self):
        with pytest.raises(VariableMismatchError):
            compare_monomials(mono(1), mono(1, 0))


class TestArithmetic:
    def test_addition_is_exact(self):
        rng = random.Random(1)
        for _ in range(50):
            f = random_poly(rng, 3, 4)
            g = random_poly(rng, 3, 4)
            assert (f + g) - g == f

    def test_scalar_and_power(self):
        f = parse_polynomial("x1 + 1", 1)
        assert f * 2 == parse_polynomial("2*x1 + 2", 1)
        assert f**2 == parse_polynomial("x1^2 + 2*x1 + 1", 1)
        assert f**0 == Polynomial.constant(1, 1)

    def test_no_zero_coefficients_stored(self):
        f = parse_polynomial("x1 + x2", 2) - parse_polynomial("x1", 2)
        assert all(c != 0 for c in f.terms.values())
        assert parse_polynomial("x1", 2) - parse_polynomial("x1", 2) == Polynomial.zero(2)

    def test_evaluate_exact(self):
        f = parse_polynomial("1/2*x1^2 - x2 + 3", 2)
        assert f.evaluate((Fraction(2), Fraction(1, 3))) == Fraction(2) - Fraction(1, 3) + 3


class TestNormalForm:
    def test_quartic_curve_leading_power(self, cardioid_poly):
        got = normal_form(Polynomial.from_term(1, (4, 0)), ReducerSet([cardioid_poly]))
        expected = parse_polynomial(
            "-2*x1^2*x2^2 - x2^4 - 4*x1^3 - 4*x1*x2^2 + 4*x2^2", 2
        )
        assert got == expected

    def test_already_reduced_unchanged(self, cardioid_poly):
        G = ReducerSet([cardioid_poly])
        f = parse_polynomial("x1^3*x2 - 7*x2 + 1/3", 2)
        assert normal_form(f, G) == f

    def test_edge_square_collapses(self):
        G = stable_set_reducers(cycle_graph(5))
        l = linear_polynomial(1, [-1, -1, 0, 0, 0])
        assert normal_form(l * l, G) == l

    def test_idempotent_linear_multiplicative(self, cardioid_poly):
        G = ReducerSet([cardioid_poly])
        rng = random.Random(2)
        for _ in range(30):
            f = random_poly(rng, 2, 5)
            g = random_poly(rng, 2, 5)
            nf = normal_form(f, G)
            ng = normal_form(g, G)
            assert normal_form(nf, G) == nf
            assert normal_form(f + g, G) == nf + ng
            assert normal_form(f * g, G) == normal_form(nf * ng, G)

    def test_difference_lies_in_ideal(self, cardioid_poly):
        # f - NF(f) must vanish on the variety; check on parametrized points
        from conftest import cardioid_point

        G = ReducerSet([cardioid_poly])
        f = parse_polynomial("x1^5 + x1^4*x2 - 2*x1^2 + x2", 2)
        diff = f - normal_form(f, G)
        for theta in (0.3, 1.1, 2.9, 4.2):
            x = cardioid_point(theta)
            assert abs(diff.evaluate(x)) < 1e-8

    def test_non_confluent_rejected(self):
        f1 = parse_polynomial("x1^2 + x1 - 2*x2", 2)
        f2 = parse_polynomial("x1*x2", 2)
        with pytest.raises(NonConfluentError):
            normal_form(parse_polynomial("x1^2", 2), ReducerSet([f1, f2]))
        # asserting confluence makes the same set usable
        nf = normal_form(parse_polynomial("x1^2", 2), ReducerSet([f1, f2], confluent=True))
        assert nf == parse_polynomial("2*x2 - x1", 2)

    def test_mark_must_be_maximal(self):
        f = parse_polynomial("x1^2 + x2", 2)
        with pytest.raises(ValueError):
            ReducerSet([f], marks=[Monomial((0, 1))])
        with pytest.raises(ValueError):
            ReducerSet([f], marks=[Monomial((3, 0))])


class TestTextFormat:
    def test_cardioid_roundtrip(self, cardioid_poly):
        assert parse_polynomial(format_polynomial(cardioid_poly), 2) == cardioid_poly

    def test_rational_coefficients(self):
        f = parse_polynomial("3/2*x1^2*x2 - x1 + 4", 2)
        assert f.coefficient(Monomial((2, 1))) == Fraction(3, 2)
        assert f.coefficient(Monomial((1, 0))) == -1
        assert f.coefficient(Monomial((0, 0))) == 4
        assert parse_polynomial(format_polynomial(f), 2) == f

    def test_zero(self):
        assert format_polynomial(Polynomial.zero(2)) == "0"
        assert parse_polynomial("0", 2) == Polynomial.zero(2)

    def test_random_roundtrip(self):
        rng = random.Random(3)
        for _ in range(100):
            f = random_poly(rng, 3, 4)
            assert parse_polynomial(format_polynomial(f), 3) == f

    def test_rejects_garbage(self):
        with pytest.raises(ValueError):
            parse_polynomial("x1 + quux", 2)
        with pytest.raises(VariableMismatchError):
            parse_polynomial("x5", 2)


def random_poly(rng: random.Random, nvars: int, max_deg: int) -> Polynomial:
    terms = {}
    for _ in range(rng.randint(0, 6)):
        exps = [0] * nvars
        for _ in range(rng.randint(0, max_deg)):
            exps[rng.randrange(nvars)] += 1
        terms[Monomial(exps)] = Fraction(rng.randint(-8, 8), rng.randint(1, 5))
    return Polynomial(terms, nvars)
