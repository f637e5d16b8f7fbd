"""Tests for two-sided conjugation identities across all scenario kinds."""
import random
from fractions import Fraction

import pytest

from sandwichkit.convexfn import AffineFunctional, PolyhedralFunction, evaluate
from sandwichkit.geometry import AffineMap
from sandwichkit.duality import (
    DualityScenario,
    as_query,
    bibivariate_to_quadrivariate,
    fenchel_to_trivariate,
    fiber_inf,
    product_function,
    quad_fiber_maps,
    scenario_to_trivariate,
    verify,
    verify_indicator_linear,
)
from sandwichkit.numerics import NEG_INF, POS_INF, PreconditionError, StructuralError
from sandwichkit.randomgen import (
    random_bibivariate_scenario,
    random_fenchel_scenario,
    random_indicator_scenario,
    random_trivariate_scenario,
    random_violating_fenchel,
    random_violating_trivariate,
)

F = Fraction


def zero_on_interval() -> PolyhedralFunction:
    return PolyhedralFunction.v_form(1, [((-1,), 0), ((1,), 0)])


def abs_on_two() -> PolyhedralFunction:
    return PolyhedralFunction.v_form(1, [((-2,), 2), ((0,), 0), ((2,), 2)])


def abs_everywhere() -> PolyhedralFunction:
    return PolyhedralFunction.h_form(1, [((1,), 0), ((-1,), 0)])


def abs_fenchel(queries) -> DualityScenario:
    return DualityScenario.fenchel(
        zero_on_interval(), abs_on_two(), AffineMap.identity(1), queries
    )


class TestQueryCoercion:
    def test_plain_tuple_becomes_linear(self):
        q = as_query((F(3), F(-1)), 2)
        assert isinstance(q, AffineFunctional)
        assert q.coeffs == (F(3), F(-1))
        assert q.constant == 0

    def test_functional_passes_through(self):
        phi = AffineFunctional((F(1),), F(5))
        assert as_query(phi, 1) is phi

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(StructuralError):
            as_query((F(1),), 2)


class TestScenarioValidation:
    def test_fenchel_needs_sample_form_first(self):
        with pytest.raises(StructuralError):
            DualityScenario.fenchel(
                abs_everywhere(), abs_on_two(), AffineMap.identity(1), [(F(0),)]
            )

    def test_fenchel_checks_link_dimensions(self):
        link = AffineMap.from_rows([[1], [0]])
        with pytest.raises(StructuralError):
            DualityScenario.fenchel(zero_on_interval(), abs_on_two(), link, [(F(0),)])

    def test_queries_required(self):
        with pytest.raises(StructuralError):
            DualityScenario.fenchel(
                zero_on_interval(), abs_on_two(), AffineMap.identity(1), []
            )

    def test_unknown_mode_rejected(self):
        with pytest.raises(StructuralError):
            DualityScenario.fenchel(
                zero_on_interval(), abs_on_two(), AffineMap.identity(1),
                [(F(0),)], hypothesis_mode="hope",
            )

    def test_indicator_rejects_affine_coupling(self):
        g = PolyhedralFunction.v_form(2, [((0, 0), 0)])
        c_map = AffineMap(((F(1),),), (F(1),), 1)
        with pytest.raises(StructuralError):
            DualityScenario.indicator_linear(
                g, c_map, AffineMap.identity(1), [(F(0), F(0))]
            )

    def test_partial_infconv_block_bounds(self):
        f = PolyhedralFunction.v_form(2, [((0, 0), 0)])
        with pytest.raises(StructuralError):
            DualityScenario.partial_infconv(f, f, 3, [(F(0), F(0))])

    def test_bibivariate_checks_product_dims(self):
        f = PolyhedralFunction.v_form(1, [((0,), 0)])
        g = PolyhedralFunction.v_form(2, [((0, 0), 0)])
        c_map = AffineMap.from_rows([[1]])
        d_map = AffineMap.from_rows([[1]])
        with pytest.raises(StructuralError):
            DualityScenario.bibivariate(f, g, c_map, d_map, [(F(0), F(0))])


class TestFenchel:
    def test_worked_example_query_three(self):
        report = verify(abs_fenchel([(F(3),)]))[0]
        assert report.lhs == 2
        assert report.rhs == 2
        assert report.gap == 0
        assert report.witness == (F(1),)
        assert report.attained
        assert report.all_hypotheses_hold

    def test_worked_example_query_zero(self):
        report = verify(abs_fenchel([(F(0),)]))[0]
        assert report.lhs == 0
        assert report.rhs == 0
        assert report.witness == (F(0),)
        assert report.attained

    def test_one_report_per_query(self):
        reports = verify(abs_fenchel([(F(3),), (F(0),), (F(-3),)]))
        assert [r.lhs for r in reports] == [2, 0, 2]

    def test_piece_form_upper_function(self):
        s = DualityScenario.fenchel(
            zero_on_interval(), abs_everywhere(), AffineMap.identity(1), [(F(3),)]
        )
        report = verify(s)[0]
        assert report.lhs == 2
        assert report.rhs == 2
        assert report.attained
        assert report.all_hypotheses_hold

    def test_affine_link_offset(self):
        # h(z) = |z + 1| on [-1, 1]; its conjugate at 0 is -min h = 0
        link = AffineMap(((F(1),),), (F(1),), 1)
        s = DualityScenario.fenchel(zero_on_interval(), abs_on_two(), link, [(F(0),)])
        report = verify(s)[0]
        assert report.lhs == 0
        assert report.rhs == 0
        assert report.gap == 0

    def test_query_with_constant(self):
        q = AffineFunctional((F(3),), F(7))
        report = verify(abs_fenchel([q]))[0]
        assert report.lhs == 9
        assert report.rhs == 9


class TestSublevel:
    def test_worked_example_auto_level(self):
        phi = PolyhedralFunction.v_form(1, [((-1,), 1), ((0,), 0), ((1,), 1)])
        s = DualityScenario.sublevel(phi, AffineMap.identity(1))
        assert s.gamma == 1
        report = verify(s)[0]
        assert report.lhs == 0
        assert report.rhs == 0
        assert report.attained
        assert report.all_hypotheses_hold

    def test_level_below_infimum_clears_flag(self):
        phi = PolyhedralFunction.v_form(1, [((-1,), 1), ((0,), 0), ((1,), 1)])
        s = DualityScenario.sublevel(phi, AffineMap.identity(1), gamma=F(0))
        report = verify(s)[0]
        assert not report.hypothesis_flags["interiority"]
        assert not report.all_hypotheses_hold
        assert report.gap >= 0


class TestTrivariate:
    def test_point_indicator_identity(self):
        psi = zero_on_interval()
        ident = AffineMap.identity(1)
        s = DualityScenario.trivariate(psi, ident, ident, [(F(5),)])
        report = verify(s)[0]
        assert report.lhs == 0
        assert report.rhs == 0
        # dual covector pairs with the kernel map through a plus sign, so
        # the minimizer of max(5 + x, -5 - x) over x is reported
        assert report.witness == (F(-5),)

    def test_empty_fiber_gives_twin_minus_infinity(self):
        psi = PolyhedralFunction.v_form(1, [((1,), 0), ((2,), 0)])
        ident = AffineMap.identity(1)
        s = DualityScenario.trivariate(psi, ident, ident, [(F(1),)])
        report = verify(s)[0]
        assert report.lhs is NEG_INF
        assert report.rhs is NEG_INF
        assert report.gap == 0
        assert not report.attained
        assert report.unbounded_direction is not None
        assert not report.hypothesis_flags["h_proper"]


class TestFiberInf:
    def terms(self):
        return [
            (zero_on_interval(), AffineMap.from_rows([[1, 0]])),
            (abs_on_two(), AffineMap.from_rows([[0, 1]])),
        ]

    def test_absolute_value_slice(self):
        a = AffineMap.from_rows([[1, 0]])
        b = AffineMap.from_rows([[-1, 1]])
        for q in (F(0), F(1, 2), F(1)):
            assert fiber_inf(self.terms(), a, b, (q,)) == q

    def test_unreachable_parameter_is_plus_infinity(self):
        a = AffineMap.from_rows([[1, 0]])
        b = AffineMap.from_rows([[-1, 1]])
        assert fiber_inf(self.terms(), a, b, (F(5),)) is POS_INF

    def test_piece_form_term(self):
        terms = [(abs_everywhere(), AffineMap.identity(1))]
        value = fiber_inf(terms, AffineMap.identity(1), AffineMap.zero_map(1), (F(2),))
        assert value == 2

    def test_mixed_terms_share_the_point(self):
        terms = [
            (zero_on_interval(), AffineMap.identity(1)),
            (abs_everywhere(), AffineMap.identity(1)),
        ]
        ident = AffineMap.identity(1)
        assert fiber_inf(terms, ident, AffineMap.zero_map(1), (F(1, 2),)) == F(1, 2)
        assert fiber_inf(terms, ident, AffineMap.zero_map(1), (F(3),)) is POS_INF


def vee_on_square() -> PolyhedralFunction:
    return PolyhedralFunction.v_form(
        2, [((sx, sv), abs(sv)) for sx in (-1, 1) for sv in (-1, 0, 1)]
    )


class TestPartialInfconv:
    def test_worked_example(self):
        s = DualityScenario.partial_infconv(
            vee_on_square(), vee_on_square(), 1, [(F(0), F(2))]
        )
        report = verify(s)[0]
        assert report.lhs == 2
        assert report.rhs == 2
        assert report.witness == (F(0),)
        assert report.attained

    def test_closed_subspace_mode_certifies(self):
        s = DualityScenario.partial_infconv(
            vee_on_square(), vee_on_square(), 1, [(F(0), F(2))],
            hypothesis_mode="closed_subspace",
        )
        report = verify(s)[0]
        assert report.all_hypotheses_hold
        assert report.gap == 0


def cross_indicator_scenario(queries, **kwargs) -> DualityScenario:
    g = PolyhedralFunction.v_form(
        2, [((sx, su), abs(sx) + abs(su)) for sx in (-1, 0, 1) for su in (-1, 0, 1)]
    )
    c_map = AffineMap.from_rows([[1, 0]])
    return DualityScenario.indicator_linear(
        g, c_map, AffineMap.identity(1), queries, **kwargs
    )


class TestIndicatorLinear:
    def test_worked_example(self):
        report = verify_indicator_linear(
            cross_indicator_scenario([(F(1), F(0), F(2))])
        )[0]
        assert report.lhs == 1
        assert report.rhs == 1
        assert report.witness == (F(1),)
        assert report.attained
        assert report.all_hypotheses_hold

    def test_query_outside_row_space_gives_twin_plus_infinity(self):
        report = verify_indicator_linear(
            cross_indicator_scenario([(F(0), F(1), F(0))])
        )[0]
        assert report.lhs is POS_INF
        assert report.rhs is POS_INF
        assert report.gap == 0
        assert not report.attained
        assert any("range" in note for note in report.notes)

    def test_closed_subspace_mode_certifies(self):
        report = verify(
            cross_indicator_scenario(
                [(F(1), F(0), F(2))], hypothesis_mode="closed_subspace"
            )
        )[0]
        assert report.hypothesis_flags["closed_subspace"]
        assert report.all_hypotheses_hold

    def test_unreachable_domain_gives_minus_infinity(self):
        # C is the zero map while dom g sits at x >= 1, so h is identically +inf
        g = PolyhedralFunction.v_form(2, [((1, 0), 0), ((2, 0), 0)])
        c_map = AffineMap(((F(0),),), (F(0),), 1)
        s = DualityScenario.indicator_linear(
            g, c_map, AffineMap.identity(1), [(F(0), F(0))]
        )
        report = verify(s)[0]
        assert report.lhs is NEG_INF
        assert report.rhs is NEG_INF
        assert not report.hypothesis_flags["h_proper"]

    def test_kind_guard(self):
        with pytest.raises(PreconditionError):
            verify_indicator_linear(abs_fenchel([(F(0),)]))

    def test_lhs_witness_reconstructs_the_value(self):
        s = cross_indicator_scenario([(F(1), F(0), F(2))])
        report = verify(s)[0]
        w, u = report.lhs_witness[:2], report.lhs_witness[2:]
        # witness value: <w', w> + <v', D u> - g(C w, u)
        c_w = (w[0],)
        g_val = evaluate(s.g, c_w + u)
        assert w[0] * 1 + u[0] * 2 - g_val == report.lhs


class TestProductConstructions:
    def test_product_adds_marginal_values(self):
        rng = random.Random(601)
        from sandwichkit.randomgen import random_vform, random_vec

        for _ in range(20):
            f = random_vform(rng, rng.randint(1, 2))
            g = random_vform(rng, rng.randint(1, 2))
            prod = product_function(f, g)
            for p, _ in f.samples:
                for q, _ in g.samples:
                    assert evaluate(prod, p + q) == evaluate(f, p) + evaluate(g, q)

    def test_product_requires_sample_form(self):
        with pytest.raises(StructuralError):
            product_function(zero_on_interval(), abs_everywhere())

    def test_piece_form_has_no_product_rewrite(self):
        s = DualityScenario.fenchel(
            zero_on_interval(), abs_everywhere(), AffineMap.identity(1), [(F(0),)]
        )
        with pytest.raises(PreconditionError):
            fenchel_to_trivariate(s)

    def test_indicator_has_no_trivariate_rewrite(self):
        with pytest.raises(PreconditionError):
            scenario_to_trivariate(cross_indicator_scenario([(F(0), F(0), F(0))]))

    def test_quad_fiber_maps_layout(self):
        c_map = AffineMap.from_rows([[2]])
        d_map = AffineMap(((F(3),),), (F(1),), 1)
        a_map, b_map = quad_fiber_maps(c_map, d_map, (1, 1, 1, 1))
        point = (F(1), F(10), F(100), F(1000))
        assert a_map(point) == (F(100), F(10) + F(3) + F(1))
        assert b_map(point) == (F(1000) - F(200),)


class TestReductionConsistency:
    def test_fenchel_matches_trivariate_rewrite(self):
        rng = random.Random(602)
        for _ in range(12):
            s = random_fenchel_scenario(rng)
            direct = verify(s)
            rewritten = verify(scenario_to_trivariate(s))
            for a, b in zip(direct, rewritten):
                assert a.lhs == b.lhs
                assert a.rhs == b.rhs

    def test_bibivariate_matches_quadrivariate_rewrite(self):
        rng = random.Random(603)
        for _ in range(8):
            s = random_bibivariate_scenario(rng)
            direct = verify(s)
            rewritten = verify(bibivariate_to_quadrivariate(s))
            for a, b in zip(direct, rewritten):
                assert a.lhs == b.lhs
                assert a.rhs == b.rhs

    def test_partial_matches_quadrivariate_rewrite(self):
        rng = random.Random(604)
        for _ in range(8):
            s = random_bibivariate_scenario(rng, partial=True)
            direct = verify(s)
            rewritten = verify(bibivariate_to_quadrivariate(s))
            for a, b in zip(direct, rewritten):
                assert a.lhs == b.lhs
                assert a.rhs == b.rhs


class TestStrongDuality:
    def test_box_coupled_pairs_certify_and_close(self):
        rng = random.Random(605)
        for _ in range(20):
            for report in verify(random_fenchel_scenario(rng)):
                assert report.all_hypotheses_hold
                assert report.gap == 0
                assert report.attained

    def test_symmetric_trivariate_certifies_and_closes(self):
        rng = random.Random(606)
        for _ in range(20):
            for report in verify(random_trivariate_scenario(rng)):
                assert report.all_hypotheses_hold
                assert report.gap == 0
                assert report.attained

    def test_symmetric_bibivariate_certifies_and_closes(self):
        rng = random.Random(607)
        for _ in range(10):
            for report in verify(random_bibivariate_scenario(rng)):
                assert report.all_hypotheses_hold
                assert report.gap == 0
                assert report.attained

    def test_indicator_certifies_in_both_modes(self):
        rng = random.Random(608)
        for mode in ("boundedness", "closed_subspace"):
            for _ in range(8):
                s = random_indicator_scenario(rng, hypothesis_mode=mode)
                for report in verify(s):
                    assert report.all_hypotheses_hold
                    assert report.gap == 0
                    assert report.attained


class TestWeakDuality:
    def test_disjoint_domains_report_twin_minus_infinity(self):
        rng = random.Random(609)
        for _ in range(15):
            for report in verify(random_violating_fenchel(rng)):
                assert not report.all_hypotheses_hold
                assert report.lhs is NEG_INF
                assert report.gap >= 0

    def test_touching_domains_fail_certification_only(self):
        rng = random.Random(610)
        for _ in range(15):
            for report in verify(random_violating_fenchel(rng, touching=True)):
                assert not report.all_hypotheses_hold
                assert report.hypothesis_flags["h_proper"]
                assert report.lhs is not NEG_INF
                assert report.gap >= 0

    def test_shifted_kernel_reports_empty_fiber(self):
        rng = random.Random(611)
        for _ in range(15):
            for report in verify(random_violating_trivariate(rng)):
                assert not report.all_hypotheses_hold
                assert report.lhs is NEG_INF
                assert report.gap >= 0
