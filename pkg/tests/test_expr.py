"""Expression DSL: grammar, printing round-trips, jets against finite differences."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bloch_wco import domains as dom
from bloch_wco import expr as E


def finite_difference_grad(f, z, h=1e-6):
    """Central differences in the real and imaginary directions."""
    z = np.asarray(z, dtype=np.complex128)
    g_re = np.zeros_like(z)
    g_im = np.zeros_like(z)
    for j in range(len(z)):
        zp, zm = z.copy(), z.copy()
        zp[j] += h
        zm[j] -= h
        g_re[j] = (f.eval(zp) - f.eval(zm)) / (2 * h)
        zp, zm = z.copy(), z.copy()
        zp[j] += 1j * h
        zm[j] -= 1j * h
        g_im[j] = (f.eval(zp) - f.eval(zm)) / (2j * h)
    return g_re, g_im


class TestParse:
    def test_simple_subtraction(self):
        e = E.parse("1 - z1", 2)
        assert e == E.Sub(E.Lit(1.0 + 0j), E.Coord(1))
        f = E.ScalarMap(e, 2)
        np.testing.assert_allclose(f.eval([0.3, 0.0]), 0.7)

    def test_log_expression_parses(self):
        e = E.parse("plog(4/(1 - 0.5*z1))", 1)
        assert isinstance(e, E.Plog)

    def test_coordinate_out_of_range(self):
        with pytest.raises(E.ParseError):
            E.parse("z3", 2)

    def test_empty_expression(self):
        with pytest.raises(E.ParseError):
            E.parse("   ", 1)

    def test_error_carries_position(self):
        try:
            E.parse("1 + $", 1)
        except E.ParseError as exc:
            assert exc.pos == 4
        else:
            pytest.fail("no error raised")

    def test_conj_constant_folds(self):
        e = E.parse("conj(2 + 3i)", 1)
        assert e == E.Lit(2 - 3j)

    def test_conj_of_coordinate_rejected(self):
        with pytest.raises(E.ParseError):
            E.parse("conj(z1)", 1)

    def test_hdot_requires_constants(self):
        with pytest.raises(E.ParseError):
            E.parse("hdot((z1, 0))", 2)

    def test_hdot_length_checked(self):
        with pytest.raises(E.ParseError):
            E.parse("hdot((1, 0))", 3)

    def test_hdot_value_and_gradient(self):
        f = E.ScalarMap.parse("hdot((0.6, 0.8i))", 2)
        j = f.jet([0.5, 0.25])
        np.testing.assert_allclose(j.value, 0.5 * 0.6 + 0.25 * (-0.8j))
        np.testing.assert_allclose(j.grad, [0.6, -0.8j])

    def test_imaginary_literals(self):
        assert E.parse("i", 1) == E.Lit(1j)
        assert E.parse("2i", 1) == E.Lit(2j)
        assert E.parse("1.5e-3i", 1) == E.Lit(1.5e-3j)

    def test_power_binds_to_negated_base(self):
        # base := '-' base, then the optional '^'; so -z1^2 squares -z1
        e = E.parse("-z1^2", 1)
        assert e == E.Pow(E.Neg(E.Coord(1)), 2)

    def test_chained_power_rejected(self):
        with pytest.raises(E.ParseError):
            E.parse("z1^2^3", 1)

    def test_negative_exponent(self):
        f = E.ScalarMap.parse("z1^-2", 1)
        np.testing.assert_allclose(f.eval([0.5]), 4.0)

    def test_constant_singularity_stays_unfolded(self):
        f = E.ScalarMap.parse("1/(1 - 1)", 1)
        with pytest.raises(E.SingularityError):
            f.eval([0.0])

    def test_exponent_must_be_integer(self):
        with pytest.raises(E.ParseError):
            E.parse("z1^2i", 1)
        with pytest.raises(E.ParseError):
            E.parse("z1^0.5", 1)

    def test_function_requires_parentheses(self):
        with pytest.raises(E.ParseError):
            E.parse("exp z1", 1)

    def test_double_negation_round_trips(self):
        e = E.parse("--z1", 1)
        assert e == E.Neg(E.Neg(E.Coord(1)))
        assert E.parse(E.to_source(e), 1) == e


class TestPrinting:
    CASES = [
        ("1 - z1", 2),
        ("plog(4/(1 - 0.5*z1))", 1),
        ("0.5*plog(1 - hdot((1, 0)))", 2),
        ("-z2/2", 2),
        ("exp(z1^3) + 2i - z1*z2/(1 + z2)", 2),
        ("(z1 - z2)^4/(1 - hdot((0.5, 0.5i)))", 2),
        ("-(z1^2)", 1),
        ("-z1^2", 1),
    ]

    @pytest.mark.parametrize("text,dim", CASES)
    def test_round_trip(self, text, dim):
        e = E.parse(text, dim)
        assert E.parse(E.to_source(e), dim) == e

    @staticmethod
    def _expr_strategy(dim):
        lits = st.one_of(
            st.floats(-4, 4, allow_nan=False).map(lambda x: E.Lit(complex(round(x, 3)))),
            st.floats(-4, 4, allow_nan=False).map(lambda x: E.Lit(complex(0, round(x, 3)))),
        )
        coords = st.integers(1, dim).map(E.Coord)
        leaves = st.one_of(lits, coords)

        def extend(children):
            return st.one_of(
                st.tuples(children, children).map(lambda t: E.Add(*t)),
                st.tuples(children, children).map(lambda t: E.Sub(*t)),
                st.tuples(children, children).map(lambda t: E.Mul(*t)),
                st.tuples(children, children).map(lambda t: E.Div(*t)),
                children.map(E.Neg),
                st.tuples(children, st.integers(0, 4)).map(lambda t: E.Pow(*t)),
                children.map(E.ExpNode),
                children.map(E.Plog),
            )

        return st.recursive(leaves, extend, max_leaves=12)

    @given(tree=_expr_strategy.__func__(2))
    @settings(max_examples=200, deadline=None)
    def test_round_trip_random_trees(self, tree):
        # printing an arbitrary tree and parsing canonicalises (folds constants);
        # from then on print/parse must be the identity
        canonical = E.parse(E.to_source(tree), 2)
        assert E.parse(E.to_source(canonical), 2) == canonical


class TestJets:
    def test_square(self):
        j = E.ScalarMap.parse("z1^2", 1).jet([0.5])
        np.testing.assert_allclose(j.value, 0.25)
        np.testing.assert_allclose(j.grad, [1.0])

    def test_log_at_origin(self):
        j = E.ScalarMap.parse("plog(1 - z1)", 1).jet([0.0])
        np.testing.assert_allclose(j.value, 0.0)
        np.testing.assert_allclose(j.grad, [-1.0])

    def test_plog_branch(self):
        assert E.ScalarMap.parse("plog(1)", 1).eval([0.0]) == 0.0
        np.testing.assert_allclose(E.ScalarMap.parse("plog(-1)", 1).eval([0.0]), 1j * math.pi)
        rng = np.random.default_rng(3)
        f = E.ScalarMap.parse("plog(z1)", 1)
        for _ in range(50):
            z = rng.normal() + 1j * rng.normal()
            if z == 0:
                continue
            w = f.eval([z])
            assert -math.pi < w.imag <= math.pi

    def test_gradient_matches_finite_differences(self):
        f = E.ScalarMap.parse("plog(2/(1 - hdot((0.6, 0.8i))))", 2)
        Z = dom.sample(dom.ball(2), "uniform", 10, 17) * 0.9
        for z in Z:
            jet = f.jet(z)
            g_re, g_im = finite_difference_grad(f, z)
            np.testing.assert_allclose(jet.grad, g_re, rtol=1e-6, atol=1e-9)
            np.testing.assert_allclose(jet.grad, g_im, rtol=1e-6, atol=1e-9)

    def test_linearity(self):
        f = E.ScalarMap.parse("exp(z1)*z2", 2)
        g = E.ScalarMap.parse("plog(1 - z1*z2)", 2)
        a, b = 2.0 - 1j, 0.5 + 0.25j
        combo = E.ScalarMap.parse(
            "(2 - 1i)*exp(z1)*z2 + (0.5 + 0.25i)*plog(1 - z1*z2)", 2
        )
        z = np.array([0.3 + 0.1j, -0.2 + 0.4j])
        jf, jg, jc = f.jet(z), g.jet(z), combo.jet(z)
        np.testing.assert_allclose(jc.value, a * jf.value + b * jg.value, rtol=1e-12)
        np.testing.assert_allclose(jc.grad, a * jf.grad + b * jg.grad, rtol=1e-12)

    def test_division_by_zero_carries_subexpression(self):
        f = E.ScalarMap.parse("1/(1 - z1)", 1)
        with pytest.raises(E.SingularityError) as err:
            f.eval([1.0 + 0j])
        assert "1.0 - z1" in str(err.value)

    def test_log_of_zero(self):
        f = E.ScalarMap.parse("plog(z1)", 1)
        with pytest.raises(E.SingularityError):
            f.jet([0.0])

    def test_zero_to_negative_power(self):
        f = E.ScalarMap.parse("z1^-1", 1)
        with pytest.raises(E.SingularityError):
            f.eval([0.0])


class TestJacobian:
    def test_identity(self):
        phi = E.SelfMap.identity(dom.ball(2))
        np.testing.assert_allclose(E.jacobian(phi, [0.2, 0.1]), np.eye(2))

    def test_reflection_contraction(self):
        phi = E.SelfMap.parse(["(1 - z1)/2", "-z2/2"], dom.ball(2))
        np.testing.assert_allclose(E.jacobian(phi, [0.2, 0.1]), -0.5 * np.eye(2))

    def test_rational_map_against_finite_differences(self):
        domain = dom.ball(2)
        phi = E.SelfMap.parse(["(z1 + z2^2)/4", "z1*z2/2 - 0.1"], domain)
        rng = np.random.default_rng(11)
        for _ in range(10):
            z = dom.sample(domain, "uniform", 1, int(rng.integers(1 << 30)))[0] * 0.8
            J = E.jacobian(phi, z)
            for k, comp in enumerate(phi.components):
                f = E.ScalarMap(comp, 2)
                g_re, g_im = finite_difference_grad(f, z)
                np.testing.assert_allclose(J[k], g_re, rtol=1e-6, atol=1e-9)
                np.testing.assert_allclose(J[k], g_im, rtol=1e-6, atol=1e-9)


class TestSelfMapCheck:
    def test_coordinate_placement_passes(self):
        domain = dom.polydisk(2)
        phi = E.SelfMap.parse(["(1 + z1)/2", "0"], domain)
        assert E.self_map_check(phi, domain).passed

    def test_dilation_fails_with_witness(self):
        domain = dom.disk()
        phi = E.SelfMap.parse(["2*z1"], domain)
        rep = E.self_map_check(phi, domain)
        assert not rep.passed
        assert abs(rep.worst_point[0]) > 0.5

    def test_ball_reflection_contraction_passes(self):
        domain = dom.ball(2)
        phi = E.SelfMap.parse(["(1 - z1)/2", "-z2/2"], domain)
        assert E.self_map_check(phi, domain).passed

    def test_interior_singularity_fails(self):
        domain = dom.disk()
        phi = E.SelfMap.parse(["0.1/(0.25 - z1^2)"], domain)
        rep = E.self_map_check(phi, domain)
        assert not rep.passed
