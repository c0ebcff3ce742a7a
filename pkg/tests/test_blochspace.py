"""Invariant gradient, semi-norms, sup norms, point evaluation and boundary decay."""

import math

import numpy as np
import pytest

from bloch_wco import blochspace as bs
from bloch_wco import dictionary as dc
from bloch_wco import domains as dom
from bloch_wco.expr import ScalarMap
from conftest import FAST_CFG, seeded_points

DICT_FUNCTIONS = {
    "disk": [
        "z1",
        "plog(1 - z1)",
        "(0.4 - z1)/(1 - 0.4*z1)",
        "exp(z1)",
        "z1^3 - 0.5*z1",
    ],
    "ball": [
        "z1",
        "z1*z2",
        "plog(2/(1 - hdot((0.6, 0.8i))))",
        "0.5*(plog(1 + hdot((1, 0))) - plog(1 - hdot((1, 0))))",
        "exp(z1 + z2)",
    ],
    "polydisk": [
        "z1 + z2",
        "z1*z2",
        "plog(4/(1 - 0.9*z1))",
        "0.5*(plog(1 + z2) - plog(1 - z2))",
        "exp(z1)*z2^2",
    ],
}


def _domain(kind):
    return {"disk": dom.disk(), "ball": dom.ball(2), "polydisk": dom.polydisk(2)}[kind]


class TestQ:
    def test_disk_coordinate(self):
        np.testing.assert_allclose(bs.q_f(ScalarMap.parse("z1", 1), dom.disk(), [0.5]), 0.75)

    def test_ball_coordinate(self):
        q = bs.q_f(ScalarMap.parse("z1", 2), dom.ball(2), [0.5, 0.0])
        np.testing.assert_allclose(q, 0.75)

    def test_polydisk_sum(self):
        q = bs.q_f(ScalarMap.parse("z1 + z2", 2), dom.polydisk(2), [0.5, 0.0])
        np.testing.assert_allclose(q, np.hypot(0.75, 1.0))
        np.testing.assert_allclose(q, 1.25)

    @pytest.mark.parametrize("kind", ["disk", "ball", "polydisk"])
    def test_rayleigh_fallback_agrees(self, kind):
        # uniform samples: both routes cancel like eps/gap at the boundary,
        # so the 1e-10 agreement is only meaningful away from it
        domain = _domain(kind)
        Z = dom.sample(domain, "uniform", 1000, 41)
        for text in DICT_FUNCTIONS[kind]:
            f = ScalarMap.parse(text, domain.dim)
            field = bs.q_field(f, domain)
            vals, ok = field(Z)
            from bloch_wco import backends
            from bloch_wco.tape import compile_expr

            _, grads, ok2 = backends.eval_jets(compile_expr(f.expr, domain.dim), Z)
            ray = bs.rayleigh_q_from_grads(domain, Z[ok2], grads[ok2])
            np.testing.assert_allclose(vals[ok2], ray, rtol=1e-10, atol=1e-12)


class TestBetaSup:
    def test_coordinate_attains_one_at_origin(self):
        est = bs.beta_sup(ScalarMap.parse("z1", 1), dom.disk(), FAST_CFG)
        np.testing.assert_allclose(est.value, 1.0, atol=1e-6)
        assert np.abs(est.witness[0]) < 1e-2

    def test_constant_zero(self):
        est = bs.beta_sup(ScalarMap.parse("3 + 2i", 1), dom.disk(), FAST_CFG)
        assert est.value == 0.0

    def test_log_singularity_semi_norm_two(self):
        est = bs.beta_sup(ScalarMap.parse("plog(1 - z1)", 1), dom.disk(), FAST_CFG)
        np.testing.assert_allclose(est.value, 2.0, atol=1e-3)

    def test_pole_on_boundary_divergent(self):
        # invariant gradient of 1/(1 - z) grows like 2/gap near z = 1
        est = bs.beta_sup(ScalarMap.parse("1/(1 - z1)", 1), dom.disk(), FAST_CFG)
        assert est.divergent

    def test_bloch_norm_adds_value_at_origin(self):
        norm, est = bs.bloch_norm(ScalarMap.parse("2 + z1", 1), dom.disk(), FAST_CFG)
        np.testing.assert_allclose(norm, 2.0 + est.value, rtol=1e-15)


class TestHinfSup:
    def test_constant(self):
        est = bs.hinf_sup(ScalarMap.parse("3 - 4i", 1), dom.disk(), FAST_CFG)
        assert est.value == 5.0
        assert est.converged

    def test_coordinate(self):
        est = bs.hinf_sup(ScalarMap.parse("z1", 1), dom.disk(), FAST_CFG)
        np.testing.assert_allclose(est.value, 1.0, atol=1e-6)

    def test_log_weight_divergent_on_ball(self):
        # needs the full refinement depth to dig into the boundary corner
        from bloch_wco.engine import SupConfig

        psi = ScalarMap.parse("0.5*plog(1 - hdot((1, 0)))", 2)
        est = bs.hinf_sup(psi, dom.ball(2), SupConfig())
        assert est.divergent


class TestOmega:
    def test_origin(self):
        for domain in (dom.disk(), dom.ball(2), dom.polydisk(2)):
            om = bs.omega(domain, np.zeros(domain.dim))
            assert om.lower == om.upper == 0.0

    def test_ball_exact(self):
        om = bs.omega(dom.ball(2), [0.3, 0.4])
        assert om.exact
        np.testing.assert_allclose(om.upper, math.atanh(0.5), rtol=1e-12)

    def test_polydisk_interval(self):
        om = bs.omega(dom.polydisk(2), [0.5, 0.5])
        assert not om.exact
        expected_upper = math.sqrt(2.0) * math.atanh(0.5)
        np.testing.assert_allclose(om.upper, expected_upper, rtol=1e-12)
        assert om.lower <= om.upper
        # the aligned arctanh combination attains the product distance
        assert om.lower >= om.upper - 1e-9

    def test_polydisk_interval_generic_point(self):
        z = np.array([0.3 * np.exp(1j * 0.7), -0.6])
        om = bs.omega(dom.polydisk(2), z)
        assert 0.0 < om.lower <= om.upper
        assert om.lower >= om.upper - 1e-9


class TestPointEvaluationBounds:
    @pytest.mark.parametrize("kind", ["disk", "ball"])
    def test_lipschitz_growth(self, kind):
        # |f(z) - f(0)| <= (|f(0)| + beta) * dist(z, 0) where the distance is exact
        domain = _domain(kind)
        Z = seeded_points(domain, 400, 43)
        for text in DICT_FUNCTIONS[kind]:
            f = ScalarMap.parse(text, domain.dim)
            norm, _ = bs.bloch_norm(f, domain, FAST_CFG)
            f0 = f.eval(np.zeros(domain.dim))
            dist = dom.distance_origin_batch(domain, Z)
            for z, d in zip(Z, dist):
                lhs = abs(f.eval(z) - f0)
                assert lhs <= norm * d * (1 + 1e-9) + 1e-9

    @pytest.mark.parametrize("kind", ["disk", "ball", "polydisk"])
    def test_point_evaluation_bound(self, kind):
        # |f(z)| <= |f(0)| + omega_upper(z) * beta
        domain = _domain(kind)
        Z = seeded_points(domain, 300, 44)
        om_up = bs.omega_upper_batch(domain, Z)
        for text in DICT_FUNCTIONS[kind]:
            f = ScalarMap.parse(text, domain.dim)
            est = bs.beta_sup(f, domain, FAST_CFG)
            f0 = abs(f.eval(np.zeros(domain.dim)))
            for z, w in zip(Z, om_up):
                assert abs(f.eval(z)) <= f0 + w * est.value * (1 + 1e-9) + 1e-9

    def test_bounded_members_have_finite_semi_norm(self):
        # members with finite sup norm never trip the divergence flag
        for kind in ("disk", "ball", "polydisk"):
            domain = _domain(kind)
            for text in DICT_FUNCTIONS[kind]:
                if "plog" in text and "hdot((1, 0))" in text:
                    continue  # unbounded log weight
                f = ScalarMap.parse(text, domain.dim)
                sup = bs.hinf_sup(f, domain, FAST_CFG)
                if sup.converged:
                    assert not bs.beta_sup(f, domain, FAST_CFG).divergent


class TestNormEquivalencePolydisk:
    def test_sandwich(self):
        domain = dom.polydisk(2)
        Z = seeded_points(domain, 2000, 45)
        from bloch_wco import backends
        from bloch_wco.tape import compile_expr

        for text in DICT_FUNCTIONS["polydisk"]:
            f = ScalarMap.parse(text, 2)
            _, grads, ok = backends.eval_jets(compile_expr(f.expr, 2), Z)
            q = bs.q_from_grads(domain, Z[ok], grads[ok])
            terms = np.sum((1 - np.abs(Z[ok]) ** 2) * np.abs(grads[ok]), axis=1)
            n = domain.dim
            assert np.all(terms / n <= q * (1 + 1e-12) + 1e-15)
            assert np.all(q <= terms * (1 + 1e-12) + 1e-15)


class TestDictionaryBounds:
    @pytest.mark.parametrize("kind", ["disk", "ball", "polydisk"])
    def test_member_semi_norm_bounds_hold(self, kind):
        # sampled invariant gradients never exceed the declared bound
        domain = _domain(kind)
        Z = seeded_points(domain, 1500, 46)
        w = np.array([0.4 + 0.2j, -0.5j])[: domain.dim]
        members = dc.point_evaluation_members(domain, w) + dc.norm_probe_members(domain, w)
        for m in members:
            field = bs.q_field(m.scalar_map(), domain)
            vals, ok = field(Z)
            assert np.all(vals[ok] <= m.beta_bound * (1 + 1e-9) + 1e-12), m.name


class TestLittleBlochDecay:
    def test_polynomial_on_ball_decays(self):
        rep = bs.little_bloch_decay(ScalarMap.parse("z1^2 + z2", 2), dom.ball(2), cfg=FAST_CFG)
        assert rep.verdict == "decays"

    def test_log_on_disk_persists(self):
        rep = bs.little_bloch_decay(ScalarMap.parse("plog(1 - z1)", 1), dom.disk(), cfg=FAST_CFG)
        assert rep.verdict == "persists"
        inner = rep.shell_sups[-1][1]
        assert 1.9 <= inner <= 2.0 + 1e-9

    def test_constant_decays(self):
        rep = bs.little_bloch_decay(ScalarMap.parse("5", 1), dom.disk(), cfg=FAST_CFG)
        assert rep.verdict == "decays"
        assert all(s == 0.0 for _, s in rep.shell_sups)

    def test_shell_validation(self):
        with pytest.raises(ValueError):
            bs.little_bloch_decay(ScalarMap.parse("z1", 1), dom.disk(), shells=(1e-3, 1e-2))
