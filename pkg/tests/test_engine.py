"""Engine contracts: determinism, soundness, monotonicity, divergence, limsups."""

import numpy as np
import pytest

from bloch_wco import domains as dom
from bloch_wco.engine import EngineError, SupConfig, shell_limsup, sup_estimate
from conftest import FAST_CFG


def _field(fn):
    def field(Z):
        vals = fn(Z)
        return vals, np.isfinite(vals)

    return field


CUSP = _field(lambda Z: (1 - np.abs(Z[:, 0]) ** 2) / np.abs(1 - Z[:, 0]))


class TestSupEstimate:
    def test_constant_field(self):
        est = sup_estimate(_field(lambda Z: np.full(len(Z), 2.5)), dom.disk(), FAST_CFG)
        assert est.value == 2.5
        assert est.converged and not est.divergent

    def test_norm_field_reaches_boundary(self):
        est = sup_estimate(_field(lambda Z: np.linalg.norm(Z, axis=1)), dom.ball(2), FAST_CFG)
        assert est.value >= 1.0 - FAST_CFG.shells[-1]
        assert est.value < 1.0
        assert est.converged

    def test_boundary_cusp_value_and_witness(self):
        est = sup_estimate(CUSP, dom.disk(), FAST_CFG)
        np.testing.assert_allclose(est.value, 2.0, atol=1e-3)
        assert abs(est.witness[0] - 1.0) < 1e-3
        assert est.converged

    def test_soundness_value_is_attained_at_witness(self):
        est = sup_estimate(CUSP, dom.disk(), FAST_CFG)
        vals, ok = CUSP(est.witness[None, :])
        assert ok[0]
        np.testing.assert_allclose(vals[0], est.value, rtol=0, atol=0)

    def test_bitwise_determinism(self):
        a = sup_estimate(CUSP, dom.disk(), FAST_CFG)
        b = sup_estimate(CUSP, dom.disk(), FAST_CFG)
        assert a.value == b.value
        assert a.witness.tobytes() == b.witness.tobytes()
        assert a.shell_table == b.shell_table
        assert (a.converged, a.divergent, a.slope) == (b.converged, b.divergent, b.slope)

    def test_more_refinement_never_decreases_value(self):
        values = []
        for iters in (0, 5, 30):
            cfg = FAST_CFG.replace(refine_iters=iters)
            values.append(sup_estimate(CUSP, dom.disk(), cfg).value)
        assert values[0] <= values[1] <= values[2]

    def test_divergent_field_flagged(self):
        field = _field(lambda Z: -np.log(1 - np.abs(Z[:, 0]) ** 2))
        est = sup_estimate(field, dom.disk(), FAST_CFG)
        assert est.divergent and not est.converged

    def test_singular_fraction_raises(self):
        def broken(Z):
            vals = np.full(len(Z), np.nan)
            return vals, np.zeros(len(Z), dtype=bool)

        with pytest.raises(EngineError) as err:
            sup_estimate(broken, dom.disk(), FAST_CFG)
        assert err.value.witness is not None

    def test_config_validation(self):
        with pytest.raises(ValueError):
            SupConfig(shells=(1e-3, 1e-2))
        with pytest.raises(ValueError):
            SupConfig(shells=())
        with pytest.raises(ValueError):
            SupConfig(n_uniform=0)
        with pytest.raises(ValueError):
            SupConfig(tol=0.0)


class TestShellLimsup:
    def test_zero_field(self):
        trig = _field(lambda Z: 1 - np.abs(Z[:, 0]))
        est = shell_limsup(_field(lambda Z: np.zeros(len(Z))), trig, dom.disk(), FAST_CFG)
        assert est.verdict == "zero"

    def test_constant_one_positive(self):
        trig = _field(lambda Z: 1 - np.abs(Z[:, 0]))
        est = shell_limsup(_field(lambda Z: np.ones(len(Z))), trig, dom.disk(), FAST_CFG)
        assert est.verdict == "positive"
        assert est.shell_table[-1][1] == 1.0

    def test_decaying_field_zero(self):
        trig = _field(lambda Z: 1 - np.abs(Z[:, 0]))
        field = _field(lambda Z: (1 - np.abs(Z[:, 0])) ** 0.75)
        est = shell_limsup(field, trig, dom.disk(), FAST_CFG)
        assert est.verdict == "zero"

    def test_empty_shell_range_bounded_away(self):
        # trigger stays above 0.1 everywhere: the boundary filter is empty
        trig = _field(lambda Z: 1 - 0.9 * np.abs(Z[:, 0]))
        est = shell_limsup(_field(lambda Z: np.ones(len(Z))), trig, dom.disk(), FAST_CFG)
        assert est.verdict == "zero"
        assert "empty-shell" in est.note
        assert est.min_trigger > FAST_CFG.shells[0]

    def test_cumulative_tables_non_increasing_inward(self):
        trig = _field(lambda Z: 1 - np.abs(Z[:, 0]))
        field = _field(lambda Z: np.sqrt(np.maximum(1 - np.abs(Z[:, 0]), 0)))
        est = shell_limsup(field, trig, dom.disk(), FAST_CFG)
        sups = [s for _, s in est.shell_table if s is not None]
        assert all(sups[i] >= sups[i + 1] - 1e-12 for i in range(len(sups) - 1))

    def test_determinism(self):
        trig = _field(lambda Z: 1 - np.abs(Z[:, 0]))
        field = _field(lambda Z: np.sqrt(np.maximum(1 - np.abs(Z[:, 0]), 0)))
        a = shell_limsup(field, trig, dom.disk(), FAST_CFG)
        b = shell_limsup(field, trig, dom.disk(), FAST_CFG)
        assert a.shell_table == b.shell_table
        assert a.shell_counts == b.shell_counts
        assert a.verdict == b.verdict

    def test_broken_trigger_is_inconclusive(self):
        def broken(Z):
            return np.full(len(Z), np.nan), np.zeros(len(Z), dtype=bool)

        est = shell_limsup(_field(lambda Z: np.ones(len(Z))), broken, dom.disk(), FAST_CFG)
        assert est.verdict == "inconclusive"
        assert "failed" in est.note
