"""Direct integration of the discontinuous system and cycle refinement."""

import math

import numpy as np
import pytest

from avgcycles.avgcore import numeric_g
from avgcycles.flowsim import (
    DenominatorVanishedError,
    RCrossedZeroError,

    displacement,
    distance_slope,
    eps_sweep,
    integrate_theta,
    loglog_slope,
    refine_cycle,
    return_map,
    write_cycle_csv,
)
from avgcycles.generators import gen_prop10
from avgcycles.sysspec import random_spec, zero_spec
from avgcycles.trigkernel import TWO_PI


class TestIntegration:
    def test_unperturbed_master_is_identity(self):
        spec = zero_spec(1, 1, 1, 1.0)
        z0 = np.array([1.1, 0.4])
        np.testing.assert_allclose(return_map(spec, 0.0, z0), z0, atol=1e-10)

    def test_unperturbed_slave_contracts(self):
        spec = zero_spec(1, 0, 1, 1.0, mu=[-0.5])
        z0 = np.array([1.0, 0.8])
        out = return_map(spec, 0.0, z0)
        assert out[1] == pytest.approx(0.8 * math.exp(-0.5 * TWO_PI), rel=1e-9)

    def test_zone_splitting_continuity(self):
        spec = random_spec(1, 0, 0, math.pi / 3, 1, scale=0.3)
        mid = integrate_theta(spec, 1e-2, [1.0], (0.0, 1.9))
        full = integrate_theta(spec, 1e-2, mid.x, (1.9, TWO_PI))
        np.testing.assert_allclose(full.x, return_map(spec, 1e-2, [1.0]), atol=1e-10)

    def test_r_zero_crossing_raises(self):
        with pytest.raises(RCrossedZeroError):
            integrate_theta(zero_spec(1, 0, 0, 1.0), 0.0, [-1.0], (0.0, 1.0))

    def test_large_eps_denominator_guard(self):
        # X_a = 5y, X_b = -5x gives angular speed 1 - 5*eps everywhere
        spec = zero_spec(1, 0, 0, 1.0)
        for sign in ("+", "-"):
            spec.table("a", sign).set((0, 1), 5.0)
            spec.table("b", sign).set((1, 0), -5.0)
        with pytest.raises(DenominatorVanishedError):
            return_map(spec, 0.5, [1.0])


class TestDisplacementExpansion:
    def test_first_order_term_matches_quadrature(self):
        # master-only configuration: every state component is averaged
        spec = random_spec(2, 1, 1, math.pi / 3, 5, scale=0.4)
        z = np.array([1.1, 0.3])
        g1 = numeric_g(spec, 1, z)
        eps_list = [1e-2, 5e-3, 2.5e-3, 1.25e-3]
        errs = [np.max(np.abs(displacement(spec, eps, z) / eps - g1)) for eps in eps_list]
        assert loglog_slope(eps_list, errs) == pytest.approx(1.0, abs=0.15)

    def test_master_components_with_slave_zero(self):
        # with a contracting tail, the first-order term is reproduced in the
        # master components when the tail starts at zero
        spec = random_spec(1, 0, 1, 1.2, 6, scale=0.4)
        z = np.array([0.9, 0.0])
        g1 = numeric_g(spec, 1, z)
        eps_list = [1e-2, 5e-3, 2.5e-3]
        errs = [abs(displacement(spec, eps, z)[0] / eps - g1[0]) for eps in eps_list]
        assert loglog_slope(eps_list, errs) == pytest.approx(1.0, abs=0.15)


class TestRefineCycle:
    def test_predicted_zero_refines(self):
        result = gen_prop10(1, 0, math.pi / 2)
        rec = refine_cycle(result.spec, 2.5e-3, result.zeros[0])
        assert rec.accepted
        assert rec.period_residual < 1e-10
        assert rec.distance < 0.05

    def test_eps_sweep_converges_linearly(self):
        result = gen_prop10(1, 0, math.pi / 2)
        records = eps_sweep(result.spec, result.zeros[0], (1e-2, 5e-3, 2.5e-3, 1.25e-3))
        assert all(r.accepted for r in records)
        assert distance_slope(records) == pytest.approx(1.0, abs=0.15)


def test_cycle_csv(tmp_path):
    result = gen_prop10(1, 0, math.pi / 2)
    records = eps_sweep(result.spec, result.zeros[0], (1e-2, 5e-3))
    path = tmp_path / "cycles.csv"
    write_cycle_csv(path, records, result.spec.d)
    lines = path.read_text().strip().splitlines()
    assert lines[0].startswith("epsilon,r")
    assert len(lines) == 3
