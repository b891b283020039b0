"""Closed-form averaged functions against the quadrature oracle."""

import math

import numpy as np
import pytest

from avgcycles.avgcore import (
    DegenerateEigenvalueError,
    build_averaged_system,
    build_f1,
    build_f2,
    build_gamma,
    f1_kernel_constraints,
    oracle_f1,
    oracle_f2,
    oracle_gamma,
    project_to_kernel,
)
from avgcycles.sysspec import random_spec, zero_spec
from avgcycles.trigkernel import TWO_PI

POINTS = [np.array(v) for v in ([0.8], [1.3], [0.45])]


def _points(m):
    rng = np.random.default_rng(99)
    return [np.concatenate([[0.5 + 0.4 * k], rng.uniform(-0.8, 0.8, m)]) for k in range(3)]


class TestF1Oracle:
    @pytest.mark.parametrize("n,m,d,phi", [
        (1, 0, 0, math.pi / 2),
        (2, 1, 1, math.pi / 3),
        (2, 1, 2, math.pi),
        (3, 0, 1, 2.0),
    ])
    def test_matches_quadrature(self, n, m, d, phi):
        spec = random_spec(n, m, d, phi, 11, scale=0.5)
        f1 = build_f1(spec)
        for nu in _points(m):
            closed = np.array([p(nu) for p in f1])
            np.testing.assert_allclose(closed, oracle_f1(spec, nu), atol=1e-10)

    def test_zero_spec_gives_zero(self):
        f1 = build_f1(zero_spec(2, 1, 1, 1.0))
        assert all(p.is_zero() for p in f1)


class TestKernelConstraints:
    def test_projection_kills_f1(self):
        spec = random_spec(2, 1, 2, math.pi / 3, 3, scale=0.7)
        ps = project_to_kernel(spec)
        f1 = build_f1(ps)
        assert max(p.max_coeff() for p in f1) < 1e-10

    def test_constraints_annihilate_projected_tables(self):
        spec = random_spec(2, 0, 1, 1.2, 5)
        ps = project_to_kernel(spec)
        for con in f1_kernel_constraints(ps):
            total = sum(w * ps.table(fam, sign, con.component - 1 if fam == "c" else None).get(idx)
                        for fam, sign, idx, w in con.terms)
            assert abs(total) < 1e-10


class TestGammaOracle:
    def test_matches_quadrature(self):
        spec = random_spec(2, 0, 2, 1.1, 21, scale=0.5)
        gamma = build_gamma(spec)
        for nu in _points(0):
            closed = np.array([g(nu) for g in gamma])
            np.testing.assert_allclose(closed, oracle_gamma(spec, nu), atol=1e-9)

    def test_literal_flag_changes_result(self):
        # the compatibility flag freezes the slave decay rate at one
        spec = random_spec(2, 0, 1, 1.1, 22, mu=[-1.7], scale=0.5)
        default = build_gamma(spec)[0]
        literal = build_gamma(spec, literal_gamma=True)[0]
        diff = max(abs(default.terms.get(mo, 0.0) - literal.terms.get(mo, 0.0))
                   for mo in set(default.terms) | set(literal.terms))
        assert diff > 1e-6


class TestF2Oracle:
    @pytest.mark.parametrize("n,m,d,phi", [
        (2, 0, 0, math.pi / 2),
        (2, 1, 1, math.pi / 3),
        (1, 0, 1, math.pi),
    ])
    def test_matches_quadrature_on_kernel(self, n, m, d, phi):
        spec = project_to_kernel(random_spec(n, m, d, phi, 31, scale=0.5))
        rf2 = build_f2(spec, check_f1=False)
        for nu in _points(m):
            closed = np.array([p(nu) for p in rf2]) / nu[0]
            np.testing.assert_allclose(closed, oracle_f2(spec, nu), atol=1e-8)

    def test_f2_requires_zero_f1(self):
        spec = random_spec(1, 0, 0, 1.0, 41, scale=0.5)
        with pytest.raises(ValueError, match="f_1"):
            build_f2(spec)

    def test_degenerate_eigenvalue_rejected(self):
        # a slave decay rate this close to zero degenerates the return factor
        spec = random_spec(1, 0, 1, 1.0, 43, mu=[1e-14], scale=0.2)
        with pytest.raises(DegenerateEigenvalueError):
            build_f2(project_to_kernel(spec), check_f1=False)


class TestBuildAveragedSystem:
    def test_second_order_only_when_f1_vanishes(self):
        spec = random_spec(2, 0, 0, 1.3, 51, scale=0.5)
        avg = build_averaged_system(spec)
        assert avg.rf2 is None
        avg2 = build_averaged_system(project_to_kernel(spec))
        assert avg2.rf2 is not None

    def test_full_turn_angle_supported(self):
        spec = project_to_kernel(random_spec(2, 0, 0, TWO_PI, 52, scale=0.5))
        avg = build_averaged_system(spec)
        assert avg.rf2 is not None
