"""Covering map construction, evaluation, Moebius transport, model
conversions, and the logarithmic differential."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import thetacover as tc
from thetacover.covering import (POINT_AT_INFINITY, VARIANT_BLASCHKE,
                                 eval_eta_deflated, is_infinity)
from thetacover.errors import (ConstructionError, InvalidArgumentError,
                               PoleProximityError)

import oracle

S1 = tc.annulus(1.0)
HP_ZEROS = (0.1j, 0.5 + 0.5j)
HP_POLES = (0.4j, 0.5 + 0.2j)
DISC_ZEROS = (0.1 + 0.2j, 0.4 + 0.7j)


@pytest.fixture(scope="module")
def hp_cover():
    return tc.halfplane_cover(tc.HalfPlaneDivisor(zeros=HP_ZEROS,
                                                  poles=HP_POLES), S1)


@pytest.fixture(scope="module")
def disc_cov():
    return tc.disc_cover(tc.DiscDivisor(zeros=DISC_ZEROS), S1)


class TestHalfplaneCover:
    def test_zero_and_reference(self, hp_cover):
        assert tc.eval_halfplane_cover(hp_cover, HP_ZEROS[0]) == 0.0
        v = hp_cover.reference_point
        assert abs(tc.eval_halfplane_cover(hp_cover, v) - 1.0) <= 1e-12

    def test_pole_marker(self, hp_cover):
        out = tc.eval_halfplane_cover(hp_cover, HP_POLES[0])
        assert is_infinity(out)

    def test_reference_clearance(self, hp_cover):
        v = hp_cover.reference_point
        assert min(abs(v - q) for q in HP_ZEROS + HP_POLES) > 1e-6

    def test_oracle_value(self, hp_cover):
        x = 0.25 + 0.25j
        want = oracle.halfplane_product(x, HP_ZEROS, HP_POLES, hp_cover.m, 1.0)
        want /= oracle.halfplane_product(hp_cover.reference_point, HP_ZEROS,
                                         HP_POLES, hp_cover.m, 1.0)
        got = tc.eval_halfplane_cover(hp_cover, x)
        assert abs(got - complex(want)) <= 1e-12 * abs(want)

    def test_reflection_symmetry(self, hp_cover):
        rng = np.random.default_rng(3)
        for _ in range(20):
            x = complex(rng.uniform(0.02, 0.48), rng.uniform(0, 1))
            a = tc.evaluate(hp_cover, -x.conjugate())
            b = tc.evaluate(hp_cover, x)
            assert abs(a - b.conjugate()) <= 1e-10 * (1 + abs(b))

    def test_upper_halfplane_orientation(self, hp_cover):
        rng = np.random.default_rng(4)
        pts = rng.uniform(0.03, 0.47, 40) + 1j * rng.uniform(0, 1, 40)
        vals, _ = tc.evaluate_many(hp_cover, pts)
        assert np.min(vals.imag) > 0

    def test_tangential_derivative_positive(self, hp_cover):
        # boundary orientation of the inner oval points downward (-i);
        # the covering differential has positive value on that tangent at v
        eta = tc.eta_h(hp_cover)
        val = tc.eval_eta(eta, hp_cover.reference_point) * (-1j)
        assert abs(val.imag) <= 1e-9 * (1 + abs(val))
        assert val.real > 0

    def test_single_valuedness(self, hp_cover):
        x = 0.23 + 0.37j
        h = tc.evaluate(hp_cover, x)
        assert abs(tc.evaluate(hp_cover, x + 1) - h) <= 1e-12 * (1 + abs(h))
        assert abs(tc.evaluate(hp_cover, x + 1j) - h) <= 1e-10 * (1 + abs(h))

    def test_invalid_divisor_refused(self):
        bad = tc.HalfPlaneDivisor(zeros=(0.1j, 0.5 + 0.5j),
                                  poles=(0.3j, 0.5 + 0.1j))
        with pytest.raises(ConstructionError):
            tc.halfplane_cover(bad, S1)
        cover = tc.halfplane_cover(bad, S1, unchecked=True)
        assert cover.m == 0

    def test_orientation_across_seeds(self):
        for seed in range(12):
            s = tc.annulus(0.6 + 0.2 * seed)
            d = tc.random_divisor(seed, 2 + seed % 4, "halfplane", s)
            cover = tc.halfplane_cover(d, s)
            pts = (np.linspace(0.05, 0.45, 6)[:, None]
                   + 1j * s.T * np.linspace(0.05, 0.95, 6)[None, :]).ravel()
            vals, _ = tc.evaluate_many(cover, pts)
            assert np.min(vals.imag) > 0


class TestDiscCover:
    def test_zero(self, disc_cov):
        assert tc.eval_disc_cover(disc_cov, DISC_ZEROS[0]) == 0.0

    def test_unimodular_on_ovals(self, disc_cov):
        for x in (0.33j, 0.5 + 0.77j, 0.01j, 0.5 + 0.5j):
            assert abs(abs(tc.eval_disc_cover(disc_cov, x)) - 1.0) <= 1e-9

    def test_oracle_value(self, disc_cov):
        x = 0.25 + 0.5j
        want = complex(oracle.disc_product(x, DISC_ZEROS, 1.0))
        got = tc.eval_disc_cover(disc_cov, x)
        assert abs(got - want) <= 1e-12 * abs(want)

    def test_reflection_symmetry(self, disc_cov):
        rng = np.random.default_rng(5)
        for _ in range(20):
            x = complex(rng.uniform(0.02, 0.48), rng.uniform(0, 1))
            a = tc.evaluate(disc_cov, -x.conjugate())
            b = tc.evaluate(disc_cov, x)
            assert abs(a * b.conjugate() - 1.0) <= 1e-10 / max(abs(b), 0.05)

    def test_contraction(self, disc_cov):
        pts = (np.linspace(0.03, 0.47, 10)[:, None]
               + 1j * np.linspace(0.02, 0.98, 10)[None, :]).ravel()
        vals, _ = tc.evaluate_many(disc_cov, pts)
        assert np.max(np.abs(vals)) < 1.0

    def test_phase_rotation(self):
        cover = tc.disc_cover(tc.DiscDivisor(zeros=DISC_ZEROS), S1,
                              phase=np.exp(0.7j))
        base = tc.disc_cover(tc.DiscDivisor(zeros=DISC_ZEROS), S1)
        x = 0.3 + 0.4j
        assert abs(tc.evaluate(cover, x)
                   - np.exp(0.7j) * tc.evaluate(base, x)) <= 1e-12


class TestClassical:
    def test_rational_example(self):
        d = tc.ClassicalDivisor(zeros=(0.0,), poles=(1.0,), scale_sign=-1)
        cover = tc.rational_cover(d)
        val = tc.eval_classical(cover, 0.5j)
        want = 0.5j / (1 - 0.5j)
        assert abs(val - want) <= 1e-14
        assert val.imag > 0

    def test_orientation_flip(self):
        d = tc.ClassicalDivisor(zeros=(0.0,), poles=(1.0,), scale_sign=1)
        cover = tc.rational_cover(d)
        assert tc.eval_classical(cover, 1j).imag > 0

    def test_real_on_axis(self):
        d = tc.random_divisor(9, 3, "classical-rational")
        cover = tc.rational_cover(d)
        vals, mask = tc.evaluate_many(cover, np.linspace(-5, 5, 101).astype(complex))
        assert np.max(np.abs(vals[~mask].imag)) == 0.0

    def test_pole_marker(self):
        d = tc.ClassicalDivisor(zeros=(0.0,), poles=(1.0,), scale_sign=-1)
        cover = tc.rational_cover(d)
        assert is_infinity(tc.eval_classical(cover, 1.0))

    def test_blaschke_single_factor(self):
        cover = tc.blaschke_cover(tc.BlaschkeDivisor(zeros=(0j,)))
        assert tc.eval_classical(cover, 0.0) == 0.0
        assert abs(tc.eval_classical(cover, 1.0) - 1.0) <= 1e-15

    def test_blaschke_unimodular(self):
        cover = tc.blaschke_cover(tc.BlaschkeDivisor(zeros=(0j, 0.5 + 0j)))
        w = np.exp(0.7j)
        assert abs(abs(tc.eval_classical(cover, w)) - 1.0) <= 1e-14


class TestMobius:
    def test_special_points(self):
        assert tc.mobius_l(1j) == 0.0
        assert tc.mobius_l(0.0) == -1.0
        assert tc.mobius_l(POINT_AT_INFINITY) == 1.0
        assert is_infinity(tc.mobius_l(-1j))
        assert tc.mobius_l_inv(0.0) == 1j
        assert is_infinity(tc.mobius_l_inv(1.0))
        assert tc.mobius_l_inv(POINT_AT_INFINITY) == -1j

    @settings(max_examples=50, deadline=None)
    @given(re=st.floats(-5, 5), im=st.floats(0.01, 5))
    def test_round_trip(self, re, im):
        u = complex(re, im)
        w = tc.mobius_l(u)
        assert abs(w) < 1.0
        assert abs(tc.mobius_l_inv(w) - u) <= 1e-12 * (1 + abs(u))

    def test_maps_boundary_to_circle(self):
        for u in (-3.0, 0.0, 7.5):
            assert abs(abs(tc.mobius_l(u)) - 1.0) <= 1e-15


class TestRingModel:
    def test_examples(self):
        s = tc.annulus(math.pi / math.log(2))
        assert abs(tc.strip_to_ring(0.0, s) - 1.0) <= 1e-15
        assert abs(tc.strip_to_ring(0.5, s) - 2.0) <= 1e-14
        assert abs(tc.strip_to_ring(1j * s.T / 2, s) + 1.0) <= 1e-14

    def test_round_trip(self):
        s = tc.annulus(1.4)
        rng = np.random.default_rng(13)
        for _ in range(25):
            x = complex(rng.uniform(0, 0.5), rng.uniform(0, 1.4))
            u = tc.strip_to_ring(x, s)
            assert 1.0 - 1e-12 <= abs(u) <= s.r * (1 + 1e-12)
            back = tc.ring_to_strip(u, s)
            assert abs(back - x) <= 1e-12 * (1 + abs(x))

    def test_zero_rejected(self):
        with pytest.raises(InvalidArgumentError):
            tc.ring_to_strip(0.0, tc.annulus(1.0))


class TestRationalToBlaschke:
    def test_worked_example(self):
        d = tc.ClassicalDivisor(zeros=(0.0,), poles=(1.0,), scale_sign=-1)
        cover = tc.rational_cover(d)
        blaschke = tc.rational_to_blaschke(cover)
        want = -(1 + 2j) / 5
        assert abs(blaschke.divisor.zeros[0] - want) <= 1e-10
        assert abs(blaschke.divisor.zeros[0]) < 1.0

    def test_degree_preserved(self):
        for seed in range(30):
            n = 1 + seed % 8
            d = tc.random_divisor(seed, n, "classical-rational")
            blaschke = tc.rational_to_blaschke(tc.rational_cover(d))
            assert blaschke.degree == n
            assert all(abs(a) < 1.0 for a in blaschke.divisor.zeros)

    def test_relabeling_invariance(self):
        d = tc.random_divisor(3, 4, "classical-rational")
        cover = tc.rational_cover(d)
        shuffled = tc.ClassicalDivisor(zeros=d.zeros[::-1], poles=d.poles[::-1],
                                       scale_sign=d.scale_sign)
        # construction sorts internally, so shuffled input gives the same map
        other = tc.rational_cover(tc.ClassicalDivisor(
            zeros=tuple(sorted(shuffled.zeros)),
            poles=tuple(sorted(shuffled.poles)),
            scale_sign=shuffled.scale_sign))
        za = np.asarray(tc.rational_to_blaschke(cover).divisor.zeros)
        zb = np.asarray(tc.rational_to_blaschke(other).divisor.zeros)
        assert np.max(np.abs(za - zb)) <= 1e-8

    def test_composition_identity(self):
        rng = np.random.default_rng(17)
        for seed in (0, 5, 11):
            d = tc.random_divisor(seed, 3, "classical-rational")
            cover = tc.rational_cover(d)
            blaschke = tc.rational_to_blaschke(cover)
            us = rng.uniform(-4, 4, 64) + 1j * rng.uniform(0, 4, 64)
            lhs, mask = tc.evaluate_many(cover, us)
            with np.errstate(invalid="ignore"):
                lhs = np.where(mask, 1.0, (lhs - 1j) / (lhs + 1j))
            rhs, _ = tc.evaluate_many(blaschke, (us - 1j) / (us + 1j))
            assert np.max(np.abs(lhs - rhs)) <= 1e-8


class TestEta:
    def test_kappa_values(self, hp_cover, disc_cov):
        assert tc.eta_h(hp_cover).kappa == -2j * math.pi * hp_cover.m
        assert tc.eta_h(disc_cov).kappa == 0.0

    def test_matches_normalize(self, disc_cov):
        eta = tc.eta_h(disc_cov)
        normalized = tc.normalize_eta(eta.pairs, S1)
        assert abs(normalized.kappa - eta.kappa) <= 1e-9
        x = 0.3 + 0.3j
        assert abs(tc.eval_eta(eta, x) - tc.eval_eta(normalized, x)) <= 1e-9

    def test_halfplane_kappa_from_periods(self):
        d = tc.HalfPlaneDivisor(zeros=(0.9j, 0.5 + 0.5j),
                                poles=(0.1j, 0.5 + 0.3j))
        cover = tc.halfplane_cover(d, S1)
        assert cover.m == 1
        eta = tc.eta_h(cover)
        normalized = tc.normalize_eta(eta.pairs, S1)
        assert abs(normalized.kappa - (-2j * math.pi)) <= 1e-9

    def test_finite_difference_consistency(self, disc_cov):
        eta = tc.eta_h(disc_cov)
        x = 0.25 + 0.25j
        h = 1e-6
        fd = (np.log(tc.evaluate(disc_cov, x + h))
              - np.log(tc.evaluate(disc_cov, x - h))) / (2 * h)
        assert abs(tc.eval_eta(eta, x) - fd) <= 1e-6

    def test_pole_proximity_guard(self, disc_cov):
        eta = tc.eta_h(disc_cov)
        with pytest.raises(PoleProximityError):
            tc.eval_eta(eta, DISC_ZEROS[0] + 1e-8)

    def test_case_i_kappa_imaginary(self):
        # both poles on ovals: the normalized additive constant is purely
        # imaginary, equal to -(2 pi i / T) Im(z - p)
        z, p = 0.2j, 0.7j
        eta = tc.normalize_eta([(z, p)], S1)
        want = -2j * math.pi * (z - p).imag
        assert abs(eta.kappa.real) <= 1e-9
        assert abs(eta.kappa - want) <= 1e-9

    def test_case_i_differential_real(self):
        # reflection symmetry of a real differential: f(-conj(x)) = -conj(f(x))
        eta = tc.normalize_eta([(0.2j, 0.5 + 0.6j)], S1)
        for x in (0.3 + 0.3j, 0.1 + 0.8j):
            a = tc.eval_eta(eta, -np.conj(x))
            b = tc.eval_eta(eta, x)
            assert abs(a + np.conj(b)) <= 1e-9 * (1 + abs(b))

    def test_case_ii_kappa_zero_and_imaginary_differential(self):
        z = 0.25 + 0.3j
        eta = tc.normalize_eta([(z, -np.conj(z))], S1)
        assert abs(eta.kappa) <= 1e-9
        # imaginary differential: f(-conj(x)) = +conj(f(x))
        for x in (0.1 + 0.1j, 0.4 + 0.8j):
            a = tc.eval_eta(eta, -np.conj(x))
            b = tc.eval_eta(eta, x)
            assert abs(a - np.conj(b)) <= 1e-9 * (1 + abs(b))

    def test_empty_pairs(self):
        eta = tc.normalize_eta([], S1)
        assert eta.kappa == 0.0
        assert tc.eval_eta(eta, 0.3 + 0.3j) == 0.0

    def test_coincident_pair_rejected(self):
        with pytest.raises(InvalidArgumentError):
            tc.normalize_eta([(0.2j, 0.2j + 1j)], S1)

    def test_deflated_consistency(self):
        eta = tc.normalize_eta([(0.2j, 0.7j)], S1)
        x = 0.2j + 0.05
        direct = tc.eval_eta(eta, x)
        deflated = eval_eta_deflated(eta, x, ((0, "z", 0.2j),))
        assert abs(deflated + 1.0 / (x - 0.2j) - direct) <= 1e-9 * (1 + abs(direct))
