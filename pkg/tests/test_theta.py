"""Tests for the theta evaluator: frozen reference values, translation
laws, and agreement with the high-precision series oracle."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from thetacover.errors import InvalidArgumentError, PoleProximityError
from thetacover.theta import (ReducedArgument, ThetaParams, reduce_argument,
                              theta1, theta1_logderiv,
                              theta1_logderiv_deflated)

import oracle

# frozen against the 40-digit series oracle (tests/oracle.py)
THETA1_QUARTER_T1 = 0.643589764038585884090326842449
THETA1_COMPLEX_T1 = 1.38958837871262027025010187556 + 0.900451183936038790024248404304j
LOGDERIV_QUARTER_T1 = 3.16510345444743182366627014214


def rel_err(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


class TestParams:
    def test_nome_cached(self):
        p = ThetaParams(1.25)
        assert p.q == pytest.approx(math.exp(-math.pi * 1.25), rel=1e-15)
        assert 0.0 < p.q < 1.0

    @pytest.mark.parametrize("bad", [0.0, -1.0, float("nan"), float("inf")])
    def test_bad_modulus(self, bad):
        with pytest.raises(InvalidArgumentError):
            ThetaParams(bad)


class TestTheta1:
    def test_lattice_zero(self):
        p = ThetaParams(1.0)
        assert theta1(0.0, p) == 0.0
        assert theta1(1.0, p) == 0.0
        assert theta1(2 + 3j, p) == 0.0
        assert theta1(5e-15, p) == 0.0

    def test_oddness_spot(self):
        p = ThetaParams(1.0)
        x = 0.3 + 0.1j
        assert abs(theta1(-x, p) + theta1(x, p)) <= 1e-12 * abs(theta1(x, p))

    def test_frozen_values(self):
        p = ThetaParams(1.0)
        assert rel_err(theta1(0.25, p), THETA1_QUARTER_T1) <= 1e-12
        assert rel_err(theta1(0.3 + 0.4j, p), THETA1_COMPLEX_T1) <= 1e-12

    def test_against_series_oracle(self):
        rng = np.random.default_rng(7)
        for T in (0.5, 1.0, 3.0):
            p = ThetaParams(T)
            for _ in range(25):
                x = complex(rng.uniform(0, 1), rng.uniform(0, T))
                want = complex(oracle.theta1_series(x, T))
                assert rel_err(theta1(x, p), want) <= 1e-12

    def test_large_argument_reduction(self):
        p = ThetaParams(0.7)
        x = 13.4 - 7.9j
        want = complex(oracle.theta1_series(x, 0.7, dps=60))
        assert rel_err(theta1(x, p), want) <= 1e-11

    def test_vectorized_matches_scalar(self):
        p = ThetaParams(2.0)
        xs = np.array([0.1, 0.3 + 0.2j, -1.7 + 4.4j, 0.5 + 1.0j])
        vals = theta1(xs, p)
        for x, v in zip(xs, vals):
            assert v == theta1(complex(x), p)

    def test_nonfinite_rejected(self):
        p = ThetaParams(1.0)
        with pytest.raises(InvalidArgumentError):
            theta1(float("nan"), p)
        with pytest.raises(InvalidArgumentError):
            theta1(np.array([0.1, np.inf]), p)


@settings(max_examples=80, deadline=None)
@given(re=st.floats(-2.0, 3.0), im=st.floats(-2.0, 2.0),
       T=st.floats(0.5, 3.0))
def test_translation_laws(re, im, T):
    p = ThetaParams(T)
    x = complex(re, im * T)
    base = theta1(x, p)
    if abs(base) < 1e-8:  # too close to a lattice zero for a relative check
        return
    assert abs(theta1(-x, p) + base) <= 1e-10 * abs(base)
    assert abs(theta1(x + 1, p) + base) <= 1e-10 * abs(base)
    law = -np.exp(math.pi * T - 2j * math.pi * x) * base
    assert abs(theta1(x + 1j * T, p) - law) <= 1e-10 * abs(law)


class TestReduceArgument:
    def test_already_reduced(self):
        p = ThetaParams(1.0)
        r = reduce_argument(0.2 + 0.5j, p)
        assert r == ReducedArgument(x0=0.2 + 0.5j, n1=0, n2=0,
                                    multiplier=1.0 + 0.0j)

    def test_lattice_subtraction(self):
        p = ThetaParams(1.0)
        r = reduce_argument(1.2 + 1.5j, p)
        assert r.n1 == 1 and r.n2 == 1
        assert abs(r.x0 - (0.2 + 0.5j)) <= 1e-15

    def test_multiplier_example(self):
        # theta1(0.3 + iT) = -exp(pi - 0.6 pi i) theta1(0.3) for T = 1
        p = ThetaParams(1.0)
        r = reduce_argument(0.3 + 1j, p)
        want = -np.exp(math.pi - 0.6j * math.pi)
        assert abs(r.multiplier - want) <= 1e-12 * abs(want)
        lhs = complex(oracle.theta1_series(0.3 + 1j, 1.0))
        rhs = complex(oracle.theta1_series(0.3, 1.0))
        assert abs(lhs / rhs - want) <= 1e-12 * abs(want)

    @settings(max_examples=60, deadline=None)
    @given(re=st.floats(-4.0, 4.0), im=st.floats(-4.0, 4.0),
           T=st.floats(0.5, 3.0))
    def test_reconstruction(self, re, im, T):
        p = ThetaParams(T)
        x = complex(re, im)
        r = reduce_argument(x, p)
        assert 0.0 <= r.x0.real < 1.0
        assert 0.0 <= r.x0.imag < T * (1 + 1e-12)
        assert abs(r.x0 + r.n1 + 1j * T * r.n2 - x) <= 1e-9 * (1 + abs(x))
        assert r.multiplier != 0
        lhs = theta1(x, p)
        rhs = r.multiplier * theta1(r.x0, p)
        if abs(lhs) > 1e-8:
            assert abs(lhs - rhs) <= 1e-11 * abs(lhs)


class TestLogDerivative:
    def test_oddness_pair(self):
        p = ThetaParams(1.0)
        a = theta1_logderiv(0.25 + 0.5j, p)
        b = theta1_logderiv(-0.25 - 0.5j, p)
        assert abs(a + b) <= 1e-10 * abs(a)

    def test_periodicity(self):
        p = ThetaParams(1.0)
        x = 0.3 + 0.2j
        assert abs(theta1_logderiv(x + 1, p) - theta1_logderiv(x, p)) <= 1e-10

    def test_frozen_value(self):
        p = ThetaParams(1.0)
        assert rel_err(theta1_logderiv(0.25, p), LOGDERIV_QUARTER_T1) <= 1e-10

    def test_against_finite_differences(self):
        p = ThetaParams(1.0)
        h = 1e-6
        for x in (0.25, 0.37 + 0.41j, 0.11 + 0.83j):
            fd = (np.log(theta1(x + h, p)) - np.log(theta1(x - h, p))) / (2 * h)
            assert abs(theta1_logderiv(x, p) - fd) <= 1e-7

    def test_fd_sweep_away_from_lattice(self):
        rng = np.random.default_rng(11)
        p = ThetaParams(1.0)
        h = 1e-6
        count = 0
        while count < 50:
            x = complex(rng.uniform(0, 1), rng.uniform(0, 1))
            if min(abs(x), abs(x - 1), abs(x - 1j), abs(x - 1 - 1j)) < 0.05:
                continue
            fd = (np.log(theta1(x + h, p)) - np.log(theta1(x - h, p))) / (2 * h)
            if abs(fd.imag) > 2.0:  # branch jump of the log across the cut
                continue
            assert abs(theta1_logderiv(x, p) - fd) <= 1e-7
            count += 1

    def test_pole_proximity(self):
        p = ThetaParams(1.0)
        with pytest.raises(PoleProximityError):
            theta1_logderiv(1e-13, p)
        with pytest.raises(PoleProximityError):
            theta1_logderiv(1 + 1j + 1e-13, p)

    def test_against_series_oracle(self):
        p = ThetaParams(1.0)
        for x in (0.25, 0.3 + 0.2j, 0.9 + 0.9j):
            want = complex(oracle.theta1_logderiv_series(x, 1.0))
            assert abs(theta1_logderiv(x, p) - want) <= 1e-10 * (1 + abs(want))


class TestDeflatedLogDerivative:
    """theta1'/theta1 minus its pole at the nearest lattice point."""

    @pytest.mark.parametrize("w", [3e-3, 1e-5 + 2e-5j, 0.009j, 0.3 + 0.1j])
    def test_matches_oracle(self, w):
        p = ThetaParams(1.0)
        want = complex(oracle.theta1_logderiv_series(w, 1.0) - 1.0 / w)
        got = theta1_logderiv_deflated(w, p)
        assert abs(got - want) <= 1e-10 * (1 + abs(want))

    def test_smooth_at_lattice(self):
        p = ThetaParams(1.0)
        assert abs(theta1_logderiv_deflated(0.0, p)) < 1e-30
        near = theta1_logderiv_deflated(1e-9, p)
        assert abs(near) < 1e-6

    def test_shifted_cell(self):
        # near the lattice point 1 + iT the subtracted pole is the local one
        p = ThetaParams(1.0)
        w = 1 + 1j + 0.004 - 0.003j
        want = complex(oracle.theta1_logderiv_series(w, 1.0)
                       - 1.0 / (w - (1 + 1j)))
        assert abs(theta1_logderiv_deflated(w, p) - want) <= 1e-9
