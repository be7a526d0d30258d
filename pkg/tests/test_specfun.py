"""Model function evaluation against an independent mpmath oracle.

The oracle rebuilds P, Q from exact rationals and evaluates at 60 digits, so
any agreement here is between two genuinely different code paths.
"""

import math
from fractions import Fraction

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from banklaine.specfun import (
    EvalDomainError,
    HALF,
    PLAIN,
    PairIndex,
    build_coefficients,
    denom_roots,
    eval_model,
    eval_model_derivative,
    eval_model_turns,
    log_derivative,
    numer_roots,
    real_log_gap,
    real_log_gap_deriv,
    real_log_value,
    solve_value_negative_one,
    tail_expansion_residual,
)

PAIRS = [PairIndex(0, 0), PairIndex(1, 0), PairIndex(0, 1), PairIndex(1, 1),
         PairIndex(2, 1), PairIndex(3, 2), PairIndex(0, 4), PairIndex(5, 0)]


def oracle(pair: PairIndex, z: complex, dps: int = 60) -> mp.mpc:
    """g at z from exact coefficients, all in mpmath."""
    t = build_coefficients(pair)
    with mp.workdps(dps):
        w = mp.exp(mp.mpc(z))
        P = sum(mp.mpf(c.numerator) / mp.mpf(c.denominator) * w**j
                for j, c in enumerate(t.numer))
        Q = sum(mp.mpf(c.numerator) / mp.mpf(c.denominator) * w**i
                for i, c in enumerate(t.denom))
        return P * mp.exp(w) / Q


def assert_logpolar_close(sc, ref: mp.mpc, tol=5e-13):
    lm, ph = sc.logpolar.real, sc.logpolar.imag
    ref_lm = float(mp.log(abs(ref)))
    ref_ph = float(mp.arg(ref))
    assert abs(lm - ref_lm) <= tol * max(1.0, abs(ref_lm))
    d = (ph - ref_ph) % (2 * math.pi)
    assert min(d, 2 * math.pi - d) <= 5e-12


# ---- exact coefficient structure -------------------------------------------

def test_tables_1_1_exact():
    t = build_coefficients(PairIndex(1, 1))
    assert t.denom == (Fraction(1), Fraction(1, 3))
    assert t.numer == (Fraction(1), Fraction(-2, 3), Fraction(1, 6))


def test_truncated_exponential_for_m_zero():
    t = build_coefficients(PairIndex(0, 3))
    assert t.numer == tuple(Fraction((-1) ** j, math.factorial(j)) for j in range(7))
    assert t.denom == (Fraction(1),)


@pytest.mark.parametrize("pair", PAIRS)
def test_extreme_coefficient_identity(pair):
    assert build_coefficients(pair).identity_holds()


def test_denominator_coefficients_positive_decreasing():
    for m in (1, 2, 3, 6):
        for n in (0, 1, 2):
            A = build_coefficients(PairIndex(m, n)).denom
            assert all(a > 0 for a in A)
            assert all(b <= a for a, b in zip(A, A[1:]))  # A_0 = A_1 when n = 0
            # the recursion ratio A_{i+1}/A_i = (m-i)/((i+1)(m+2n-i))
            for i in range(m):
                assert A[i + 1] * (i + 1) * (m + 2 * n - i) == A[i] * (m - i)


def test_gap_series_head_vanishes():
    # implicit: building the tail raises if any c_k (k < N) is nonzero
    from banklaine.specfun import _gap_tail
    tail = _gap_tail(PairIndex(1, 1))
    assert tail[0] == pytest.approx(1.0 / 72.0, rel=1e-15)


# ---- evaluation vs oracle ---------------------------------------------------

GRID = [0.0 + 0.0j, 1.3 + 0.7j, -2.0 + 3.1j, 0.5 - 2.2j, 4.0 + 0.01j, -8.0 + 1.0j]


@pytest.mark.parametrize("pair", PAIRS)
@pytest.mark.parametrize("z", GRID)
def test_eval_matches_oracle(pair, z):
    assert_logpolar_close(eval_model(pair, z), oracle(pair, z))


def test_eval_survives_cancellation_depth():
    # (0,32) near w = 18: the double sum loses ~15 digits; mpmath fallback
    # has to hand back full accuracy
    pair = PairIndex(0, 32)
    z = complex(math.log(18.0), 0.03)
    assert_logpolar_close(eval_model(pair, z), oracle(pair, z, dps=120))


def test_half_variant_is_g_plus_one_over_two():
    pair, z = PairIndex(1, 1), 0.8 + 0.6j
    ref = (oracle(pair, z) + 1) / 2
    assert_logpolar_close(eval_model(pair, z, HALF), ref)


def test_large_x_does_not_overflow():
    sc = eval_model(PairIndex(2, 1), complex(700.0, 0.4))
    assert sc.log_modulus > 1e300  # e^700, kept as a log
    with pytest.raises(EvalDomainError):
        eval_model(PairIndex(2, 1), complex(710.0, 0.0))


# ---- singular points ---------------------------------------------------------

def test_pole_and_zero_hits():
    pair = PairIndex(1, 1)
    pole = complex(math.log(3.0), math.pi)        # Q(-3) = 0
    zroot = next(r for r in numer_roots(pair) if r.imag > 0)
    zero = complex(math.log(abs(zroot)), math.atan2(zroot.imag, zroot.real))
    assert eval_model(pair, pole).is_pole
    assert eval_model(pair, zero).is_zero
    # half variant: g = 0 maps to 1/2
    assert eval_model(pair, zero, HALF).to_complex() == pytest.approx(0.5)


def test_near_miss_is_not_singular():
    pair = PairIndex(1, 1)
    pole = complex(math.log(3.0), math.pi)
    assert eval_model(pair, pole + 1e-14).is_pole      # below resolvable distance
    sc = eval_model(pair, pole + 1e-11)                 # resolvable: huge but finite
    assert not sc.is_pole and sc.log_modulus > 20


def test_root_registries_annihilate():
    pair = PairIndex(2, 1)
    t = build_coefficients(pair)
    for r in numer_roots(pair):
        val = sum(float(c) * r**j for j, c in enumerate(t.numer))
        assert abs(val) < 1e-12
    for r in denom_roots(pair):
        val = sum(float(c) * r**i for i, c in enumerate(t.denom))
        assert abs(val) < 1e-12


def test_solve_negative_one_gives_half_zero():
    # zeros of the half variant sit where g = -1; the evaluated modulus
    # collapses to rounding residue (they are not registry poles/zeros of g)
    pair = PairIndex(1, 1)
    w = solve_value_negative_one(pair, -0.5 + 0.5j)
    z = complex(math.log(abs(w)), math.atan2(w.imag, w.real))
    sc = eval_model(pair, z, HALF)
    assert sc.is_zero or sc.log_modulus < -25.0


# ---- seam exactness ----------------------------------------------------------

def test_integer_turns_are_exactly_real():
    for pair in (PairIndex(0, 0), PairIndex(1, 1), PairIndex(0, 4)):
        for k in (-3, 0, 1, 7):
            sc = eval_model_turns(pair, 0.37, float(k))
            assert sc.phase == 0.0
            ref = eval_model_turns(pair, 0.37, 0.0)
            assert sc.log_modulus == ref.log_modulus


def test_turn_snapping_tolerance():
    sc = eval_model_turns(PairIndex(1, 1), 1.0, 5.0 + 4e-13)
    assert sc.phase == 0.0


# ---- derivatives -------------------------------------------------------------

def test_derivative_never_vanishes_and_matches_fd():
    pair = PairIndex(1, 1)
    for z in (0.2 + 0.4j, 1.0 - 1.1j, 0.0 + 0.0j):
        d = eval_model_derivative(pair, z).to_complex()
        h = 1e-6
        fd = (eval_model(pair, z + h).to_complex()
              - eval_model(pair, z - h).to_complex()) / (2 * h)
        assert abs(d - fd) < 5e-9 * abs(d)
        assert d != 0


def test_derivative_frozen_at_origin():
    # g'(0) = e / (binom(3,1) * 3! * Q(1)^2) * 1, with Q(1) = 4/3
    want = math.e / (3 * 6 * (4.0 / 3.0) ** 2)
    got = eval_model_derivative(PairIndex(1, 1), 0j).to_complex()
    assert got.real == pytest.approx(want, rel=1e-13)
    assert got.imag == pytest.approx(0.0, abs=1e-16)


def test_log_derivative_half_variant():
    pair, z = PairIndex(1, 1), 0.4 + 0.3j
    got = log_derivative(pair, z, HALF)
    gp = eval_model_derivative(pair, z).to_complex()
    g = eval_model(pair, z).to_complex()
    assert abs(got - gp / (g + 1)) < 1e-12 * abs(got)


# ---- real-axis fast paths ----------------------------------------------------

def test_real_log_gap_deep_left():
    # log(g(x)-1) = 4x - log 72 + O(e^x) for (1,1)
    got = real_log_gap(PairIndex(1, 1), -30.0)
    assert got == pytest.approx(4 * -30.0 - math.log(72.0), rel=1e-14)


def test_real_log_gap_matches_oracle_mid():
    pair, x = PairIndex(2, 1), 0.7
    with mp.workdps(50):
        want = float(mp.log(oracle(pair, x).real - 1))
    assert real_log_gap(pair, x) == pytest.approx(want, rel=1e-12)
    assert real_log_gap(pair, x, HALF) == pytest.approx(want - math.log(2), rel=1e-12)


def test_gap_derivative_limits():
    pair = PairIndex(1, 1)
    assert real_log_gap_deriv(pair, -35.0) == pytest.approx(4.0, rel=1e-10)
    x = 25.0
    # right regime: F' ~ e^x (1 + (2n - m) e^{-x})
    assert real_log_gap_deriv(pair, x) == pytest.approx(
        math.exp(x) + (2 - 1), rel=1e-9
    )


def test_gap_derivative_against_fd_everywhere():
    pair = PairIndex(0, 4)
    for x in (-20.0, -3.0, 0.0, 2.0, 10.0, 18.0):
        h = 1e-6
        fd = (real_log_gap(pair, x + h) - real_log_gap(pair, x - h)) / (2 * h)
        assert real_log_gap_deriv(pair, x) == pytest.approx(fd, rel=1e-7)


def test_tail_expansion_residual_frozen():
    # (0,0) at y=1: log(e^e/e - 1) vs 1 + 0 - 0 - log(1+1) exactly
    want = math.log(math.e - 1.0) - 1.0 + math.log(2.0)
    assert tail_expansion_residual(PairIndex(0, 0), 1.0) == pytest.approx(want, abs=1e-14)


def test_monotone_on_real_axis():
    xs = np.linspace(-20, 10, 121)
    for pair in (PairIndex(0, 0), PairIndex(1, 1), PairIndex(4, 2)):
        vals = [real_log_value(pair, float(x)) for x in xs]
        assert all(b > a for a, b in zip(vals, vals[1:]))


@settings(max_examples=60, deadline=None)
@given(
    st.integers(min_value=0, max_value=6),
    st.integers(min_value=0, max_value=3),
    st.floats(min_value=-30.0, max_value=5.0, allow_nan=False),
)
def test_value_above_one_on_axis(m, n, x):
    assert real_log_value(PairIndex(m, n), x) > 0.0
