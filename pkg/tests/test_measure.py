import math

import mpmath
import numpy as np
import pytest

from mdwindow import (
    MEAN_TAU,
    MU0,
    ParameterError,
    Params,
    StateIndexError,
    build_measure_table,
    log_interval_tail,
    log_mu,
    log_p,
    mean_tau,
    p1,
    params_from_window,
    second_moment_jump,
    sigma,
    validate_params,
    window_from_params,
)
from mdwindow.measure import small_mass_tail

from conftest import ALPHA_GRID, DEFAULT


# ---------------------------------------------------------------- parameters

def test_validate_params_accepts_valid_pair():
    p = validate_params(0.3, 0.05)
    assert (p.alpha, p.beta) == (0.3, 0.05)


@pytest.mark.parametrize(
    "alpha, beta, fragment",
    [
        (0.3, 0.11, "alpha + 2*beta"),   # 0.3 + 0.22 >= 0.5
        (0.0, 0.1, "alpha > 0"),
        (-0.2, 0.1, "alpha > 0"),
        (0.3, -0.01, "beta >= 0"),
        (0.5, 0.0, "alpha + 2*beta"),
    ],
)
def test_validate_params_names_violated_inequality(alpha, beta, fragment):
    with pytest.raises(ParameterError) as err:
        validate_params(alpha, beta)
    assert fragment in str(err.value)


# ------------------------------------------------------------------- weights

@pytest.mark.parametrize("alpha", ALPHA_GRID)
def test_log_mu_origin_is_alpha_independent(alpha):
    # telescoping the defining identity at n = 1 against normalization
    # forces mu_0 = 1 - 1/e regardless of alpha
    assert log_mu(Params(alpha, 0.0), 0) == pytest.approx(
        math.log(-math.expm1(-1.0)), abs=1e-14
    )


def test_log_mu_level_two_high_precision_reference():
    # mu_2 = e^-1 - e^(-2^0.3), evaluated at 50 digits
    with mpmath.workdps(50):
        ref = mpmath.exp(-1) - mpmath.exp(-mpmath.mpf(2) ** mpmath.mpf("0.3"))
        ref = float(mpmath.log(ref))
    assert log_mu(DEFAULT, 2) == pytest.approx(ref, abs=1e-13)
    assert math.exp(log_mu(DEFAULT, 2)) == pytest.approx(0.07592, abs=5e-6)


@pytest.mark.parametrize("alpha", ALPHA_GRID)
def test_log_mu_rejects_level_one(alpha):
    with pytest.raises(StateIndexError):
        log_mu(Params(alpha, 0.0), 1)


def test_log_mu_rejects_negative_level():
    with pytest.raises(StateIndexError):
        log_mu(DEFAULT, -3)


@pytest.mark.parametrize("alpha", ALPHA_GRID)
def test_defining_tail_identity_partial_sums(alpha):
    # sum_{k=n+1}^{N} (k-1) mu_k + exp(-N^alpha) must reproduce exp(-n^alpha)
    p = Params(alpha, 0.0)
    n_max, pad = 1000, 10 ** 4
    table = build_measure_table(p, n_max + pad)
    ks = np.arange(2, n_max + pad + 1)
    sized = (ks - 1) * np.exp(table.log_mu_levels)
    suffix = np.concatenate((np.cumsum(sized[::-1])[::-1], [0.0]))
    for n in (1, 2, 17, 300, 1000):
        big_n = n + pad
        partial = suffix[n + 1 - 2] - suffix[big_n + 1 - 2]
        resid = abs(partial + math.exp(-float(big_n) ** alpha) - math.exp(-float(n) ** alpha))
        assert resid < 1e-10


@pytest.mark.parametrize("alpha", ALPHA_GRID)
def test_invariance_mu0_pn_equals_mun(alpha):
    p = Params(alpha, 0.0)
    for n in range(2, 1001):
        lhs = math.log(MU0) + log_p(p, n)
        assert lhs == pytest.approx(log_mu(p, n), abs=1e-14)


def test_mu_values_positive_and_finite():
    table = build_measure_table(DEFAULT, 5000)
    assert np.all(np.isfinite(table.log_mu_levels))


# ---------------------------------------------------------------- transition

def test_log_p_ratio_for_level_two():
    assert log_p(DEFAULT, 2) == pytest.approx(
        log_mu(DEFAULT, 2) - log_mu(DEFAULT, 0), abs=1e-14
    )


@pytest.mark.parametrize("alpha", ALPHA_GRID)
def test_p1_exceeds_two_fifths(alpha):
    # sum_{n>=2} mu_n <= e^-1 gives p_1 >= 1 - e^-1/(1 - e^-1) > 0.41
    assert p1(Params(alpha, 0.0)) > 0.4


def test_p1_against_direct_summation():
    # independent route: raw mu_n summed to exhaustion (alpha = 0.45 decays
    # fast enough for plain summation to converge below 1e-14)
    alpha = 0.45
    ns = np.arange(2, 300000, dtype=np.float64)
    mu = (np.exp(-((ns - 1) ** alpha)) - np.exp(-(ns ** alpha))) / (ns - 1)
    direct = 1.0 - mu.sum() / MU0
    assert p1(Params(alpha, 0.0)) == pytest.approx(direct, abs=1e-12)


def test_small_mass_tail_against_direct_summation():
    alpha = 0.45
    p = Params(alpha, 0.0)
    n_trunc = 2000
    ns = np.arange(n_trunc + 1, 500000, dtype=np.float64)
    direct = float(
        ((np.exp(-((ns - 1) ** alpha)) - np.exp(-(ns ** alpha))) / (ns - 1)).sum()
    )
    tail, err = small_mass_tail(p, n_trunc)
    assert tail == pytest.approx(direct, rel=1e-9)
    assert abs(tail - direct) <= err + 1e-15


@pytest.mark.parametrize("alpha", [0.3, 0.45])
def test_p_law_normalizes(alpha):
    p = Params(alpha, 0.0)
    n_max = 200000
    table = build_measure_table(p, n_max)
    mass = math.exp(log_p(p, 1)) + float(np.exp(table.log_mu_levels - table.log_mu0).sum())
    # remainder of the p-series is below exp(-N^alpha) / (N mu_0)
    rem = math.exp(-float(n_max) ** alpha) / (n_max * MU0)
    assert mass == pytest.approx(1.0, abs=rem + 1e-12)


def test_p_values_nonnegative():
    p = DEFAULT
    for n in range(1, 2000):
        assert log_p(p, n) <= 0.0  # finite log-probability, hence p_n > 0


# ------------------------------------------------------------- interval tail

@pytest.mark.parametrize("alpha", ALPHA_GRID)
def test_interval_tail_closed_form(alpha):
    p = Params(alpha, 0.0)
    for k in (1, 2, 5, 77, 10 ** 6):
        assert log_interval_tail(p, k) == -(float(k) ** alpha)


def test_interval_tail_examples():
    # the quadratic-exponent arithmetic -sqrt(4) = -2, checked on the same
    # formula the valid-domain operation computes (alpha = 1/2 itself is
    # outside the admissible exponent region)
    assert -(4.0 ** 0.5) == -2.0
    p = Params(0.49, 0.0)
    assert log_interval_tail(p, 4) == pytest.approx(-(4.0 ** 0.49), abs=1e-15)


def test_interval_tail_k1_matches_origin_complement():
    # P[A+B > 1] = P[A+B > 0] = 1 - mu_0 = e^-1 because level 1 is empty
    assert math.exp(log_interval_tail(DEFAULT, 1)) == pytest.approx(
        1.0 - MU0, abs=1e-15
    )


def test_interval_tail_strictly_decreasing():
    vals = [log_interval_tail(DEFAULT, k) for k in range(1, 200)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


# ------------------------------------------------------------------- moments

@pytest.mark.parametrize("alpha", ALPHA_GRID)
def test_mean_tau_universal(alpha):
    assert mean_tau(Params(alpha, 0.0)) == pytest.approx(
        math.e / (math.e - 1.0), abs=1e-14
    )
    assert mean_tau(Params(alpha, 0.0)) == MEAN_TAU


def test_second_moment_brute_force_beta_zero():
    # independent oracle: raw arithmetic, term-by-term to N = 1e5
    alpha = 0.3
    p = Params(alpha, 0.0)
    ns = np.arange(2, 100001, dtype=np.float64)
    mu = (np.exp(-((ns - 1) ** alpha)) - np.exp(-(ns ** alpha))) / (ns - 1)
    counts = np.minimum(np.floor(np.sqrt(ns)), ns - 1)
    brute = float((mu / MU0 * counts ** 2).sum())
    assert second_moment_jump(p, 1e-12) == pytest.approx(brute, abs=1e-10)


def test_second_moment_positive():
    assert second_moment_jump(DEFAULT, 1e-10) > 0.0


def test_second_moment_tolerance_consistency():
    loose = second_moment_jump(DEFAULT, 1e-6)
    tight = second_moment_jump(DEFAULT, 1e-13)
    assert loose == pytest.approx(tight, abs=2e-6)


def test_sigma_assembly():
    stats = sigma(DEFAULT, 1e-12)
    assert stats.sigma > 0.0
    assert stats.sigma == pytest.approx(
        math.sqrt(stats.second_moment_jump / stats.mean_tau), abs=1e-15
    )
    assert stats.mean_tau == MEAN_TAU


# ------------------------------------------------------------------- windows

def test_window_from_params_example():
    w = window_from_params(DEFAULT)
    assert w.u == pytest.approx(0.25, abs=1e-14)
    assert w.v == pytest.approx(0.40, abs=1e-14)


def test_window_brackets_alpha():
    for alpha, beta in [(0.1, 0.0), (0.3, 0.05), (0.45, 0.02), (0.2, 0.14)]:
        p = Params(alpha, beta)
        w = window_from_params(p)
        assert 0.0 < w.u < alpha < w.v <= 0.5


def test_window_beta_zero_reaches_half():
    assert window_from_params(Params(0.3, 0.0)).v == 0.5


def test_params_from_window_example():
    p = params_from_window(0.25, 0.40)
    assert p.alpha == pytest.approx(0.3, abs=1e-14)
    assert p.beta == pytest.approx(0.05, abs=1e-14)


def test_params_from_window_top_edge_gives_beta_zero():
    assert params_from_window(0.3, 0.5).beta == 0.0


def test_params_from_window_rejects_bad_ordering():
    with pytest.raises(ParameterError):
        params_from_window(0.4, 0.25)
    with pytest.raises(ParameterError):
        params_from_window(0.0, 0.3)
    with pytest.raises(ParameterError):
        params_from_window(0.2, 0.51)


def test_window_maps_are_mutual_inverses():
    us = np.linspace(0.02, 0.48, 12)
    for u in us:
        for v in np.linspace(u + 0.01, 0.5, 8):
            p = params_from_window(u, v)
            w = window_from_params(p)
            assert abs(w.u - u) < 1e-12 and abs(w.v - v) < 1e-12
    for alpha, beta in [(0.05, 0.0), (0.3, 0.05), (0.44, 0.025)]:
        p = Params(alpha, beta)
        w = window_from_params(p)
        q = params_from_window(w.u, w.v)
        assert abs(q.alpha - alpha) < 1e-12 and abs(q.beta - beta) < 1e-12


# --------------------------------------------------------------------- table

def test_measure_table_accessors():
    table = build_measure_table(DEFAULT, 50)
    assert table.log_mu(0) == log_mu(DEFAULT, 0)
    assert table.log_mu(17) == pytest.approx(log_mu(DEFAULT, 17), abs=1e-15)
    assert table.log_tail == -(50.0 ** 0.3)
    with pytest.raises(StateIndexError):
        table.log_mu(1)
