import math

import numpy as np
import pytest
from scipy import integrate, special, stats

from bougerol.paths import TimeGrid, cumulative_exp
from bougerol.stochastic import (
    REJECTION_MIN_U,
    StreamKey,
    as_generator,
    clamp_bessel_arg,
    default_horizon,
    macdonald_k0,
    sample_bm,
    sample_bridge,
    sample_conditional_endpoint,
    sample_first_passage,
    sample_gamma,
    sample_gaussian,
    sample_rademacher,
    sample_transient_bm,
)

N = 100_000
K0_1 = 0.42102443824070834  # mpmath.besselk(0, 1)
K1_OVER_K0_1 = 1.4296253982604018  # mpmath besselk(1, 1) / besselk(0, 1)


def within(samples, target, k=3.0):
    samples = np.asarray(samples, dtype=float)
    se = samples.std(ddof=1) / math.sqrt(samples.size)
    return abs(samples.mean() - target) <= k * se


def key(name="t", batch=0, seed=7):
    return StreamKey(seed, name, batch)


# --- streams ---------------------------------------------------------------


def test_same_key_same_draws():
    a = key().generator().standard_normal(1000)
    b = key().generator().standard_normal(1000)
    assert np.array_equal(a, b)


def test_distinct_keys_differ_and_are_uncorrelated():
    base = key("x").generator().standard_normal(N)
    for other in (key("y"), key("x", batch=1), key("x", seed=8)):
        draws = other.generator().standard_normal(N)
        assert not np.array_equal(base, draws)
        assert abs(np.corrcoef(base, draws)[0, 1]) <= 3 / math.sqrt(N)


def test_draw_counter_advances_stream():
    k = key()
    assert not np.array_equal(k.generator().random(8), StreamKey(7, "t", 0, 1).generator().random(8))


def test_child_keys_are_distinct():
    k = key("root")
    assert k.child("a") != k.child("b")
    assert k.child("a").batch(3).batch_index == 3


def test_invalid_keys_rejected():
    with pytest.raises(ValueError):
        StreamKey(-1)
    with pytest.raises(ValueError):
        StreamKey(2 ** 64)
    with pytest.raises(TypeError):
        as_generator(42)


# --- Brownian objects ------------------------------------------------------


def test_bm_moments():
    g = TimeGrid(1.0, 16)
    b1 = sample_bm(g, 0.0, key("bm"), N).endpoint
    assert b1.shape == (N,)
    assert abs(b1.mean()) <= 3 / math.sqrt(N)
    assert within((b1 - b1.mean()) ** 2, 1.0)
    assert within(sample_bm(g, 2.0, key("bm2"), N).endpoint, 2.0)


def test_bm_starts_at_zero():
    assert np.all(sample_bm(TimeGrid(1.0, 16), 0.5, key(), 10).values[:, 0] == 0.0)


def test_bm_per_path_drift():
    eps = np.array([1.0, -1.0] * 5000)
    b = sample_bm(TimeGrid(2.0, 16), eps, key("eps"), eps.size).endpoint
    assert within(b[eps > 0], 2.0) and within(b[eps < 0], -2.0)


def test_bridge_pinned_and_variance():
    g = TimeGrid(1.0, 64)
    b = sample_bridge(g, 3.0, key("br3"), 1000)
    assert np.all(b.endpoint == 3.0)
    mid = sample_bridge(g, 0.0, key("br0"), N).at(0.5)
    assert within(mid ** 2, 0.25)


def test_bridge_is_shifted_standard_bridge():
    g = TimeGrid(1.0, 64)
    z = 1.3
    pinned = sample_bridge(g, z, key("bz"), 20_000).at(0.5)
    shifted = sample_bridge(g, 0.0, key("b0"), 20_000).at(0.5) + z * 0.5
    assert stats.ks_2samp(pinned, shifted).pvalue >= 1e-3


def test_cameron_martin_reweighting():
    mu = 0.8
    b = sample_bm(TimeGrid(1.0, 16), 0.0, key("cm"), N).endpoint
    w = np.exp(mu * b - mu * mu / 2)
    assert within(w * b, mu)


# --- scalar laws ------------------------------------------------------------


def test_gaussian():
    assert sample_gaussian(0.0, key()) == 0.0
    x = sample_gaussian(4.0, key("g"), N)
    assert abs(x.std(ddof=1) - 2.0) <= 3 * 2.0 / math.sqrt(2 * N)
    with pytest.raises(ValueError):
        sample_gaussian(-1.0, key())


def test_gaussian_at_a_t_variance():
    rng = key("beta").generator()
    a = cumulative_exp(sample_bm(TimeGrid(1.0, 512), 0.0, rng, N)).final
    beta = sample_gaussian(a, rng)
    assert within(beta ** 2, math.expm1(2) / 2)


def test_gamma():
    assert within(sample_gamma(1.0, key("g1"), N), 1.0)
    g = sample_gamma(2.5, key("g25"), N)
    assert within(g, 2.5)
    assert within((g - g.mean()) ** 2, 2.5)
    assert within(1 / sample_gamma(1.5, key("g15"), N), 2.0)
    with pytest.raises(ValueError):
        sample_gamma(0.0, key())


def test_rademacher():
    e = sample_rademacher(key("r"), 10 ** 6)
    assert set(np.unique(e)) == {-1.0, 1.0}
    assert abs(e.mean()) <= 3 / math.sqrt(e.size)
    p = (e > 0).mean()
    assert abs(p - 0.5) <= 3 * 0.5 / math.sqrt(e.size)
    b = sample_bm(TimeGrid(1.0, 16), 0.0, key("rb"), N).endpoint
    assert abs(np.corrcoef(e[:N], b)[0, 1]) <= 3 / math.sqrt(N)


@pytest.mark.parametrize("level,drift", [(1.0, 1.0), (2.0, 1.0)])
def test_first_passage_mean(level, drift):
    dens = lambda u: level / math.sqrt(2 * math.pi * u ** 3) * math.exp(-((level - drift * u) ** 2) / (2 * u))
    oracle = integrate.quad(lambda u: u * dens(u), 0, np.inf, limit=200)[0]
    assert oracle == pytest.approx(level / drift, rel=1e-8)
    tau = sample_first_passage(level, drift, key(f"ig{level}"), N)
    assert np.all(tau > 0) and np.all(np.isfinite(tau))
    assert within(tau, oracle)


def test_first_passage_zero_drift_cdf():
    tau = sample_first_passage(1.0, 0.0, key("levy"), N)
    cdf = lambda u: 2 * (1 - stats.norm.cdf(1 / np.sqrt(u)))
    assert stats.kstest(tau, cdf).pvalue >= 1e-3


def test_first_passage_elementwise_and_errors():
    lv = np.array([0.5, 1.0, 4.0])
    tau = sample_first_passage(lv, np.array([1.0, 2.0, 0.5]), key())
    assert tau.shape == (3,)
    with pytest.raises(ValueError):
        sample_first_passage(0.0, 1.0, key())
    with pytest.raises(ValueError):
        sample_first_passage(1.0, -1.0, key())


# --- K0 and the conditional endpoint law -------------------------------------


def test_k0_at_one():
    oracle = integrate.quad(lambda t: math.exp(-math.cosh(t)), 0, 12, epsabs=1e-15, epsrel=1e-13)[0]
    assert abs(oracle - K0_1) <= 1e-12
    assert abs(macdonald_k0(1.0) - K0_1) <= 1e-9


def test_k0_relative_accuracy_over_range():
    u = np.geomspace(1e-3, 100, 41)
    assert np.max(np.abs(macdonald_k0(u) / special.k0(u) - 1)) <= 1e-10


def test_k0_asymptotic_and_normalization():
    assert abs(macdonald_k0(50.0) * math.exp(50) * math.sqrt(100 / math.pi) - 1) <= 1e-2
    mass = 2 * integrate.quad(lambda x: math.exp(-2 * math.cosh(x)), 0, 12, epsabs=1e-15, epsrel=1e-13)[0]
    assert abs(mass - 2 * macdonald_k0(2.0)) <= 1e-8


def test_k0_domain():
    with pytest.raises(ValueError):
        macdonald_k0(0.0)
    clamped, flag = clamp_bessel_arg(np.array([1e-5, 1.0, 500.0]))
    assert flag and clamped[0] == 1e-3 and clamped[2] == 100.0
    assert clamp_bessel_arg(np.array([0.5]))[1] is False


def test_endpoint_symmetry_and_cosh_moment():
    x = sample_conditional_endpoint(1.0, key("zu"), N)
    assert abs(x.mean()) <= 3 * x.std() / math.sqrt(N)
    assert within(np.cosh(x), K1_OVER_K0_1)
    assert K1_OVER_K0_1 == pytest.approx(special.k1(1.0) / special.k0(1.0), rel=1e-13)


def test_endpoint_table_branch_moment():
    u = 0.05
    assert u < REJECTION_MIN_U
    x = sample_conditional_endpoint(u, key("ztab"), N)
    assert within(np.cosh(x), special.k1(u) / special.k0(u))


@pytest.mark.parametrize("u", [0.1, 1.0, 10.0])
def test_rejection_acceptance_rate(u):
    _, rate = sample_conditional_endpoint(u, key("acc"), 20_000, return_acceptance=True)
    assert rate >= 0.2


def test_endpoint_errors():
    with pytest.raises(ValueError):
        sample_conditional_endpoint(0.0, key())
    assert isinstance(sample_conditional_endpoint(2.0, key()), float)


# --- transient paths ------------------------------------------------------------


def test_default_horizon():
    assert default_horizon(1.5) == 20.0
    assert default_horizon(10.0) == 10.0


def test_transient_converges_at_default_horizon():
    mu = 1.5
    g = TimeGrid(default_horizon(mu), 1024)
    path, a_inf, diag = sample_transient_bm(g, -mu, key("tr"), 2000)
    assert diag.converged and diag.max_last_tenth_share <= 1e-6
    assert np.all(a_inf >= cumulative_exp(path).final)


def test_transient_extends_short_horizons():
    g = TimeGrid(1.0, 256)
    path, a_inf, diag = sample_transient_bm(g, -0.5, key("short"), 500)
    assert diag.fraction_extended > 0.5
    assert diag.extensions >= 1
    assert np.all(a_inf > cumulative_exp(path).final - 1e-15)
    d = diag.to_dict()
    assert set(d) >= {"horizon", "converged", "fraction_extended"}


def test_transient_requires_negative_drift():
    with pytest.raises(ValueError):
        sample_transient_bm(TimeGrid(1.0, 16), 0.5, key(), 10)
