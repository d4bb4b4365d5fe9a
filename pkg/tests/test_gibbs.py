from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import stats
from scipy.special import expit

from hsbeta import gibbs
from hsbeta.errors import NumericalError, ParameterError, StateError
from hsbeta.gibbs import (
    FullConditionalNormal,
    build_full_conditional,
    chain_rng,
    gibbs_sweep,
    run_chain,
    run_chains,
    sample_inverse_gamma,
    step_beta,
    step_lambda2,
    step_nu,
    step_omega,
    step_tau2,
    step_xi,
)
from hsbeta.model import ChainState, Dataset, FitConfig, beta_log_likelihood, summarize
from hsbeta.simgen import SimScenario, generate

from conftest import pg_series_moments


def _dense_reference(X, y, omega, prior_var, b):
    P = X.T @ np.diag(omega) @ X + np.diag(1.0 / prior_var)
    V = np.linalg.inv(P)
    return P, V, V @ X.T @ (b * (y - 0.5))


class TestOmega:
    def test_zero_coefficients_mean(self):
        n = 100_000
        d = Dataset(np.zeros((n, 1)), np.full(n, 0.5))
        cfg = FitConfig(phi=10.0, alpha=0.99)
        state = ChainState.initial(n, 1)
        omega = step_omega(state, d, cfg, np.random.default_rng(1))
        m, v = pg_series_moments(0.99 * 10.0, 0.0)
        assert m == pytest.approx(0.99 * 10 / 4, rel=1e-8)
        assert abs(omega.mean() - m) < 4 * math.sqrt(v / n)

    def test_single_observation_and_determinism(self):
        d = Dataset(np.array([[1.0, -2.0]]), [0.3])
        cfg = FitConfig(phi=4.0)
        state = ChainState.initial(1, 2)
        state.beta = np.array([0.4, 1.1])
        a = step_omega(state, d, cfg, np.random.default_rng(9))
        b = step_omega(state, d, cfg, np.random.default_rng(9))
        assert a.shape == (1,) and a[0] > 0
        assert np.array_equal(a, b)

    def test_nonfinite_beta(self):
        d = Dataset(np.ones((2, 1)), [0.3, 0.4])
        state = ChainState.initial(2, 1)
        state.beta = np.array([np.nan])
        with pytest.raises(StateError):
            step_omega(state, d, FitConfig(phi=1.0), np.random.default_rng(0))


class TestFullConditional:
    def test_scalar_example(self):
        d = Dataset(np.array([[1.0]]), [0.75])
        # alpha * phi * (0.75 - 0.5) = 1 when alpha = 1, phi = 4
        fc = build_full_conditional(d, [1.0], [1.0], 1.0, 1.0, 4.0)
        assert fc.covariance[0, 0] == pytest.approx(0.5, abs=1e-15)
        assert fc.mean[0] == pytest.approx(0.5, abs=1e-15)

    def test_prior_only_limit(self, rng):
        X = rng.normal(size=(6, 3))
        d = Dataset(X, rng.uniform(0.2, 0.8, 6))
        lam2 = np.array([0.5, 2.0, 3.0])
        fc = build_full_conditional(d, np.full(6, 1e-12), lam2, 0.7, 0.99, 1e-8)
        assert np.allclose(fc.covariance, np.diag(lam2 * 0.7), rtol=1e-9, atol=1e-12)
        assert np.allclose(fc.mean, 0.0, atol=1e-7)

    def test_small_instance_against_dense_inverse(self, rng):
        X = rng.normal(size=(3, 2))
        y = rng.uniform(0.1, 0.9, 3)
        omega = rng.uniform(0.2, 2.0, 3)
        lam2, tau2 = rng.uniform(0.5, 2.0, 2), 1.3
        fc = build_full_conditional(Dataset(X, y), omega, lam2, tau2, 0.99, 10.0)
        _, V, m = _dense_reference(X, y, omega, lam2 * tau2, 9.9)
        assert np.max(np.abs(fc.covariance - V)) < 1e-10
        assert np.max(np.abs(fc.mean - m)) < 1e-10

    @pytest.mark.parametrize("n,p", [(30, 5), (40, 20), (20, 50), (80, 50)])
    def test_precision_times_covariance_is_identity(self, n, p):
        r = np.random.default_rng(n * p)
        X = r.normal(size=(n, p))
        y = r.uniform(0.05, 0.95, n)
        omega = r.uniform(0.1, 3.0, n)
        lam2 = np.exp(r.normal(size=p))
        fc = build_full_conditional(Dataset(X, y), omega, lam2, 0.8, 0.99, 10.0)
        P, _, m = _dense_reference(X, y, omega, lam2 * 0.8, 9.9)
        assert np.max(np.abs(P @ fc.covariance - np.eye(p))) < 1e-8
        assert np.allclose(fc.mean, m, rtol=1e-8, atol=1e-10)
        L = fc.covariance_factor
        assert np.allclose(L, np.tril(L))

    def test_positivity_required(self):
        d = Dataset(np.ones((2, 1)), [0.3, 0.4])
        with pytest.raises(StateError):
            build_full_conditional(d, [1.0, 0.0], [1.0], 1.0, 1.0, 1.0)
        with pytest.raises(StateError):
            build_full_conditional(d, [1.0, 1.0], [1.0], 0.0, 1.0, 1.0)

    def test_jitter_rescues_semidefinite_precision(self):
        P = np.ones((3, 3))
        U, jitter = gibbs._factor_precision(P)
        assert jitter > 0
        assert np.allclose(U @ U.T, P + jitter * np.eye(3), atol=1e-12)

    def test_factorization_failure_carries_diagnostics(self):
        with pytest.raises(NumericalError) as err:
            gibbs._factor_precision(np.diag([1.0, -1.0]))
        assert err.value.diagnostics["max_jitter"] == pytest.approx(1e-6)


class TestStepBeta:
    def test_degenerate_factor_returns_mean(self, rng):
        fc = FullConditionalNormal(mean=np.array([1.0, -2.0]), covariance_factor=np.zeros((2, 2)))
        assert np.array_equal(step_beta(fc, rng), fc.mean)

    def test_standard_normal_moments(self, rng):
        fc = FullConditionalNormal(mean=np.zeros(1), covariance_factor=np.ones((1, 1)))
        x = np.array([step_beta(fc, rng)[0] for _ in range(100_000)])
        assert abs(x.mean()) < 4 / math.sqrt(1e5)
        assert abs(x.var() - 1) < 4 * math.sqrt(2 / 1e5)
        assert abs(stats.skew(x)) < 4 * math.sqrt(6 / 1e5)

    def test_sample_covariance(self, rng):
        X = rng.normal(size=(10, 3))
        fc = build_full_conditional(Dataset(X, rng.uniform(0.2, 0.8, 10)),
                                    rng.uniform(0.5, 2, 10), np.ones(3), 1.0, 1.0, 5.0)
        n = 100_000
        L = fc.covariance_factor
        draws = fc.mean + rng.standard_normal((n, 3)) @ L.T
        # the batched draws use the same map z -> m + L z as step_beta
        one = step_beta(fc, np.random.default_rng(4))
        z = np.random.default_rng(4).standard_normal(3)
        assert np.allclose(one, fc.mean + L @ z)
        V = fc.covariance
        S = np.cov(draws, rowvar=False)
        se = np.sqrt((V**2 + np.outer(np.diag(V), np.diag(V))) / n)
        assert np.all(np.abs(S - V) < 4 * se)


class TestVarianceSteps:
    def test_lambda2_median(self):
        p = 100_000
        x = step_lambda2(np.zeros(p), 1.0, np.ones(p), np.random.default_rng(2))
        med = 1 / math.log(2)
        dens = stats.invgamma(1, scale=1).pdf(med)
        assert abs(np.median(x) - med) < 4 / (2 * dens * math.sqrt(p))
        assert np.all(x > 0)

    def test_lambda2_scale_doubles(self):
        # beta^2 / (2 tau^2) = 1 = 1/nu doubles the scale of the beta = 0 case
        a = step_lambda2(np.zeros(4), 2.0, np.ones(4), np.random.default_rng(5))
        b = step_lambda2(np.full(4, 2.0), 2.0, np.ones(4), np.random.default_rng(5))
        assert np.allclose(b, 2 * a, rtol=1e-15)

    def test_lambda2_vectorized_equals_componentwise(self):
        beta = np.array([0.1, -1.0, 2.0])
        nu = np.array([0.5, 1.0, 3.0])
        vec = step_lambda2(beta, 0.4, nu, np.random.default_rng(6))
        r = np.random.default_rng(6)
        parts = [step_lambda2(beta[j:j + 1], 0.4, nu[j:j + 1], r)[0] for j in range(3)]
        assert np.array_equal(vec, parts)

    def test_lambda2_errors(self, rng):
        with pytest.raises(StateError):
            step_lambda2(np.zeros(2), 0.0, np.ones(2), rng)

    def test_nu_scales(self):
        g = np.random.default_rng(7).standard_gamma(1.0, size=2)
        big = step_nu(np.array([1e12, 1.0]), np.random.default_rng(7))
        assert big[0] == pytest.approx(1 / g[0], rel=1e-11)
        assert big[1] == pytest.approx(2 / g[1], rel=1e-15)

    def test_nu_distribution(self):
        x = step_nu(np.ones(20_000), np.random.default_rng(8))
        assert stats.kstest(x, stats.invgamma(1, scale=2).cdf).pvalue > 0.01

    def test_tau2_shapes_and_scales(self):
        p = 4
        g = np.random.default_rng(9).standard_gamma(0.5 * (p + 1))
        t = step_tau2(np.zeros(p), np.ones(p), 0.25, np.random.default_rng(9))
        assert t == pytest.approx(4.0 / g, rel=1e-15)
        g1 = np.random.default_rng(10).standard_gamma(1.0)
        t1 = step_tau2(np.array([2.0]), np.array([2.0]), 1.0, np.random.default_rng(10))
        # shape (1 + 1)/2 = 1, scale 1/xi + 0.5 * beta^2 / lambda^2 = 1 + 1 = 2
        assert t1 == pytest.approx(2.0 / g1, rel=1e-15)

    def test_tau2_moments(self):
        r = np.random.default_rng(11)
        beta = np.array([1.0, -1.0, 0.5, 0.0, 2.0])
        lam2 = np.array([1.0, 2.0, 0.5, 1.0, 4.0])
        x = np.array([step_tau2(beta, lam2, 2.0, r) for _ in range(40_000)])
        shape, scale = 3.0, 0.5 + 0.5 * np.sum(beta**2 / lam2)
        mean = scale / (shape - 1)
        sd = math.sqrt(scale**2 / ((shape - 1) ** 2 * (shape - 2)))
        assert abs(x.mean() - mean) < 4 * sd / math.sqrt(len(x)) * 2
        ref = stats.invgamma(shape, scale=scale)
        assert stats.kstest(x, ref.cdf).pvalue > 0.01

    def test_tau2_errors(self, rng):
        with pytest.raises(StateError):
            step_tau2(np.zeros(2), np.array([1.0, 0.0]), 1.0, rng)

    def test_xi(self):
        g = np.random.default_rng(12).standard_gamma(1.0, size=2)
        r = np.random.default_rng(12)
        assert step_xi(1e12, r) == pytest.approx(1 / g[0], rel=1e-11)
        assert step_xi(1.0, r) == pytest.approx(2 / g[1], rel=1e-15)
        r = np.random.default_rng(13)
        x = np.array([step_xi(1.0, r) for _ in range(20_000)])
        assert stats.kstest(x, stats.invgamma(1, scale=2).cdf).pvalue > 0.01
        with pytest.raises(StateError):
            step_xi(-1.0, r)

    def test_variance_draws_respect_bounds(self, rng):
        lo, hi = gibbs.VARIANCE_BOUNDS
        x = step_lambda2(np.full(5, 1e9), 1e-9, np.full(5, 1e-12), rng)
        assert np.all(x <= hi) and np.all(x >= lo)


class TestInverseGamma:
    def test_mean(self):
        x = sample_inverse_gamma(3.0, 2.0, np.random.default_rng(14), size=1_000_000)
        # variance scale^2 / ((a-1)^2 (a-2)) = 1
        assert abs(x.mean() - 1.0) < 4 * 1.0 / math.sqrt(1e6)

    def test_shape_one_median(self):
        x = sample_inverse_gamma(1.0, 3.0, np.random.default_rng(15), size=200_000)
        med = 3.0 / math.log(2)
        dens = stats.invgamma(1, scale=3).pdf(med)
        assert abs(np.median(x) - med) < 4 / (2 * dens * math.sqrt(len(x)))

    def test_reciprocal_is_gamma(self):
        x = sample_inverse_gamma(2.5, 4.0, np.random.default_rng(16), size=50_000)
        assert stats.kstest(1 / x, stats.gamma(2.5, scale=1 / 4.0).cdf).pvalue > 0.01

    def test_scalar_and_errors(self, rng):
        assert isinstance(sample_inverse_gamma(2.0, 1.0, rng), float)
        for shape, scale in [(0, 1), (1, 0), (-1, 1), (np.inf, 1), (1, np.nan)]:
            with pytest.raises(ParameterError):
                sample_inverse_gamma(shape, scale, rng)


def _prior_state(rng, n, p):
    # horseshoe hierarchy with half-Cauchy scales via inverse-gamma mixtures
    xi = 1 / rng.standard_gamma(0.5)
    tau2 = (1 / xi) / rng.standard_gamma(0.5)
    nu = 1 / rng.standard_gamma(0.5, size=p)
    lam2 = (1 / nu) / rng.standard_gamma(0.5, size=p)
    beta = rng.standard_normal(p) * np.sqrt(lam2 * tau2)
    return ChainState(beta=beta, lambda2=lam2, nu=nu, tau2=tau2, xi=xi, omega=np.ones(n))


def _getting_it_right(sweep_shape, samples=10_000, steps=3, seed=2025):
    """Successive-conditional simulation from exact joint draws.

    With integer shape b, Binomial(b, mu) counts divided by b make the
    logistic-form surrogate an exact likelihood.  Each replicate starts
    from a prior draw, alternates response simulation with Gibbs sweeps,
    and keeps its final (y, state); if every transition leaves the joint
    distribution invariant, the kept pairs are independent joint draws.
    """
    n, p, b = 5, 2, 2
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, p))

    def sim_y(beta):
        return rng.binomial(b, expit(X @ beta)) / b

    out = np.empty((samples, p))
    joint = np.empty(samples)
    tau2 = np.empty(samples)
    for i in range(samples):
        state = _prior_state(rng, n, p)
        for _ in range(steps):
            y = sim_y(state.beta)
            state = gibbs_sweep(state, X, y, sweep_shape, rng)
            assert state.is_positive()
        out[i] = state.beta
        tau2[i] = state.tau2
        joint[i] = (y - 0.5) @ X @ state.beta
    ref_states = [_prior_state(rng, n, p) for _ in range(samples)]
    ref = np.array([s.beta for s in ref_states])
    ref_tau2 = np.array([s.tau2 for s in ref_states])
    ref_joint = np.array([(sim_y(s.beta) - 0.5) @ X @ s.beta for s in ref_states])
    return {
        **{f"beta{j}": stats.ks_2samp(out[:, j], ref[:, j]).pvalue for j in range(p)},
        "tau2": stats.ks_2samp(tau2, ref_tau2).pvalue,
        "joint": stats.ks_2samp(joint, ref_joint).pvalue,
    }


def test_getting_it_right():
    pvalues = _getting_it_right(2.0)
    assert min(pvalues.values()) > 0.01, pvalues


def test_getting_it_right_detects_a_wrong_shape():
    # the same harness with a mis-set surrogate shape must fail
    pvalues = _getting_it_right(1.0, samples=5_000)
    assert pvalues["joint"] < 1e-3, pvalues


@pytest.fixture(scope="module")
def low_dim():
    d = generate(SimScenario(n=100, p=20, s_star=10, seed=3), 0)
    return d, Dataset(d.X, d.y)


class TestRunChain:
    def test_pure_noise_shrinks(self):
        d = generate(SimScenario(n=100, p=20, s_star=0, seed=11), 0)
        draws = run_chain(Dataset(d.X, d.y), FitConfig(phi=10.0, seed=0))
        assert np.max(np.abs(summarize(draws).mean)) < 0.15

    def test_reproducible_and_shapes(self, low_dim):
        _, ds = low_dim
        cfg = FitConfig(phi=10.0, iterations=120, burn_in=20, seed=4)
        a = run_chain(ds, cfg, keep_lambda2=True)
        b = run_chain(ds, cfg, keep_lambda2=True)
        assert a.beta_draws.shape == (100, 20) and a.lambda2_draws.shape == (100, 20)
        for f in ("beta_draws", "tau2_draws", "log_likelihood_trace", "lambda2_draws"):
            assert np.array_equal(getattr(a, f), getattr(b, f))
        c = run_chain(ds, FitConfig(phi=10.0, iterations=120, burn_in=20, seed=5))
        assert not np.array_equal(a.beta_draws, c.beta_draws)

    def test_log_likelihood_trace_is_exact(self, low_dim):
        _, ds = low_dim
        draws = run_chain(ds, FitConfig(phi=10.0, iterations=30, burn_in=25, seed=1))
        for k in range(draws.n_kept):
            assert draws.log_likelihood_trace[k] == beta_log_likelihood(ds, draws.beta_draws[k], 10.0)

    def test_positivity_every_sweep(self, low_dim):
        d, _ = low_dim
        state = ChainState.initial(100, 20)
        r = chain_rng(0)
        for _ in range(100):
            state = gibbs_sweep(state, d.X, d.y, 9.9, r)
            assert state.is_positive()

    def test_shrinkage_adaptivity(self, low_dim):
        d, ds = low_dim
        mean = summarize(run_chain(ds, FitConfig(phi=10.0, seed=2))).mean
        zero = np.abs(mean[d.beta0 == 0]).mean()
        signal = np.abs(mean[d.beta0 != 0]).mean()
        assert signal >= 5 * zero

    def test_failure_reports_iteration_and_state(self, low_dim, monkeypatch):
        _, ds = low_dim
        calls = {"n": 0}
        real = gibbs._factor_precision

        def flaky(P):
            calls["n"] += 1
            if calls["n"] == 7:
                raise NumericalError("boom", diagnostics={"min_diag": 0.0})
            return real(P)

        monkeypatch.setattr(gibbs, "_factor_precision", flaky)
        with pytest.raises(NumericalError) as err:
            run_chain(ds, FitConfig(phi=10.0, iterations=20, burn_in=5))
        assert err.value.iteration == 6
        assert isinstance(err.value.snapshot, ChainState)
        assert err.value.diagnostics == {"min_diag": 0.0}

    def test_chains_use_distinct_streams(self, low_dim):
        _, ds = low_dim
        chains = run_chains(ds, FitConfig(phi=10.0, iterations=40, burn_in=10, chains=2))
        assert len(chains) == 2
        assert not np.array_equal(chains[0].beta_draws, chains[1].beta_draws)
        again = run_chains(ds, FitConfig(phi=10.0, iterations=40, burn_in=10, chains=2))
        assert np.array_equal(chains[1].beta_draws, again[1].beta_draws)

    def test_init_state_is_not_mutated(self, low_dim):
        _, ds = low_dim
        init = ChainState.initial(100, 20)
        run_chain(ds, FitConfig(phi=10.0, iterations=5, burn_in=1), init=init)
        assert np.array_equal(init.beta, np.zeros(20))
