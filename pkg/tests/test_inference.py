import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import optimize, stats

from copula_tailrisk import (
    CopulaModel,
    FisherTable,
    PriorSpec,
    TailSpec,
    ThetaGrid,
    delta_method_ci,
    fisher_information_mc,
    fit_posterior,
    fit_tail_risk,
    induced_risk_posterior,
    log_copula_density,
    log_likelihood,
    make_theta_grid,
    mle,
    posterior_grid,
    posterior_summary_theta,
    restricted_jeffreys_prior,
    sample_dataset,
    tail_risk,
    to_pseudo_observations,
)
from copula_tailrisk import inference
from copula_tailrisk.inference import (
    finite_difference_scores,
    log_likelihood_grid,
    posterior_from_log_terms,
    refine_theta_grid,
    trapezoid_weights,
    z_multiplier,
)
from copula_tailrisk.pseudo_obs import PseudoSample

import oracles
from helpers import default_prior


def simulated(family, theta, n, seed=123):
    s = sample_dataset(CopulaModel(family, theta), n, seed)
    return PseudoSample(s.u, s.v)


# ---------------------------------------------------------------------------
# likelihood and MLE
# ---------------------------------------------------------------------------


class TestLikelihood:
    def test_independence_is_zero(self):
        assert log_likelihood(CopulaModel("gumbel", 1.0), simulated("clayton", 2.0, 50)) == 0.0

    def test_single_pair(self):
        data = PseudoSample([0.5], [0.5])
        assert log_likelihood(CopulaModel("clayton", 2.0), data) == pytest.approx(math.log(192) - 2.5 * math.log(7), rel=1e-14)

    @pytest.mark.parametrize("family, theta", [("clayton", 0.8), ("gumbel", 3.0)])
    def test_additivity(self, family, theta):
        data = simulated(family, theta, 300)
        m = CopulaModel(family, theta)
        pointwise = math.fsum(log_copula_density(m, u, v) for u, v in zip(data.u, data.v))
        assert log_likelihood(m, data) == pytest.approx(pointwise, rel=1e-12, abs=1e-12)

    def test_grid_matches_pointwise_and_is_chunk_invariant(self):
        data = simulated("gumbel", 2.0, 200)
        th = np.linspace(1.0 + 1e-6, 6.0, 37)
        a = log_likelihood_grid("gumbel", th, data, chunk=1)
        b = log_likelihood_grid("gumbel", th, data, chunk=64)
        np.testing.assert_array_equal(a, b)
        for t, val in zip(th, a):
            assert val == pytest.approx(log_likelihood(CopulaModel("gumbel", t), data), rel=1e-12)


class TestMle:
    @pytest.mark.parametrize("family, theta", [("clayton", 3.0), ("gumbel", 2.5)])
    def test_matches_scipy_bounded_optimizer(self, family, theta):
        data = simulated(family, theta, 1500)
        spec = PriorSpec.for_family(family)
        got = mle(family, data, spec)
        ref = optimize.minimize_scalar(
            lambda t: -log_likelihood(CopulaModel(family, t), data),
            bounds=(theta / 2, theta * 2),
            method="bounded",
            options={"xatol": 1e-9},
        )
        assert got.theta == pytest.approx(ref.x, abs=1e-5)
        assert not got.at_boundary

    def test_independence_lands_near_lower_bound(self):
        rng = np.random.default_rng(4)
        data = to_pseudo_observations(rng.normal(size=3000), rng.normal(size=3000))
        spec = PriorSpec.for_family("gumbel")
        assert mle("gumbel", data, spec).theta - spec.theta_min < 0.05

    @pytest.mark.parametrize("family", ["clayton", "gumbel"])
    def test_negative_dependence_flags_boundary(self, family):
        # at or below independence the likelihood peaks at the truncation bound
        rng = np.random.default_rng(4)
        x = rng.normal(size=3000)
        data = to_pseudo_observations(x, -0.3 * x + rng.normal(size=3000))
        spec = PriorSpec.for_family(family)
        fit = mle(family, data, spec)
        assert fit.at_boundary
        assert fit.theta - spec.theta_min < 1e-4

    def test_needs_ten_pairs(self):
        with pytest.raises(ValueError):
            mle("clayton", simulated("clayton", 2.0, 9), PriorSpec.for_family("clayton"))


# ---------------------------------------------------------------------------
# Fisher information and prior
# ---------------------------------------------------------------------------


class TestFisher:
    def test_draws_too_small(self):
        with pytest.raises(ValueError, match="M too small"):
            fisher_information_mc("clayton", 2.0, PriorSpec.for_family("clayton"), draws=50)

    def test_near_gumbel_lower_bound(self):
        spec = PriorSpec.for_family("gumbel")
        val = fisher_information_mc("gumbel", spec.theta_min, spec)
        assert math.isfinite(val) and val >= 0

    @pytest.mark.parametrize("family, theta", [("clayton", 0.5), ("clayton", 8.0), ("gumbel", 1.3), ("gumbel", 6.0)])
    def test_scores_match_complex_step(self, family, theta):
        spec = PriorSpec.for_family(family)
        rng = np.random.default_rng(0)
        u, v = rng.uniform(0.01, 0.99, (2, 500))
        fd = finite_difference_scores(family, theta, u, v, spec)
        exact = oracles.complex_step_score(family, theta, u, v)
        np.testing.assert_allclose(fd, exact, rtol=1e-6, atol=1e-7)

    @pytest.mark.parametrize("family, theta", [("clayton", 0.5), ("gumbel", 4.0)])
    def test_mc_matches_quadrature(self, family, theta):
        spec = PriorSpec.for_family(family)
        est, se = fisher_information_mc(family, theta, spec, draws=200_000, return_se=True)
        ref = oracles.fisher_quadrature(family, theta)
        assert abs(est - ref) <= 3 * se

    def test_reproducible_and_order_free(self):
        spec = PriorSpec.for_family("gumbel", fisher_draws=2000)
        a = fisher_information_mc("gumbel", 3.0, spec)
        fisher_information_mc("gumbel", 2.0, spec)
        assert fisher_information_mc("gumbel", 3.0, spec) == a

    def test_outside_truncation(self):
        with pytest.raises(ValueError):
            fisher_information_mc("clayton", 60.0, PriorSpec.for_family("clayton"))


class TestFisherTable:
    def small_spec(self, family="clayton", **kw):
        return PriorSpec.for_family(family, fisher_draws=500, fisher_grid_size=8, **kw)

    def test_text_roundtrip_is_exact(self, tmp_path):
        table = inference.compute_fisher_table(self.small_spec())
        path = tmp_path / "f.txt"
        table.write(path)
        back = FisherTable.read(path)
        assert back.to_text() == table.to_text()
        assert back.matches(table.spec)
        np.testing.assert_array_equal(back.info, table.info)

    def test_header_field_order(self):
        text = inference.compute_fisher_table(self.small_spec()).to_text()
        keys = [line.split("=")[0] for line in text.splitlines()[1:12]]
        assert keys == [
            "format_version", "family", "theta_min", "theta_max", "grid_size",
            "draws", "fd_step", "fd_relative", "seed", "rng", "columns",
        ]

    def test_all_nonnegative(self):
        table = inference.compute_fisher_table(self.small_spec("gumbel"))
        assert np.all(table.info >= 0)

    def test_keying(self):
        spec = self.small_spec()
        table = inference.compute_fisher_table(spec)
        assert not table.matches(replace(spec, fisher_draws=600))
        assert not table.matches(self.small_spec("gumbel"))
        assert not table.matches(replace(spec, prior_seed=1))

    def test_rejects_unknown_version(self):
        text = inference.compute_fisher_table(self.small_spec()).to_text().replace("format_version=1", "format_version=9")
        with pytest.raises(ValueError):
            FisherTable.from_text(text)

    def test_rejects_truncated_table(self):
        lines = inference.compute_fisher_table(self.small_spec()).to_text().splitlines()
        with pytest.raises(ValueError):
            FisherTable.from_text("\n".join(lines[:-1]))


class TestPrior:
    @pytest.mark.parametrize("family", ["clayton", "gumbel"])
    def test_normalized(self, family):
        assert default_prior(family).integral() == pytest.approx(1.0, abs=1e-10)

    def test_constant_information_gives_uniform(self):
        spec = PriorSpec.for_family("gumbel", theta_max=11.0, fisher_grid_size=5)
        nodes = np.linspace(spec.theta_min, 11.0, 5)
        table = FisherTable(spec, nodes, np.ones(5), np.full(5, 1e-4))
        prior = restricted_jeffreys_prior("gumbel", spec, table)
        th = np.linspace(spec.theta_min, 11.0, 50)
        np.testing.assert_allclose(prior.density(th), 1.0 / (11.0 - spec.theta_min), rtol=1e-14)

    def test_zero_outside_support(self):
        prior = default_prior("clayton")
        assert prior.density(60.0) == 0.0
        assert prior.density(1e-5) == 0.0
        assert prior.log_density(60.0) == -math.inf

    def test_nonfinite_table_rejected(self):
        spec = PriorSpec.for_family("clayton", fisher_grid_size=3)
        table = FisherTable(spec, [1e-4, 1.0, 50.0], [1.0, np.nan, 1.0], [1e-4] * 3)
        with pytest.raises(FloatingPointError):
            restricted_jeffreys_prior("clayton", spec, table)

    def test_family_mismatch_rejected(self):
        with pytest.raises(ValueError):
            restricted_jeffreys_prior("gumbel", PriorSpec.for_family("clayton"))

    def test_clayton_prior_decreasing_tail(self):
        # sqrt(I) decays like 1/theta for large theta
        prior = default_prior("clayton")
        assert prior.density(40.0) < prior.density(5.0) < prior.density(0.5)


# ---------------------------------------------------------------------------
# posterior
# ---------------------------------------------------------------------------


class TestPosteriorGrid:
    def test_flat_likelihood_returns_prior(self):
        prior = default_prior("gumbel")
        spec = prior.table.spec
        # include the prior's interpolation nodes so the trapezoid rule is exact for it
        grid = ThetaGrid(np.union1d(make_theta_grid(spec).nodes, prior.table.nodes))
        post = posterior_grid("gumbel", None, spec, grid, prior=prior, log_lik=np.zeros(len(grid)))
        np.testing.assert_allclose(post.density, prior.density(grid.nodes), rtol=1e-12)

    @settings(deadline=None, max_examples=30)
    @given(st.floats(-1e4, 1e4), st.integers(0, 1000))
    def test_translation_and_scaling_invariance(self, shift, seed):
        grid = ThetaGrid(np.linspace(1.0, 5.0, 300))
        rng = np.random.default_rng(seed)
        ll = -0.5 * ((grid.nodes - rng.uniform(1.5, 4.5)) / 0.2) ** 2
        lp = rng.normal(size=300) * 0.1
        a = posterior_from_log_terms("gumbel", grid, ll, lp)
        b = posterior_from_log_terms("gumbel", grid, ll + shift, lp)
        c = posterior_from_log_terms("gumbel", grid, ll + math.log(2.0), lp)
        np.testing.assert_allclose(a.weights, b.weights, rtol=1e-9, atol=1e-300)
        np.testing.assert_allclose(a.weights, c.weights, rtol=1e-12, atol=1e-300)
        assert math.fsum(a.weights) == pytest.approx(1.0, abs=1e-12)
        assert np.sum(trapezoid_weights(grid.nodes) * a.density) == pytest.approx(1.0, abs=1e-12)

    def test_underflow_everywhere_is_error(self):
        grid = ThetaGrid(np.linspace(1.0, 2.0, 10))
        with pytest.raises(FloatingPointError):
            posterior_from_log_terms("gumbel", grid, np.full(10, -np.inf), np.zeros(10))

    def test_concentrates_near_truth(self):
        data = simulated("clayton", 5.0, 500, seed=9)
        post = fit_posterior("clayton", data, PriorSpec.for_family("clayton"), default_prior("clayton"))
        s = posterior_summary_theta(post)
        assert abs(s.mean - 5.0) < 3 * s.sd

    def test_grid_refinement_stability(self):
        # NHANES-scale sample (n = 2887) with realistic dependence
        data = simulated("gumbel", 1.89, 2887, seed=31)
        spec = PriorSpec.for_family("gumbel")
        prior = default_prior("gumbel")
        p1 = fit_posterior("gumbel", data, spec, prior, grid_size=1000)
        p2 = fit_posterior("gumbel", data, spec, prior, grid_size=2000)
        assert abs(posterior_summary_theta(p1).mean - posterior_summary_theta(p2).mean) < 1e-4
        for f in "LUC":
            a = induced_risk_posterior(p1, TailSpec(0.05, f)).mean
            b = induced_risk_posterior(p2, TailSpec(0.05, f)).mean
            assert abs(a - b) < 1e-4

    def test_refinement_adds_nodes_inside_mass(self):
        base = make_theta_grid(PriorSpec.for_family("gumbel"))
        lp = -0.5 * ((base.nodes - 2.0) / 0.03) ** 2
        fine = refine_theta_grid(base, lp, 500)
        assert len(fine) > len(base)
        added = np.setdiff1d(fine.nodes, base.nodes)
        assert added.min() > 1.5 and added.max() < 2.5


def _gaussian_posterior(mu=3.0, sd=0.1, n=4001):
    grid = ThetaGrid(np.linspace(mu - 10 * sd, mu + 10 * sd, n))
    return posterior_from_log_terms("gumbel", grid, -0.5 * ((grid.nodes - mu) / sd) ** 2, np.zeros(n))


class TestSummaries:
    def test_symmetric_triangle_mean_at_apex(self):
        grid = ThetaGrid(np.linspace(1.0, 3.0, 201))
        tri = 1.0 - np.abs(grid.nodes - 2.0)
        with np.errstate(divide="ignore"):
            post = posterior_from_log_terms("gumbel", grid, np.log(tri), np.zeros(201))
        s = posterior_summary_theta(post)
        assert s.mean == pytest.approx(2.0, abs=1e-12)
        assert s.ci.lo - 1.0 == pytest.approx(3.0 - s.ci.hi, abs=1e-12)

    def test_gaussian_quantiles(self):
        s = posterior_summary_theta(_gaussian_posterior(), 0.95)
        assert s.ci.lo == pytest.approx(stats.norm.ppf(0.025, 3.0, 0.1), abs=1e-5)
        assert s.ci.hi == pytest.approx(stats.norm.ppf(0.975, 3.0, 0.1), abs=1e-5)
        assert s.variance == pytest.approx(0.01, rel=1e-4)

    def test_level_validation(self):
        with pytest.raises(ValueError):
            posterior_summary_theta(_gaussian_posterior(), 1.0)

    def test_rc_is_rl_over_alpha(self):
        post = _gaussian_posterior()
        for alpha in (0.01, 0.05, 0.2):
            lo = induced_risk_posterior(post, TailSpec(alpha, "L")).mean
            c = induced_risk_posterior(post, TailSpec(alpha, "C")).mean
            assert c == pytest.approx(lo / alpha, rel=1e-12)

    def test_monotone_mapping_matches_weighted_quantiles(self):
        post = _gaussian_posterior()
        spec = TailSpec(0.05, "U")
        s = induced_risk_posterior(post, spec)
        r = np.array([tail_risk(CopulaModel("gumbel", t), spec) for t in post.nodes])
        wq = inference._weighted_quantiles(r, post.weights, [0.025, 0.975])
        assert s.ci.method == "grid_quantile"
        assert s.ci.lo == pytest.approx(wq[0], rel=1e-4)
        assert s.ci.hi == pytest.approx(wq[1], rel=1e-4)

    def test_degenerate_single_node(self):
        grid = ThetaGrid(np.array([2.5]))
        post = posterior_from_log_terms("gumbel", grid, np.zeros(1), np.zeros(1))
        spec = TailSpec(0.05, "L")
        s = induced_risk_posterior(post, spec)
        r0 = tail_risk(CopulaModel("gumbel", 2.5), spec)
        assert s.mean == r0 and s.variance == 0.0
        assert s.ci.lo == s.ci.hi == r0
        t = posterior_summary_theta(post)
        assert t.ci.lo == t.ci.hi == 2.5

    def test_non_monotone_falls_back(self, monkeypatch):
        # fine grid: the upper endpoint sits only ~0.003 from the hump's apex
        post = _gaussian_posterior(n=40001)

        def hump(family, theta, alpha, functional):
            return -((np.asarray(theta) - 3.0) ** 2)

        monkeypatch.setattr(inference, "tail_risk_values", hump)
        s = induced_risk_posterior(post, TailSpec(0.05, "L"))
        assert s.ci.method == "weighted_quantile"
        # -(theta-3)^2 / 0.01 is minus a chi-square(1) variable
        assert s.ci.lo == pytest.approx(-0.01 * stats.chi2.ppf(0.975, 1), rel=2e-3)
        assert s.ci.hi == pytest.approx(-0.01 * stats.chi2.ppf(0.025, 1), rel=0.02)


class TestDeltaMethod:
    def test_z_multiplier(self):
        assert round(z_multiplier(0.95), 6) == 1.959964

    def test_fisher_must_be_positive(self):
        with pytest.raises(ValueError):
            delta_method_ci("clayton", 2.0, 100, 0.0, TailSpec())

    def test_saturated_tail_gives_point(self):
        ci = delta_method_ci("clayton", 1e17, 100, 1.0, TailSpec(0.05, "L"))
        assert ci.lo == ci.hi == pytest.approx(0.05, rel=1e-15)

    def test_formula(self):
        spec = TailSpec(0.05, "U")
        ci = delta_method_ci("gumbel", 2.0, 400, 0.5, spec)
        r = float(oracles.tail_risks_mp("gumbel", 2.0)["U"])
        d = float(oracles.tail_risk_slope_mp("gumbel", 2.0, 0.05, "U"))
        half = stats.norm.ppf(0.975) * d / math.sqrt(400 * 0.5)
        assert ci.lo == pytest.approx(r - half, rel=1e-6)
        assert ci.hi == pytest.approx(r + half, rel=1e-6)

    def test_consistent_with_grid_at_moderate_n(self):
        family = "clayton"
        data = simulated(family, 5.0, 500, seed=77)
        spec = PriorSpec.for_family(family)
        post = fit_posterior(family, data, spec, default_prior(family))
        grid_ci = induced_risk_posterior(post, TailSpec(0.05, "L")).ci
        fit = mle(family, data, spec)
        fisher = fisher_information_mc(family, fit.theta, spec)
        d_ci = delta_method_ci(family, fit.theta, data.n, fisher, TailSpec(0.05, "L"), bounds=(spec.theta_min, spec.theta_max))
        assert d_ci.lo <= grid_ci.hi and grid_ci.lo <= d_ci.hi
        assert d_ci.width == pytest.approx(grid_ci.width, rel=0.25)


class TestReport:
    def test_independent_data_near_baseline(self):
        rng = np.random.default_rng(12)
        data = to_pseudo_observations(rng.normal(size=4000), rng.normal(size=4000))
        for family in ("clayton", "gumbel"):
            spec = PriorSpec.for_family(family)
            rep = fit_tail_risk(family, data, spec, default_prior(family))
            assert rep.mle.at_boundary or family == "clayton"
            assert abs(rep.risks["L"].mean - 0.0025) < 0.002
            assert abs(rep.risks["U"].mean - 0.0025) < 0.002
        assert "mle_at_truncation_boundary" in rep.diagnostics

    def test_report_dict_fields(self):
        data = simulated("gumbel", 2.0, 300)
        rep = fit_tail_risk("gumbel", data, PriorSpec.for_family("gumbel"), default_prior("gumbel"))
        d = rep.to_dict()
        assert d["independence_ratio_upper"] == pytest.approx(d["risks"]["U"]["mean"] / 0.0025)
        assert set(d["delta_method"]) == {"L", "U", "C"}
        assert d["risks"]["C"]["mean"] == pytest.approx(d["risks"]["L"]["mean"] / 0.05, rel=1e-12)
