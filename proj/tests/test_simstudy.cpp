#include <doctest.h>

#include <string>
#include <vector>

#include "occmarkov/simstudy.hpp"
#include "occmarkov/types.hpp"

using namespace occmarkov;

namespace {

StudyConfig tiny_config() {
  StudyConfig cfg;
  cfg.grid_rows = 3;
  cfg.grid_cols = 3;
  cfg.S = 2;
  cfg.T = 3;
  cfg.error_levels = {0.0, 0.4};
  cfg.datasets_per_level = 2;
  cfg.truth_bandwidth = validate_bandwidth(1.0, 1.0, 0.0);
  cfg.sigma_exclude = 0.0;  // tiny fits wander; keep has_sigma deterministic
  cfg.seed = 77;
  FitConfig fit;
  fit.chains = 2;
  fit.iterations = 60;
  fit.burn_in = 60;
  fit.thin = 1;
  fit.parallel_chains = false;
  cfg.nonspatial_fit = fit;
  cfg.spatial_fit = fit;
  return cfg;
}

}  // namespace

TEST_CASE("study config validation") {
  StudyConfig cfg = tiny_config();
  CHECK_NOTHROW(validate_study_config(cfg));

  StudyConfig bad = cfg;
  bad.error_levels = {};
  CHECK_THROWS_AS(validate_study_config(bad), ModelError);
  bad = cfg;
  bad.error_levels = {0.2, 1.5};
  CHECK_THROWS_AS(validate_study_config(bad), ModelError);
  bad = cfg;
  bad.datasets_per_level = 0;
  CHECK_THROWS_AS(validate_study_config(bad), ModelError);
  bad = cfg;
  bad.S = 1;
  CHECK_THROWS_AS(validate_study_config(bad), ModelError);
  bad = cfg;
  bad.workers = 0;
  CHECK_THROWS_AS(validate_study_config(bad), ModelError);

  bad = cfg;
  bad.replicates = 2;
  try {
    validate_study_config(bad);
    FAIL("expected a throw");
  } catch (const ModelError& err) {
    CHECK(err.code() == Errc::ReplicatedData);
  }
  bad.run_naive = false;
  CHECK_NOTHROW(validate_study_config(bad));
}

TEST_CASE("a tiny study runs every estimator and aggregates") {
  StudyConfig cfg = tiny_config();
  StudyResult res = run_study(cfg);

  // 2 levels x 2 datasets x 3 estimators.
  CHECK(res.fits.size() == 12);
  CHECK(res.aggregates.size() == 6);
  CHECK(res.truths.size() == 4);

  // Shared-truth policy: every dataset sees the same transition matrix.
  for (std::size_t k = 1; k < res.truths.size(); ++k)
    CHECK((res.truths[k] - res.truths[0]).cwiseAbs().maxCoeff() == 0.0);

  const LevelAggregate* naive0 = res.aggregate(0, Estimator::naive);
  REQUIRE(naive0 != nullptr);
  CHECK(naive0->error_rate == 0.0);
  CHECK(naive0->datasets == 2);
  CHECK(!naive0->has_sigma);

  const LevelAggregate* spatial1 = res.aggregate(1, Estimator::spatial);
  REQUIRE(spatial1 != nullptr);
  CHECK(spatial1->has_e);
  CHECK(spatial1->has_sigma);
  CHECK(spatial1->p.mse == doctest::Approx(spatial1->p.bias2 + spatial1->p.var)
                               .epsilon(1e-9));
  CHECK(res.aggregate(0, Estimator::nonspatial)->has_e);
  CHECK(res.aggregate(2, Estimator::naive) == nullptr);

  // With no resampling error the naive estimator is close to the truth up to
  // pair-count sampling noise.
  CHECK(naive0->p.mse < 0.1);

  for (const auto& fit : res.fits) {
    if (!fit.valid) continue;
    CHECK(fit.p_hat.rows() == 2);
    for (int k = 0; k < 2; ++k)
      CHECK(fit.p_hat.col(k).sum() == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("studies are deterministic and worker count does not matter") {
  StudyConfig cfg = tiny_config();
  cfg.run_spatial = false;  // keep the repeat cheap
  StudyResult a = run_study(cfg);
  cfg.workers = 3;
  StudyResult b = run_study(cfg);

  REQUIRE(a.fits.size() == b.fits.size());
  for (std::size_t k = 0; k < a.fits.size(); ++k) {
    CHECK(a.fits[k].valid == b.fits[k].valid);
    CHECK(a.fits[k].e_hat == b.fits[k].e_hat);
    if (a.fits[k].valid)
      CHECK((a.fits[k].p_hat - b.fits[k].p_hat).cwiseAbs().maxCoeff() == 0.0);
  }
  REQUIRE(a.aggregates.size() == b.aggregates.size());
  for (std::size_t k = 0; k < a.aggregates.size(); ++k)
    CHECK(a.aggregates[k].p.mse == b.aggregates[k].p.mse);

  CHECK(format_study_results(a, cfg) == format_study_results(b, cfg));
  CHECK(format_study_fits(a, cfg) == format_study_fits(b, cfg));
}

TEST_CASE("per dataset truths differ and aggregate against their own truth") {
  StudyConfig cfg = tiny_config();
  cfg.run_nonspatial = false;
  cfg.run_spatial = false;
  cfg.truth_policy = TruthPolicy::per_dataset;
  StudyResult res = run_study(cfg);
  CHECK(res.truths.size() == 4);
  bool any_differ = false;
  for (std::size_t k = 1; k < res.truths.size(); ++k)
    any_differ = any_differ ||
                 (res.truths[k] - res.truths[0]).cwiseAbs().maxCoeff() > 1e-12;
  CHECK(any_differ);
  for (const auto& agg : res.aggregates)
    CHECK(agg.p.mse == doctest::Approx(agg.p.bias2 + agg.p.var).epsilon(1e-9));
}

TEST_CASE("study tables have the expected headers") {
  StudyConfig cfg = tiny_config();
  cfg.run_nonspatial = false;
  cfg.run_spatial = false;
  StudyResult res = run_study(cfg);
  CHECK(format_study_results(res, cfg).rfind(
            "level,error_rate,model,datasets,", 0) == 0);
  CHECK(format_study_fits(res, cfg).rfind("level,error_rate,dataset,model,",
                                          0) == 0);
  CHECK(format_study_exclusions(res, cfg).rfind("level,error_rate,dataset,", 0) ==
        0);
  CHECK(format_study_truths(res, cfg).rfind("level,dataset,", 0) == 0);
  std::string fits = format_study_fits(res, cfg);
  CHECK(fits.find("naive") != std::string::npos);
}
