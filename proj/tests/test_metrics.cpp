#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "occmarkov/metrics.hpp"
#include "occmarkov/rng.hpp"
#include "occmarkov/simulate.hpp"
#include "occmarkov/types.hpp"

using namespace occmarkov;

namespace {

TransitionMatrix two_state() {
  Matrix p(2, 2);
  p << 0.9, 0.2, 0.1, 0.8;
  return validate_transition_matrix(p);
}

}  // namespace

TEST_CASE("naive pairs from an alternating single site") {
  ObservationBuilder b(1, 4, 2);
  b.add(1, 1, 1);
  b.add(1, 2, 2);
  b.add(1, 3, 1);
  b.add(1, 4, 2);
  NaiveEstimate est = naive_estimate(b.build(), make_grid(1, 1), make_state_space(2));
  CHECK(est.pair_counts(1, 0) == 2);
  CHECK(est.pair_counts(0, 1) == 1);
  CHECK(est.transition.p(0, 0) == 0.0);
  CHECK(est.transition.p(1, 0) == 1.0);
  CHECK(est.transition.p(0, 1) == 1.0);
  CHECK(est.transition.p(1, 1) == 0.0);
  CHECK(!est.flagged(0));
  CHECK(!est.flagged(1));
}

TEST_CASE("only consecutive surveys form pairs") {
  // Site 1 skips period 2, so its periods 1 and 3 contribute nothing.
  ObservationBuilder b(2, 3, 2);
  b.add(1, 1, 1);
  b.add(1, 3, 2);
  b.add(2, 1, 1);
  b.add(2, 2, 1);
  b.add(2, 3, 2);
  NaiveEstimate est = naive_estimate(b.build(), make_grid(1, 2), make_state_space(2));
  CHECK(est.pair_counts.sum() == 2);
  CHECK(est.pair_counts(0, 0) == 1);
  CHECK(est.pair_counts(1, 0) == 1);
}

TEST_CASE("replicated surveys are rejected by the naive estimator") {
  ObservationBuilder b(1, 2, 2);
  b.add(1, 1, 1);
  b.add(1, 1, 2);
  b.add(1, 2, 1);
  try {
    naive_estimate(b.build(), make_grid(1, 1), make_state_space(2));
    FAIL("expected a throw");
  } catch (const ModelError& err) {
    CHECK(err.code() == Errc::ReplicatedData);
    CHECK(std::string(err.what()).find("site 1") != std::string::npos);
  }
}

TEST_CASE("no observable pairs at all") {
  ObservationBuilder one(1, 1, 2);
  one.add(1, 1, 1);
  CHECK_THROWS_AS(naive_estimate(one.build(), make_grid(1, 1), make_state_space(2)),
                  ModelError);

  ObservationBuilder gap(1, 3, 2);
  gap.add(1, 1, 1);
  gap.add(1, 3, 1);
  try {
    naive_estimate(gap.build(), make_grid(1, 1), make_state_space(2));
    FAIL("expected a throw");
  } catch (const ModelError& err) {
    CHECK(err.code() == Errc::NoTransitions);
  }
}

TEST_CASE("unseen source states take the uniform filler column") {
  ObservationBuilder b(1, 3, 3);
  b.add(1, 1, 1);
  b.add(1, 2, 2);
  b.add(1, 3, 1);
  NaiveEstimate est = naive_estimate(b.build(), make_grid(1, 1), make_state_space(3));
  CHECK(!est.flagged(0));
  CHECK(!est.flagged(1));
  CHECK(est.flagged(2));
  for (int j = 0; j < 3; ++j)
    CHECK(est.transition.p(j, 2) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(est.transition.p(1, 0) == 1.0);
  CHECK(est.transition.p(0, 1) == 1.0);
}

TEST_CASE("stationary distribution of a two state chain") {
  Vector w = stationary_distribution(two_state());
  CHECK(w(0) == doctest::Approx(2.0 / 3.0).epsilon(1e-10));
  CHECK(w(1) == doctest::Approx(1.0 / 3.0).epsilon(1e-10));
  CHECK(w.sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("stationary distribution needs a unique dominant eigenvector") {
  Matrix eye = Matrix::Identity(2, 2);
  try {
    stationary_distribution(validate_transition_matrix(eye));
    FAIL("expected a throw");
  } catch (const ModelError& err) {
    CHECK(err.code() == Errc::NonConvergent);
  }
}

TEST_CASE("mean turnover time of the two state chain") {
  // w = (2/3, 1/3), escapes 0.1 and 0.2: 20/3 + 5/3 = 25/3.
  CHECK(mean_turnover_time(two_state()) == doctest::Approx(25.0 / 3.0).epsilon(1e-9));
}

TEST_CASE("uniform transitions give a flat turnover") {
  const int S = 5;
  Matrix p = Matrix::Constant(S, S, 1.0 / S);
  TransitionMatrix P = validate_transition_matrix(p);
  CHECK(mean_turnover_time(P) == doctest::Approx(1.25).epsilon(1e-9));
  CHECK(std::isinf(damping_ratio(P)));
}

TEST_CASE("absorbing occupied states have no finite turnover") {
  Matrix p(2, 2);
  p << 1.0, 0.5, 0.0, 0.5;
  try {
    mean_turnover_time(validate_transition_matrix(p));
    FAIL("expected a throw");
  } catch (const ModelError& err) {
    CHECK(err.code() == Errc::AbsorbingState);
  }
}

TEST_CASE("damping ratio of the two state chain") {
  // Eigenvalues 1 and 0.7.
  CHECK(damping_ratio(two_state()) == doctest::Approx(10.0 / 7.0).epsilon(1e-9));
}

TEST_CASE("community metrics bundle") {
  CommunityMetrics cm = community_metrics(two_state());
  CHECK(cm.w(0) == doctest::Approx(2.0 / 3.0).epsilon(1e-10));
  CHECK(cm.turnover == doctest::Approx(25.0 / 3.0).epsilon(1e-9));
  CHECK(cm.damping == doctest::Approx(10.0 / 7.0).epsilon(1e-9));
}

TEST_CASE("scalar estimator quality decomposition") {
  EstimatorQuality q = estimator_quality({0.0, 2.0}, 0.0);
  CHECK(q.mse == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(q.bias2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(q.var == doctest::Approx(1.0).epsilon(1e-12));

  EstimatorQuality c = estimator_quality({1.0, 1.0, 1.0}, 0.0);
  CHECK(c.mse == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(c.bias2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(c.var == doctest::Approx(0.0).epsilon(1e-12));

  CHECK_THROWS_AS(estimator_quality({}, 0.0), ModelError);
}

TEST_CASE("the quality identity holds on random draws") {
  Pcg32 rng = substream(12, 0);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> est(17);
    for (double& v : est) v = uniform(rng, -3.0, 3.0);
    double truth = uniform(rng, -1.0, 1.0);
    EstimatorQuality q = estimator_quality(est, truth);
    CHECK(q.mse == doctest::Approx(q.bias2 + q.var).epsilon(1e-9));
  }
}

TEST_CASE("matrix quality averages entrywise") {
  Matrix eye = Matrix::Identity(2, 2);
  Matrix half = Matrix::Constant(2, 2, 0.5);
  std::vector<TransitionMatrix> ests = {validate_transition_matrix(eye),
                                        validate_transition_matrix(half)};
  TransitionMatrix truth = validate_transition_matrix(eye);
  EstimatorQuality q = matrix_quality(ests, truth);
  CHECK(q.mse == doctest::Approx(0.125).epsilon(1e-12));
  CHECK(q.bias2 == doctest::Approx(0.0625).epsilon(1e-12));
  CHECK(q.var == doctest::Approx(0.0625).epsilon(1e-12));

  Matrix p3 = Matrix::Constant(3, 3, 1.0 / 3.0);
  CHECK_THROWS_AS(matrix_quality(ests, validate_transition_matrix(p3)), ModelError);
  CHECK_THROWS_AS(matrix_quality({}, truth), ModelError);
}
