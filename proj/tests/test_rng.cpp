#include <doctest.h>

#include <cmath>
#include <vector>

#include "occmarkov/rng.hpp"

using namespace occmarkov;

TEST_CASE("pcg32 streams are deterministic and independent") {
  Pcg32 a(42, 1), b(42, 1), c(42, 2);
  std::vector<std::uint32_t> xs, ys;
  bool any_differ = false;
  for (int i = 0; i < 64; ++i) {
    auto x = a();
    CHECK(x == b());
    any_differ = any_differ || x != c();
  }
  CHECK(any_differ);
}

TEST_CASE("substreams of one master seed differ") {
  Pcg32 a = substream(7, 0), b = substream(7, 1);
  bool any_differ = false;
  for (int i = 0; i < 64; ++i) any_differ = any_differ || a() != b();
  CHECK(any_differ);
}

TEST_CASE("uniform01 stays in the half-open unit interval") {
  Pcg32 rng(3, 3);
  double lo = 1.0, hi = 0.0, sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    double u = uniform01(rng);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    sum += u;
  }
  CHECK(lo >= 0.0);
  CHECK(hi < 1.0);
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("normal01 has standard moments") {
  Pcg32 rng(11, 0);
  const int n = 200000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    double x = normal01(rng);
    sum += x;
    sq += x * x;
  }
  CHECK(sum / n == doctest::Approx(0.0).epsilon(1.0).scale(0.01));
  CHECK(sq / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("gamma moments for small and large shapes") {
  Pcg32 rng(12, 0);
  for (double shape : {0.4, 1.0, 3.5}) {
    const int n = 200000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
      double x = gamma_draw(rng, shape);
      CHECK(x > 0.0);
      sum += x;
      sq += x * x;
    }
    double mean = sum / n;
    double var = sq / n - mean * mean;
    CHECK(mean == doctest::Approx(shape).epsilon(0.02));
    CHECK(var == doctest::Approx(shape).epsilon(0.05));
  }
}

TEST_CASE("beta mean matches a/(a+b)") {
  Pcg32 rng(13, 0);
  const int n = 100000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += beta_draw(rng, 2.0, 5.0);
  CHECK(sum / n == doctest::Approx(2.0 / 7.0).epsilon(0.02));
}

TEST_CASE("dirichlet draws live on the simplex with the right mean") {
  Pcg32 rng(14, 0);
  Vector alpha(3);
  alpha << 1.0, 2.0, 7.0;
  Vector mean = Vector::Zero(3);
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    Vector d = dirichlet_draw(rng, alpha);
    CHECK(d.sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(d.minCoeff() >= 0.0);
    mean += d;
  }
  mean /= n;
  CHECK(mean(0) == doctest::Approx(0.1).epsilon(0.03));
  CHECK(mean(2) == doctest::Approx(0.7).epsilon(0.01));
}

TEST_CASE("categorical frequencies follow the weights") {
  Pcg32 rng(15, 0);
  Vector w(3);
  w << 2.0, 1.0, 1.0;
  std::vector<int> count(3, 0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) ++count[static_cast<std::size_t>(categorical_draw(rng, w))];
  CHECK(count[0] / static_cast<double>(n) == doctest::Approx(0.5).epsilon(0.02));
  CHECK(count[1] / static_cast<double>(n) == doctest::Approx(0.25).epsilon(0.04));
}

TEST_CASE("draw_state is one-based") {
  Pcg32 rng(16, 0);
  Vector w(2);
  w << 0.0, 1.0;
  for (int i = 0; i < 16; ++i) CHECK(draw_state(rng, w) == 2);
}

TEST_CASE("zero or invalid weight vectors are rejected") {
  Pcg32 rng(17, 0);
  Vector w = Vector::Zero(3);
  CHECK_THROWS_AS(categorical_draw(rng, w), ModelError);
}
