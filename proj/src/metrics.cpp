#include "occmarkov/metrics.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace occmarkov {

namespace {

constexpr double kStationaryTol = 1e-12;
constexpr double kResidualTol = 1e-10;
constexpr int kMaxPowerIters = 200000;

// Power iteration from one start; empty result means no convergence.
bool power_iterate(const Matrix& P, Vector v, Vector& out) {
  v /= v.sum();
  Vector next(v.size());
  for (int it = 0; it < kMaxPowerIters; ++it) {
    next.noalias() = P * v;
    next /= next.sum();
    double diff = (next - v).lpNorm<Eigen::Infinity>();
    v = next;
    if (diff <= kStationaryTol) {
      out = v;
      return true;
    }
  }
  return false;
}

}  // namespace

NaiveEstimate naive_estimate(const ObservationSet& data, const SiteFrame& frame,
                             const StateSpace& states) {
  if (data.I != frame.I())
    fail(Errc::InvalidArgument, "observation set does not match the site frame");
  if (data.S != states.S)
    fail(Errc::InvalidArgument, "observation set does not match the state space");
  const int I = data.I, T = data.T, S = data.S;
  if (T < 2) fail(Errc::NoTransitions, "need at least two periods");

  for (int t = 1; t <= T; ++t)
    for (int i = 1; i <= I; ++i)
      if (data.n(i, t) > 1)
        fail(Errc::ReplicatedData,
             "site " + std::to_string(i) + " period " + std::to_string(t) +
                 " carries replicated surveys");

  NaiveEstimate est;
  est.pair_counts = IntMatrix::Zero(S, S);
  for (int t = 1; t < T; ++t)
    for (int i = 1; i <= I; ++i) {
      if (data.n(i, t) == 0 || data.n(i, t + 1) == 0) continue;
      int from = data.y[static_cast<std::size_t>(data.begin(i, t))];
      int to = data.y[static_cast<std::size_t>(data.begin(i, t + 1))];
      est.pair_counts(to - 1, from - 1) += 1;
    }
  if (est.pair_counts.sum() == 0)
    fail(Errc::NoTransitions, "no consecutive observed pairs");

  Matrix P(S, S);
  est.uniform_columns.assign(static_cast<std::size_t>(S), 0);
  for (int k = 0; k < S; ++k) {
    long total = est.pair_counts.col(k).sum();
    if (total == 0) {
      P.col(k).setConstant(1.0 / S);
      est.uniform_columns[static_cast<std::size_t>(k)] = 1;
    } else {
      P.col(k) = est.pair_counts.col(k).cast<double>() / static_cast<double>(total);
    }
  }
  est.transition = validate_transition_matrix(P);
  return est;
}

Vector stationary_distribution(const TransitionMatrix& P) {
  const int S = static_cast<int>(P.p.cols());
  if (S == 1) return Vector::Ones(1);

  Vector w1, w2;
  if (!power_iterate(P.p, Vector::Ones(S), w1))
    fail(Errc::NonConvergent, "power iteration did not converge");
  Vector start2 = Vector::Zero(S);
  start2(0) = 1.0;
  if (!power_iterate(P.p, start2, w2))
    fail(Errc::NonConvergent, "power iteration did not converge");
  if ((w1 - w2).lpNorm<Eigen::Infinity>() > 1e-8)
    fail(Errc::NonConvergent, "dominant eigenvalue is not simple");
  if ((P.p * w1 - w1).lpNorm<Eigen::Infinity>() > kResidualTol)
    fail(Errc::NonConvergent, "stationary residual above tolerance");
  return w1;
}

double mean_turnover_time(const TransitionMatrix& P) {
  Vector w = stationary_distribution(P);
  double total = 0.0;
  for (int s = 0; s < w.size(); ++s) {
    if (w(s) <= 0.0) continue;
    double escape = 1.0 - P.p(s, s);
    if (escape <= 1e-12)
      fail(Errc::AbsorbingState,
           "state " + std::to_string(s + 1) + " has no departure probability");
    total += w(s) / escape;
  }
  return total;
}

double damping_ratio(const TransitionMatrix& P) {
  const int S = static_cast<int>(P.p.cols());
  if (S == 1) return std::numeric_limits<double>::infinity();
  Eigen::EigenSolver<Matrix> solver(P.p);
  if (solver.info() != Eigen::Success)
    fail(Errc::NonConvergent, "eigendecomposition failed");
  std::vector<double> moduli(static_cast<std::size_t>(S));
  for (int s = 0; s < S; ++s)
    moduli[static_cast<std::size_t>(s)] = std::abs(solver.eigenvalues()(s));
  std::sort(moduli.begin(), moduli.end(), std::greater<>());
  double sub = moduli[1];
  if (sub < 1e-14) return std::numeric_limits<double>::infinity();
  return 1.0 / sub;
}

CommunityMetrics community_metrics(const TransitionMatrix& P) {
  CommunityMetrics out;
  out.w = stationary_distribution(P);
  out.turnover = mean_turnover_time(P);
  out.damping = damping_ratio(P);
  return out;
}

EstimatorQuality estimator_quality(const std::vector<double>& estimates,
                                   double truth) {
  if (estimates.empty()) fail(Errc::EmptyData, "no estimates");
  const double n = static_cast<double>(estimates.size());
  double mean = 0.0;
  for (double v : estimates) mean += v;
  mean /= n;
  EstimatorQuality q;
  q.bias2 = (mean - truth) * (mean - truth);
  for (double v : estimates) {
    q.var += (v - mean) * (v - mean);
    q.mse += (v - truth) * (v - truth);
  }
  q.var /= n;
  q.mse /= n;
  return q;
}

EstimatorQuality matrix_quality(const std::vector<TransitionMatrix>& estimates,
                                const TransitionMatrix& truth) {
  if (estimates.empty()) fail(Errc::EmptyData, "no estimates");
  const auto S = truth.p.rows();
  for (const auto& est : estimates)
    if (est.p.rows() != S || est.p.cols() != S)
      fail(Errc::InvalidArgument, "estimate shape does not match the truth");

  EstimatorQuality total;
  std::vector<double> entry(estimates.size());
  for (Eigen::Index j = 0; j < S; ++j)
    for (Eigen::Index k = 0; k < S; ++k) {
      for (std::size_t r = 0; r < estimates.size(); ++r)
        entry[r] = estimates[r].p(j, k);
      EstimatorQuality q = estimator_quality(entry, truth.p(j, k));
      total.mse += q.mse;
      total.bias2 += q.bias2;
      total.var += q.var;
    }
  const double cells = static_cast<double>(S * S);
  total.mse /= cells;
  total.bias2 /= cells;
  total.var /= cells;
  return total;
}

}  // namespace occmarkov
