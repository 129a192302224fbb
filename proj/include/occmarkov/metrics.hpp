#pragma once

#include <vector>

#include "occmarkov/types.hpp"

namespace occmarkov {

// Naive transition estimate from observed consecutive pairs. Columns whose
// source state was never observed are filled with 1/S and flagged.
struct NaiveEstimate {
  TransitionMatrix transition;
  std::vector<char> uniform_columns;  // length S, 1 where the column is filler
  IntMatrix pair_counts;              // S x S, n_jk = observed k -> j pairs

  bool flagged(int column) const { return uniform_columns[column] != 0; }
};

NaiveEstimate naive_estimate(const ObservationSet& data, const SiteFrame& frame,
                             const StateSpace& states);

// Dominant right eigenvector of P, normalised to a probability vector.
Vector stationary_distribution(const TransitionMatrix& P);

// Expected time for a site to leave its current state, averaged at equilibrium.
double mean_turnover_time(const TransitionMatrix& P);

// 1/|lambda_2|; +infinity when the subdominant modulus is below 1e-14.
double damping_ratio(const TransitionMatrix& P);

struct CommunityMetrics {
  Vector w;
  double turnover = 0.0;
  double damping = 0.0;
};

CommunityMetrics community_metrics(const TransitionMatrix& P);

struct EstimatorQuality {
  double mse = 0.0;
  double bias2 = 0.0;
  double var = 0.0;
};

EstimatorQuality estimator_quality(const std::vector<double>& estimates,
                                   double truth);

EstimatorQuality matrix_quality(const std::vector<TransitionMatrix>& estimates,
                                const TransitionMatrix& truth);

}  // namespace occmarkov
