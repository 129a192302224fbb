#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "occmarkov/metrics.hpp"
#include "occmarkov/sampler.hpp"
#include "occmarkov/simulate.hpp"
#include "occmarkov/types.hpp"

namespace occmarkov {

enum class Estimator { naive, nonspatial, spatial };

const char* estimator_name(Estimator which);

// Scope over which one transition truth is shared.
enum class TruthPolicy { study, per_level, per_dataset };

struct StudyConfig {
  int grid_rows = 10, grid_cols = 10;
  int S = 3;
  int T = 5;
  std::vector<double> error_levels;
  int datasets_per_level = 24;
  int replicates = 1;  // surveys per cell; the naive estimator needs 1
  Vector phi;          // empty: uniform
  BandwidthMatrix truth_bandwidth;
  TruthPolicy truth_policy = TruthPolicy::study;
  double sigma_exclude = 10.0;  // drop sigma estimates further than this
                                // from the truth; 0 disables
  bool run_naive = true, run_nonspatial = true, run_spatial = true;
  FitConfig nonspatial_fit, spatial_fit;  // model/seed fields are overridden
  int workers = 1;
  std::uint64_t seed = 0;
};

void validate_study_config(const StudyConfig& cfg);

// One (dataset, estimator) outcome.
struct FitRecord {
  int level = 0;    // index into error_levels
  int dataset = 0;  // index within the level
  Estimator estimator = Estimator::naive;
  bool valid = false;
  Matrix p_hat;
  std::vector<char> masked_columns;  // naive filler columns
  double e_hat = 0.0;
  double sigma1_hat = 0.0, sigma2_hat = 0.0, rho_hat = 0.0;
  bool sigma_excluded = false;
  double p_sqerr = 0.0;  // mean squared entry deviation from the truth
};

// Aggregate quality over one (error level, estimator) batch.
struct LevelAggregate {
  int level = 0;
  double error_rate = 0.0;
  Estimator estimator = Estimator::naive;
  int datasets = 0;  // contributing fits
  EstimatorQuality p;
  bool has_e = false;
  EstimatorQuality e;
  bool has_sigma = false;
  EstimatorQuality sigma1, sigma2;
  int sigma_excluded = 0;
};

struct SigmaExclusion {
  int level = 0;
  double error_rate = 0.0;
  int dataset = 0;
  double sigma1_hat = 0.0, sigma2_hat = 0.0;
  double sigma1_true = 0.0, sigma2_true = 0.0;
};

struct StudyResult {
  std::vector<LevelAggregate> aggregates;  // level-major, estimator order
  std::vector<FitRecord> fits;
  std::vector<SigmaExclusion> exclusions;
  std::vector<Matrix> truths;  // per (level, dataset), level-major

  const LevelAggregate* aggregate(int level, Estimator which) const;
};

// Simulates every dataset, fits the requested estimators over a worker
// pool, and aggregates masked entrywise quality statistics. Deterministic
// in the master seed regardless of worker count.
StudyResult run_study(const StudyConfig& cfg);

std::string format_study_results(const StudyResult& result,
                                 const StudyConfig& cfg);
std::string format_study_fits(const StudyResult& result,
                              const StudyConfig& cfg);
std::string format_study_exclusions(const StudyResult& result,
                                    const StudyConfig& cfg);
std::string format_study_truths(const StudyResult& result,
                                const StudyConfig& cfg);

}  // namespace occmarkov
