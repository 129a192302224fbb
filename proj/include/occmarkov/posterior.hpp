#pragma once

#include "occmarkov/sampler.hpp"
#include "occmarkov/types.hpp"

#include <string>
#include <vector>

namespace occmarkov {

// Classical Gelman-Rubin potential scale reduction over >= 2 equal-length
// chains: sqrt(((n-1)/n * W + B/n) / W).
double rhat(const std::vector<std::vector<double>>& chains);

// Same statistic after splitting each chain into halves.
double split_rhat(const std::vector<std::vector<double>>& chains);

// Mode of a Gaussian KDE with Silverman bandwidth: 512-point grid scan over
// the draw range, sharpened by golden-section search.
double posterior_mode(const std::vector<double>& draws);

// L2 geometric median by damped Weiszfeld iteration (tolerance 1e-10, at
// most 1e4 rounds). Rows of the input are draws.
Vector spatial_median(const Matrix& draws);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

// Central interval from linear-interpolation quantiles.
Interval credible_interval(const std::vector<double>& draws, double level);

// Linear-interpolation (type 7) quantile of a sorted sample.
double quantile7(const std::vector<double>& sorted, double p);

struct ParamSummary {
  std::string name;
  double point = 0.0;
  double lo = 0.0, hi = 0.0;
  double rhat = 0.0;       // NaN when unavailable (single chain / constant)
  bool rhat_known = false;
  bool flagged = false;    // rhat above threshold
};

struct SummarizeOptions {
  double level = 0.95;
  double rhat_threshold = 1.1;
  bool split = false;  // use split-halves R-hat
};

struct SummaryReport {
  ModelKind model = ModelKind::spatial;
  int chains = 0;
  int draws_per_chain = 0;
  SummarizeOptions options;
  std::vector<ParamSummary> params;
  Matrix transition;  // spatial-median point estimates, columns renormalized
  Vector phi;
  double e = 0.0;
  double sigma1 = 0.0, sigma2 = 0.0, rho = 0.0;  // NaN for nonspatial fits
  bool any_flagged = false;
};

// Point estimates (KDE mode for scalars, per-column spatial median for the
// transition matrix and phi), central credible intervals, and per-parameter
// R-hat with threshold flags.
SummaryReport summarize(const PosteriorDraws& draws, const StateSpace& states,
                        const SummarizeOptions& options = {});

}  // namespace occmarkov
