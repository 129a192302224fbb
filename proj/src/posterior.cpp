#include "occmarkov/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace occmarkov {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

double sample_mean(const std::vector<double>& x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double sample_var(const std::vector<double>& x, double mean) {
  double acc = 0.0;
  for (double v : x) acc += (v - mean) * (v - mean);
  return acc / static_cast<double>(x.size() - 1);
}

// Unnormalised Gaussian KDE height at x.
double kde_height(const std::vector<double>& draws, double h, double x) {
  double acc = 0.0;
  for (double v : draws) {
    double u = (x - v) / h;
    acc += std::exp(-0.5 * u * u);
  }
  return acc;
}

}  // namespace

double rhat(const std::vector<std::vector<double>>& chains) {
  const auto m = chains.size();
  if (m < 2) fail(Errc::InvalidArgument, "need at least two chains");
  const auto n = chains.front().size();
  if (n < 2) fail(Errc::InvalidArgument, "need at least two draws per chain");
  for (const auto& c : chains)
    if (c.size() != n) fail(Errc::InvalidArgument, "chains have unequal lengths");

  std::vector<double> means(m);
  double W = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    means[j] = sample_mean(chains[j]);
    W += sample_var(chains[j], means[j]);
  }
  W /= static_cast<double>(m);
  if (!(W > 0.0))
    fail(Errc::DegenerateChains, "zero within-chain variance in every chain");

  double grand = sample_mean(means);
  double B = 0.0;
  for (double mu : means) B += (mu - grand) * (mu - grand);
  B *= static_cast<double>(n) / static_cast<double>(m - 1);

  double nn = static_cast<double>(n);
  double v = (nn - 1.0) / nn * W + B / nn;
  return std::sqrt(v / W);
}

double split_rhat(const std::vector<std::vector<double>>& chains) {
  if (chains.size() < 2) fail(Errc::InvalidArgument, "need at least two chains");
  const auto n = chains.front().size();
  if (n < 4) fail(Errc::InvalidArgument, "need at least four draws per chain to split");
  std::vector<std::vector<double>> halves;
  halves.reserve(chains.size() * 2);
  const auto half = n / 2;
  for (const auto& c : chains) {
    if (c.size() != n) fail(Errc::InvalidArgument, "chains have unequal lengths");
    halves.emplace_back(c.begin(), c.begin() + half);
    halves.emplace_back(c.end() - half, c.end());
  }
  return rhat(halves);
}

double posterior_mode(const std::vector<double>& draws) {
  if (draws.empty()) fail(Errc::EmptyData, "no draws");
  const auto n = draws.size();
  if (n == 1) return draws.front();

  double mean = sample_mean(draws);
  double sd = std::sqrt(sample_var(draws, mean));
  std::vector<double> sorted(draws);
  std::sort(sorted.begin(), sorted.end());
  double iqr = quantile7(sorted, 0.75) - quantile7(sorted, 0.25);
  double spread = std::min(sd, iqr / 1.34);
  if (!(spread > 0.0)) spread = std::max(sd, iqr / 1.34);
  if (!(spread > 0.0)) return sorted.front();  // constant draws
  double h = 0.9 * spread * std::pow(static_cast<double>(n), -0.2);

  const double lo = sorted.front(), hi = sorted.back();
  constexpr int kGrid = 512;
  int best = 0;
  double best_height = -1.0;
  for (int k = 0; k < kGrid; ++k) {
    double x = lo + (hi - lo) * k / (kGrid - 1);
    double f = kde_height(draws, h, x);
    if (f > best_height) {
      best_height = f;
      best = k;
    }
  }
  double a = lo + (hi - lo) * std::max(0, best - 1) / (kGrid - 1);
  double b = lo + (hi - lo) * std::min(kGrid - 1, best + 1) / (kGrid - 1);

  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - invphi * (b - a);
  double x2 = a + invphi * (b - a);
  double f1 = kde_height(draws, h, x1);
  double f2 = kde_height(draws, h, x2);
  for (int it = 0; it < 200 && b - a > 1e-12 * (hi - lo + 1.0); ++it) {
    if (f1 > f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = kde_height(draws, h, x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = kde_height(draws, h, x2);
    }
  }
  return 0.5 * (a + b);
}

Vector spatial_median(const Matrix& draws) {
  if (draws.rows() == 0) fail(Errc::EmptyData, "no draws");
  if (draws.rows() == 1) return draws.row(0).transpose();

  const int n = static_cast<int>(draws.rows());
  Vector x = draws.colwise().mean().transpose();
  Vector num(draws.cols()), xn(draws.cols());
  for (int it = 0; it < 10000; ++it) {
    double eps = 1e-12 * (1.0 + x.norm());
    num.setZero();
    double wsum = 0.0;
    int coincident = 0;
    for (int i = 0; i < n; ++i) {
      double d = (draws.row(i).transpose() - x).norm();
      if (d <= eps) {
        ++coincident;
        continue;
      }
      num += draws.row(i).transpose() / d;
      wsum += 1.0 / d;
    }
    if (!(wsum > 0.0)) return x;  // every draw sits at x
    Vector t = num / wsum;
    if (coincident > 0) {
      double r = (num - wsum * x).norm();
      if (!(r > 0.0)) return x;
      double gamma = std::min(1.0, static_cast<double>(coincident) / r);
      xn = (1.0 - gamma) * t + gamma * x;
    } else {
      xn = t;
    }
    double shift = (xn - x).norm();
    x = xn;
    if (shift <= 1e-10 * (1.0 + x.norm())) break;
  }
  return x;
}

double quantile7(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) fail(Errc::EmptyData, "no values");
  const auto n = sorted.size();
  if (n == 1) return sorted.front();
  double h = (static_cast<double>(n) - 1.0) * p;
  auto i = static_cast<std::size_t>(std::clamp(std::floor(h), 0.0,
                                               static_cast<double>(n) - 1.0));
  if (i + 1 >= n) return sorted.back();
  double frac = h - static_cast<double>(i);
  return sorted[i] + frac * (sorted[i + 1] - sorted[i]);
}

Interval credible_interval(const std::vector<double>& draws, double level) {
  if (draws.empty()) fail(Errc::EmptyData, "no draws");
  if (!(level > 0.0) || level > 1.0)
    fail(Errc::InvalidArgument, "interval level must lie in (0, 1]");
  std::vector<double> sorted(draws);
  std::sort(sorted.begin(), sorted.end());
  if (level == 1.0) return {sorted.front(), sorted.back()};
  double tail = (1.0 - level) / 2.0;
  return {quantile7(sorted, tail), quantile7(sorted, 1.0 - tail)};
}

namespace {

// Per-chain traces and the pooled draws for one scalar parameter.
struct Traces {
  std::vector<std::vector<double>> per_chain;
  std::vector<double> pooled;
};

template <typename Extract>
Traces extract(const PosteriorDraws& draws, Extract&& get) {
  Traces out;
  out.per_chain.reserve(draws.chains.size());
  for (const auto& chain : draws.chains) {
    std::vector<double> trace(chain.size());
    for (int d = 0; d < chain.size(); ++d) trace[d] = get(chain, d);
    out.pooled.insert(out.pooled.end(), trace.begin(), trace.end());
    out.per_chain.push_back(std::move(trace));
  }
  return out;
}

ParamSummary summarize_scalar(const std::string& name, const Traces& traces,
                              double point, const SummarizeOptions& opt) {
  ParamSummary row;
  row.name = name;
  row.point = point;
  Interval ci = credible_interval(traces.pooled, opt.level);
  row.lo = ci.lo;
  row.hi = ci.hi;
  row.rhat = kNan;
  if (traces.per_chain.size() >= 2) {
    try {
      row.rhat = opt.split ? split_rhat(traces.per_chain) : rhat(traces.per_chain);
      row.rhat_known = true;
    } catch (const ModelError&) {
      // constant chains or too-short splits leave R-hat unavailable
    }
  }
  row.flagged = row.rhat_known && row.rhat > opt.rhat_threshold;
  return row;
}

}  // namespace

SummaryReport summarize(const PosteriorDraws& draws, const StateSpace& states,
                        const SummarizeOptions& options) {
  if (draws.chains.empty()) fail(Errc::EmptyData, "no chains");
  const int per_chain = draws.chains.front().size();
  if (per_chain == 0) fail(Errc::EmptyData, "no retained draws");
  for (const auto& chain : draws.chains)
    if (chain.size() != per_chain)
      fail(Errc::InvalidArgument, "chains carry unequal draw counts");
  const int S = states.S;
  if (draws.S != S) fail(Errc::InvalidArgument, "draws do not match state space");
  const bool spatial = draws.model == ModelKind::spatial;

  SummaryReport report;
  report.model = draws.model;
  report.chains = static_cast<int>(draws.chains.size());
  report.draws_per_chain = per_chain;
  report.options = options;

  auto add = [&](const std::string& name, const Traces& traces, double point) {
    report.params.push_back(summarize_scalar(name, traces, point, options));
    report.any_flagged = report.any_flagged || report.params.back().flagged;
  };

  {
    Traces tr = extract(draws, [](const ChainDraws& c, int d) { return c.e[d]; });
    report.e = posterior_mode(tr.pooled);
    add("e", tr, report.e);
  }
  if (spatial) {
    Traces t1 =
        extract(draws, [](const ChainDraws& c, int d) { return c.sigma1[d]; });
    report.sigma1 = posterior_mode(t1.pooled);
    add("sigma1", t1, report.sigma1);
    Traces t2 =
        extract(draws, [](const ChainDraws& c, int d) { return c.sigma2[d]; });
    report.sigma2 = posterior_mode(t2.pooled);
    add("sigma2", t2, report.sigma2);
    Traces tr =
        extract(draws, [](const ChainDraws& c, int d) { return c.rho[d]; });
    report.rho = posterior_mode(tr.pooled);
    add("rho", tr, report.rho);
  } else {
    report.sigma1 = report.sigma2 = report.rho = kNan;
  }

  const int total = per_chain * report.chains;
  {
    Matrix pooled(total, S);
    int row = 0;
    for (const auto& chain : draws.chains)
      for (int d = 0; d < chain.size(); ++d)
        pooled.row(row++) = chain.phi[d].transpose();
    Vector med = spatial_median(pooled);
    med /= med.sum();
    report.phi = med;
    for (int s = 0; s < S; ++s) {
      Traces tr = extract(
          draws, [s](const ChainDraws& c, int d) { return c.phi[d](s); });
      add("phi_" + std::to_string(s + 1), tr, med(s));
    }
  }

  report.transition.resize(S, S);
  for (int k = 0; k < S; ++k) {
    Matrix pooled(total, S);
    int row = 0;
    for (const auto& chain : draws.chains)
      for (int d = 0; d < chain.size(); ++d)
        pooled.row(row++) = chain.transition[d].col(k).transpose();
    Vector med = spatial_median(pooled);
    med /= med.sum();
    report.transition.col(k) = med;
  }
  for (int j = 0; j < S; ++j)
    for (int k = 0; k < S; ++k) {
      Traces tr = extract(draws, [j, k](const ChainDraws& c, int d) {
        return c.transition[d](j, k);
      });
      add("p_" + std::to_string(j + 1) + "_" + std::to_string(k + 1), tr,
          report.transition(j, k));
    }

  return report;
}

}  // namespace occmarkov
