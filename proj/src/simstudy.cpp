#include "occmarkov/simstudy.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <thread>

#include "occmarkov/io.hpp"
#include "occmarkov/posterior.hpp"
#include "occmarkov/rng.hpp"

namespace occmarkov {

namespace {

constexpr std::uint64_t kTruthTagBase = 0x70'0000'0000'00ull;
constexpr std::uint64_t kFitTagBase = 0x71'0000'0000'00ull;

int estimator_count(const StudyConfig& cfg) {
  return (cfg.run_naive ? 1 : 0) + (cfg.run_nonspatial ? 1 : 0) +
         (cfg.run_spatial ? 1 : 0);
}

}  // namespace

const char* estimator_name(Estimator which) {
  switch (which) {
    case Estimator::naive: return "naive";
    case Estimator::nonspatial: return "nonspatial";
    case Estimator::spatial: return "spatial";
  }
  return "?";
}

void validate_study_config(const StudyConfig& cfg) {
  if (cfg.grid_rows < 1 || cfg.grid_cols < 1)
    fail(Errc::InvalidArgument, "grid dimensions must be >= 1");
  if (cfg.S < 2) fail(Errc::InvalidArgument, "need at least two states");
  if (cfg.T < 2) fail(Errc::InvalidArgument, "need at least two periods");
  if (cfg.error_levels.empty())
    fail(Errc::InvalidArgument, "need at least one error level");
  for (double e : cfg.error_levels)
    if (!(e >= 0.0) || !(e <= 1.0))
      fail(Errc::InvalidArgument, "error levels must lie in [0, 1]");
  if (cfg.datasets_per_level < 1)
    fail(Errc::InvalidArgument, "need at least one dataset per level");
  if (cfg.replicates < 1)
    fail(Errc::InvalidArgument, "need at least one survey per cell");
  if (cfg.run_naive && cfg.replicates > 1)
    fail(Errc::ReplicatedData,
         "the naive estimator cannot use replicated surveys");
  if (cfg.phi.size() != 0 && cfg.phi.size() != cfg.S)
    fail(Errc::InvalidArgument, "phi length does not match the state count");
  if (cfg.sigma_exclude < 0.0)
    fail(Errc::InvalidArgument, "sigma exclusion threshold must be >= 0");
  if (cfg.workers < 1) fail(Errc::InvalidArgument, "need at least one worker");
  if (estimator_count(cfg) == 0)
    fail(Errc::InvalidArgument, "no estimator selected");
  validate_bandwidth(cfg.truth_bandwidth.sigma1, cfg.truth_bandwidth.sigma2,
                     cfg.truth_bandwidth.rho);
  if (cfg.run_nonspatial) validate_fit_config(cfg.nonspatial_fit);
  if (cfg.run_spatial) validate_fit_config(cfg.spatial_fit);
}

const LevelAggregate* StudyResult::aggregate(int level, Estimator which) const {
  for (const auto& agg : aggregates)
    if (agg.level == level && agg.estimator == which) return &agg;
  return nullptr;
}

StudyResult run_study(const StudyConfig& cfg) {
  validate_study_config(cfg);
  const int L = static_cast<int>(cfg.error_levels.size());
  const int D = cfg.datasets_per_level;
  const int S = cfg.S;

  SiteFrame frame = make_grid(cfg.grid_rows, cfg.grid_cols);
  StateSpace states = make_state_space(S);
  Vector phi = cfg.phi.size() ? cfg.phi : Vector::Constant(S, 1.0 / S);

  // Transition truths by policy scope.
  StudyResult result;
  result.truths.resize(static_cast<std::size_t>(L) * D);
  auto draw_truth = [&](std::uint64_t tag) {
    Pcg32 rng = substream(cfg.seed, kTruthTagBase + tag);
    return draw_transition(S, rng).p;
  };
  if (cfg.truth_policy == TruthPolicy::study) {
    Matrix shared = draw_truth(0);
    for (auto& p : result.truths) p = shared;
  } else if (cfg.truth_policy == TruthPolicy::per_level) {
    for (int l = 0; l < L; ++l) {
      Matrix shared = draw_truth(static_cast<std::uint64_t>(l) + 1);
      for (int d = 0; d < D; ++d)
        result.truths[static_cast<std::size_t>(l) * D + d] = shared;
    }
  } else {
    for (int l = 0; l < L; ++l)
      for (int d = 0; d < D; ++d)
        result.truths[static_cast<std::size_t>(l) * D + d] =
            draw_truth(0x1000 + static_cast<std::uint64_t>(l) * D + d);
  }

  // All datasets up front; each rides its own substream of the master seed.
  std::vector<SimulatedDataset> datasets;
  datasets.reserve(static_cast<std::size_t>(L) * D);
  for (int l = 0; l < L; ++l)
    for (int d = 0; d < D; ++d) {
      SimulationScenario sc;
      sc.frame = frame;
      sc.states = states;
      sc.horizon = cfg.T;
      sc.phi = validate_initial_distribution(phi);
      sc.transition = validate_transition_matrix(
          result.truths[static_cast<std::size_t>(l) * D + d]);
      sc.error_rate = cfg.error_levels[static_cast<std::size_t>(l)];
      sc.bandwidth = cfg.truth_bandwidth;
      sc.replicates.constant = cfg.replicates;
      sc.seed = cfg.seed;
      datasets.push_back(simulate_dataset(sc, l * D + d));
    }

  std::vector<Estimator> active;
  if (cfg.run_naive) active.push_back(Estimator::naive);
  if (cfg.run_nonspatial) active.push_back(Estimator::nonspatial);
  if (cfg.run_spatial) active.push_back(Estimator::spatial);

  struct Job {
    int level, dataset;
    Estimator estimator;
  };
  std::vector<Job> jobs;
  for (int l = 0; l < L; ++l)
    for (int d = 0; d < D; ++d)
      for (Estimator est : active) jobs.push_back({l, d, est});

  result.fits.resize(jobs.size());
  const bool pooled = cfg.workers > 1 && jobs.size() > 1;

  auto run_job = [&](std::size_t idx) {
    const Job& job = jobs[idx];
    const SimulatedDataset& data =
        datasets[static_cast<std::size_t>(job.level) * D + job.dataset];
    const Matrix& truth =
        result.truths[static_cast<std::size_t>(job.level) * D + job.dataset];
    FitRecord rec;
    rec.level = job.level;
    rec.dataset = job.dataset;
    rec.estimator = job.estimator;
    if (job.estimator == Estimator::naive) {
      try {
        NaiveEstimate est = naive_estimate(data.observations, frame, states);
        rec.valid = true;
        rec.p_hat = est.transition.p;
        rec.masked_columns = est.uniform_columns;
      } catch (const ModelError& err) {
        if (err.code() != Errc::NoTransitions) throw;
      }
    } else {
      FitConfig fit = job.estimator == Estimator::spatial ? cfg.spatial_fit
                                                          : cfg.nonspatial_fit;
      fit.model = job.estimator == Estimator::spatial ? ModelKind::spatial
                                                      : ModelKind::nonspatial;
      fit.parallel_chains = !pooled && fit.parallel_chains;
      fit.seed = derive_stream(cfg.seed, kFitTagBase + idx);
      PosteriorDraws draws = run_chains(data.observations, frame, states, fit);
      SummaryReport report = summarize(draws, states);
      rec.valid = true;
      rec.p_hat = report.transition;
      rec.masked_columns.assign(static_cast<std::size_t>(S), 0);
      rec.e_hat = report.e;
      if (job.estimator == Estimator::spatial) {
        rec.sigma1_hat = report.sigma1;
        rec.sigma2_hat = report.sigma2;
        rec.rho_hat = report.rho;
        if (cfg.sigma_exclude > 0.0) {
          double d1 = std::abs(rec.sigma1_hat - cfg.truth_bandwidth.sigma1);
          double d2 = std::abs(rec.sigma2_hat - cfg.truth_bandwidth.sigma2);
          rec.sigma_excluded =
              d1 > cfg.sigma_exclude || d2 > cfg.sigma_exclude;
        }
      }
    }
    if (rec.valid)
      rec.p_sqerr = (rec.p_hat - truth).array().square().mean();
    result.fits[idx] = std::move(rec);
  };

  if (!pooled) {
    for (std::size_t idx = 0; idx < jobs.size(); ++idx) run_job(idx);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(
        static_cast<std::size_t>(cfg.workers));
    auto worker = [&](std::size_t slot) {
      try {
        while (true) {
          std::size_t idx = next.fetch_add(1);
          if (idx >= jobs.size()) return;
          run_job(idx);
        }
      } catch (...) {
        errors[slot] = std::current_exception();
      }
    };
    std::vector<std::thread> threads;
    const std::size_t count =
        std::min<std::size_t>(static_cast<std::size_t>(cfg.workers),
                              jobs.size());
    threads.reserve(count);
    for (std::size_t w = 0; w < count; ++w) threads.emplace_back(worker, w);
    for (auto& t : threads) t.join();
    for (auto& err : errors)
      if (err) std::rethrow_exception(err);
  }

  // Aggregate per (level, estimator) with naive filler columns masked out.
  for (int l = 0; l < L; ++l)
    for (Estimator est : active) {
      LevelAggregate agg;
      agg.level = l;
      agg.error_rate = cfg.error_levels[static_cast<std::size_t>(l)];
      agg.estimator = est;

      std::vector<const FitRecord*> recs;
      for (const auto& rec : result.fits)
        if (rec.level == l && rec.estimator == est && rec.valid)
          recs.push_back(&rec);
      agg.datasets = static_cast<int>(recs.size());

      if (!recs.empty()) {
        EstimatorQuality total;
        int cells = 0;
        std::vector<double> entry;
        for (int j = 0; j < S; ++j)
          for (int k = 0; k < S; ++k) {
            entry.clear();
            double truth_sum = 0.0;
            for (const FitRecord* rec : recs) {
              if (!rec->masked_columns.empty() &&
                  rec->masked_columns[static_cast<std::size_t>(k)])
                continue;
              entry.push_back(rec->p_hat(j, k));
              truth_sum += result.truths[static_cast<std::size_t>(l) * D +
                                         rec->dataset](j, k);
            }
            if (entry.empty()) continue;
            // Per-dataset truths can differ; compare against the mean truth
            // only when they are shared, else accumulate per dataset.
            EstimatorQuality q;
            if (cfg.truth_policy == TruthPolicy::per_dataset) {
              double mean_est = 0.0, mse = 0.0;
              std::size_t idx2 = 0;
              std::vector<double> devs;
              for (const FitRecord* rec : recs) {
                if (!rec->masked_columns.empty() &&
                    rec->masked_columns[static_cast<std::size_t>(k)])
                  continue;
                double t = result.truths[static_cast<std::size_t>(l) * D +
                                         rec->dataset](j, k);
                devs.push_back(entry[idx2] - t);
                ++idx2;
              }
              for (double dv : devs) {
                mean_est += dv;
                mse += dv * dv;
              }
              mean_est /= static_cast<double>(devs.size());
              mse /= static_cast<double>(devs.size());
              q.bias2 = mean_est * mean_est;
              q.mse = mse;
              q.var = mse - q.bias2;
            } else {
              q = estimator_quality(entry, truth_sum /
                                               static_cast<double>(entry.size()));
            }
            total.mse += q.mse;
            total.bias2 += q.bias2;
            total.var += q.var;
            ++cells;
          }
        if (cells > 0) {
          agg.p.mse = total.mse / cells;
          agg.p.bias2 = total.bias2 / cells;
          agg.p.var = total.var / cells;
        }
      }

      if (est != Estimator::naive && !recs.empty()) {
        std::vector<double> es;
        for (const FitRecord* rec : recs) es.push_back(rec->e_hat);
        agg.e = estimator_quality(es, agg.error_rate);
        agg.has_e = true;
      }
      if (est == Estimator::spatial && !recs.empty()) {
        std::vector<double> s1, s2;
        for (const FitRecord* rec : recs) {
          if (rec->sigma_excluded) {
            ++agg.sigma_excluded;
            continue;
          }
          s1.push_back(rec->sigma1_hat);
          s2.push_back(rec->sigma2_hat);
        }
        if (!s1.empty()) {
          agg.sigma1 = estimator_quality(s1, cfg.truth_bandwidth.sigma1);
          agg.sigma2 = estimator_quality(s2, cfg.truth_bandwidth.sigma2);
          agg.has_sigma = true;
        }
      }
      result.aggregates.push_back(std::move(agg));
    }

  for (const auto& rec : result.fits)
    if (rec.sigma_excluded)
      result.exclusions.push_back(
          {rec.level, cfg.error_levels[static_cast<std::size_t>(rec.level)],
           rec.dataset, rec.sigma1_hat, rec.sigma2_hat,
           cfg.truth_bandwidth.sigma1, cfg.truth_bandwidth.sigma2});

  return result;
}

std::string format_study_results(const StudyResult& result,
                                 const StudyConfig& cfg) {
  (void)cfg;
  std::string out =
      "level,error_rate,model,datasets,p_mse,p_bias2,p_var,"
      "e_mse,e_bias2,e_var,sigma1_mse,sigma1_bias2,sigma1_var,"
      "sigma2_mse,sigma2_bias2,sigma2_var,sigma_excluded\n";
  for (const auto& agg : result.aggregates) {
    out += std::to_string(agg.level + 1);
    out += ',';
    out += format_double(agg.error_rate);
    out += ',';
    out += estimator_name(agg.estimator);
    out += ',';
    out += std::to_string(agg.datasets);
    auto quality = [&](const EstimatorQuality& q, bool present) {
      for (double v : {q.mse, q.bias2, q.var}) {
        out += ',';
        if (present) out += format_double(v);
      }
    };
    quality(agg.p, agg.datasets > 0);
    quality(agg.e, agg.has_e);
    quality(agg.sigma1, agg.has_sigma);
    quality(agg.sigma2, agg.has_sigma);
    out += ',';
    out += std::to_string(agg.sigma_excluded);
    out += '\n';
  }
  return out;
}

std::string format_study_fits(const StudyResult& result,
                              const StudyConfig& cfg) {
  std::string out =
      "level,error_rate,dataset,model,valid,p_sqerr,e_hat,"
      "sigma1_hat,sigma2_hat,rho_hat,sigma_excluded\n";
  for (const auto& rec : result.fits) {
    out += std::to_string(rec.level + 1);
    out += ',';
    out += format_double(cfg.error_levels[static_cast<std::size_t>(rec.level)]);
    out += ',';
    out += std::to_string(rec.dataset + 1);
    out += ',';
    out += estimator_name(rec.estimator);
    out += ',';
    out += rec.valid ? '1' : '0';
    out += ',';
    if (rec.valid) out += format_double(rec.p_sqerr);
    out += ',';
    if (rec.valid && rec.estimator != Estimator::naive)
      out += format_double(rec.e_hat);
    auto opt = [&](bool present, double v) {
      out += ',';
      if (present) out += format_double(v);
    };
    bool spatial = rec.valid && rec.estimator == Estimator::spatial;
    opt(spatial, rec.sigma1_hat);
    opt(spatial, rec.sigma2_hat);
    opt(spatial, rec.rho_hat);
    out += ',';
    out += rec.sigma_excluded ? '1' : '0';
    out += '\n';
  }
  return out;
}

std::string format_study_exclusions(const StudyResult& result,
                                    const StudyConfig& cfg) {
  (void)cfg;
  std::string out =
      "level,error_rate,dataset,sigma1_hat,sigma2_hat,sigma1_true,sigma2_true\n";
  for (const auto& ex : result.exclusions) {
    out += std::to_string(ex.level + 1);
    out += ',';
    out += format_double(ex.error_rate);
    out += ',';
    out += std::to_string(ex.dataset + 1);
    out += ',';
    out += format_double(ex.sigma1_hat);
    out += ',';
    out += format_double(ex.sigma2_hat);
    out += ',';
    out += format_double(ex.sigma1_true);
    out += ',';
    out += format_double(ex.sigma2_true);
    out += '\n';
  }
  return out;
}

std::string format_study_truths(const StudyResult& result,
                                const StudyConfig& cfg) {
  const int D = cfg.datasets_per_level;
  const int S = cfg.S;
  std::string out = "level,dataset";
  for (int j = 1; j <= S; ++j)
    for (int k = 1; k <= S; ++k)
      out += ",p_" + std::to_string(j) + "_" + std::to_string(k);
  out += '\n';
  for (std::size_t idx = 0; idx < result.truths.size(); ++idx) {
    out += std::to_string(static_cast<int>(idx) / D + 1);
    out += ',';
    out += std::to_string(static_cast<int>(idx) % D + 1);
    const Matrix& p = result.truths[idx];
    for (int j = 0; j < S; ++j)
      for (int k = 0; k < S; ++k) {
        out += ',';
        out += format_double(p(j, k));
      }
    out += '\n';
  }
  return out;
}

}  // namespace occmarkov
