#include "occmarkov/sampler.hpp"

#include "occmarkov/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace occmarkov {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRatioCap = 1e300;
constexpr std::uint64_t kChainTagBase = 0x3c0000000000ULL;
constexpr double kTargetAcceptance = 0.44;

void check_alignment(const ObservationSet& data, const SiteFrame& frame,
                     const StateSpace& states) {
  if (data.record_count() == 0) fail(Errc::EmptyData, "no records to fit");
  if (data.I != frame.I())
    fail(Errc::InvalidArgument, "observation set does not match site frame");
  if (data.S != states.S)
    fail(Errc::InvalidArgument, "observation set does not match state space");
}

void rebuild_counts(ChainState& st) {
  st.counts.setZero(st.S, st.T);
  for (int t = 0; t < st.T; ++t)
    for (int i = 0; i < st.I; ++i) ++st.counts(st.z(i, t) - 1, t);
}

std::vector<std::vector<std::vector<int>>> holder_lists(const ChainState& st) {
  std::vector<std::vector<std::vector<int>>> holders(
      st.T, std::vector<std::vector<int>>(st.S));
  for (int t = 0; t < st.T; ++t)
    for (int i = 0; i < st.I; ++i) holders[t][st.z(i, t) - 1].push_back(i);
  return holders;
}

void rebuild_weight_cache(ChainState& st) {
  if (!st.spatial()) return;
  st.W.assign(st.T, Matrix());
  auto holders = holder_lists(st);
  for (int t = 0; t < st.T; ++t) {
    Matrix& Wt = st.W[t];
    Wt.setZero(st.I, st.S);
    for (int s = 0; s < st.S; ++s)
      for (int l : holders[t][s]) Wt.col(s) += st.K.col(l);
  }
}

void rebuild_error_index(ChainState& st, const ObservationSet& data) {
  if (st.err_sites.empty())
    st.err_sites.assign(st.T, std::vector<std::vector<int>>(st.S));
  st.m_total = 0;
  for (int t = 0; t < st.T; ++t)
    for (int s = 0; s < st.S; ++s) st.err_sites[t][s].clear();
  for (int t = 1; t <= st.T; ++t)
    for (int i = 1; i <= st.I; ++i)
      for (std::int64_t r = data.begin(i, t); r < data.end(i, t); ++r)
        if (st.m[r]) {
          st.err_sites[t - 1][data.y[r] - 1].push_back(i - 1);
          ++st.m_total;
        }
}

// Log-likelihood of all flagged records under the cached dominance field.
double flagged_loglik(const ChainState& st) {
  double ll = 0.0;
  for (int t = 0; t < st.T; ++t)
    for (int s = 0; s < st.S; ++s) {
      const auto& sites = st.err_sites[t][s];
      if (sites.empty()) continue;
      for (int j : sites) {
        double x = st.W[t](j, s) / st.D(j);
        if (x > 0.0)
          ll += std::log(x);
        else
          return -kInf;
      }
    }
  return ll;
}

void adapt_step(ProposalStep& step, double alpha, bool adapting, double lo,
                double hi) {
  if (!adapting) return;
  double k = static_cast<double>(step.counter.proposals);
  double gamma = std::min(0.5, 4.0 / std::pow(k, 0.7));
  step.log_step += gamma * (alpha - kTargetAcceptance);
  step.log_step = std::clamp(step.log_step, lo, hi);
}

}  // namespace

const char* model_name(ModelKind kind) {
  return kind == ModelKind::spatial ? "spatial" : "nonspatial";
}

void validate_fit_config(const FitConfig& cfg) {
  if (cfg.chains < 1) fail(Errc::InvalidArgument, "need at least one chain");
  if (cfg.iterations < 0)
    fail(Errc::InvalidArgument, "iteration count must be nonnegative");
  if (cfg.burn_in < 0) fail(Errc::InvalidArgument, "burn-in must be nonnegative");
  if (cfg.thin < 1) fail(Errc::InvalidArgument, "thinning interval must be positive");
  if (!(cfg.sigma_upper > kSigmaFloor))
    fail(Errc::InvalidArgument, "scale prior bound must exceed the scale floor");
  if (cfg.audit_every < 0)
    fail(Errc::InvalidArgument, "audit interval must be nonnegative");
  if (cfg.fixed_bandwidth)
    validate_bandwidth(cfg.fixed_bandwidth->sigma1, cfg.fixed_bandwidth->sigma2,
                       cfg.fixed_bandwidth->rho);
  if (cfg.fixed_transition) validate_transition_matrix(cfg.fixed_transition->p);
  if (cfg.fixed_phi) validate_initial_distribution(*cfg.fixed_phi);
  if (cfg.fixed_e && (!(*cfg.fixed_e >= 0.0) || !(*cfg.fixed_e <= 1.0)))
    fail(Errc::InvalidArgument, "fixed error rate must lie in [0, 1]");
}

ChainState init_chain(const ObservationSet& data, const SiteFrame& frame,
                      const StateSpace& states, const FitConfig& cfg, Pcg32& rng) {
  validate_fit_config(cfg);
  check_alignment(data, frame, states);
  const int I = data.I, T = data.T, S = data.S;

  ChainState st;
  st.model = cfg.model;
  st.I = I;
  st.T = T;
  st.S = S;
  st.frame = frame;
  st.sigma_upper = cfg.sigma_upper;
  st.fix_rho = cfg.fix_rho_zero;
  st.bw_frozen = cfg.fixed_bandwidth.has_value();
  st.P_frozen = cfg.fixed_transition.has_value();
  st.phi_frozen = cfg.fixed_phi.has_value();
  st.e_frozen = cfg.fixed_e.has_value();

  // Per-cell modal records, ties to the lowest state.
  st.z.setConstant(I, T, 0);
  std::vector<int> tally(S);
  std::vector<std::int64_t> global_tally(S, 0);
  for (int t = 1; t <= T; ++t)
    for (int i = 1; i <= I; ++i) {
      std::fill(tally.begin(), tally.end(), 0);
      for (std::int64_t r = data.begin(i, t); r < data.end(i, t); ++r) {
        ++tally[data.y[r] - 1];
        ++global_tally[data.y[r] - 1];
      }
      int best = 0, best_n = 0;
      for (int s = 0; s < S; ++s)
        if (tally[s] > best_n) {
          best_n = tally[s];
          best = s + 1;
        }
      st.z(i - 1, t - 1) = best;  // zero marks an unobserved cell
    }
  int global_modal = 1;
  {
    std::int64_t best_n = -1;
    for (int s = 0; s < S; ++s)
      if (global_tally[s] > best_n) {
        best_n = global_tally[s];
        global_modal = s + 1;
      }
  }

  // Unobserved cells copy the nearest observed period of their site, earlier
  // period on ties; fully unobserved sites take the overall modal state.
  for (int i = 0; i < I; ++i) {
    std::vector<int> seen;
    for (int t = 0; t < T; ++t)
      if (st.z(i, t) != 0) seen.push_back(t);
    for (int t = 0; t < T; ++t) {
      if (st.z(i, t) != 0) continue;
      if (seen.empty()) {
        st.z(i, t) = global_modal;
        continue;
      }
      int best = seen.front();
      for (int u : seen)
        if (std::abs(u - t) < std::abs(best - t)) best = u;
      st.z(i, t) = st.z(i, best);
    }
  }

  rebuild_counts(st);

  // Support repair: every state recorded in a period needs at least one
  // holding site there, otherwise the starting configuration carries zero
  // likelihood. Two greedy passes prefer flips that do not orphan another
  // recorded state; a direct assignment of one site per recorded state
  // covers anything the greedy passes miss.
  for (int t = 0; t < T; ++t) {
    IntMatrix rc = IntMatrix::Zero(S, I);
    for (int i = 1; i <= I; ++i)
      for (std::int64_t r = data.begin(i, t + 1); r < data.end(i, t + 1); ++r)
        ++rc(data.y[r] - 1, i - 1);
    std::vector<bool> needed(S);
    int n_needed = 0;
    for (int s = 0; s < S; ++s) {
      needed[s] = rc.row(s).sum() > 0;
      n_needed += needed[s];
    }
    auto violated = [&](int s) { return needed[s] && st.counts(s, t) == 0; };
    for (int pass = 0; pass < 2; ++pass) {
      for (int s = 0; s < S; ++s) {
        if (!violated(s)) continue;
        int best_j = -1;
        bool best_safe = false;
        int best_rc = -1;
        for (int j = 0; j < I; ++j) {
          int u = st.z(j, t) - 1;
          bool safe = st.counts(u, t) >= 2 || !needed[u];
          if (std::make_tuple(safe, rc(s, j), -j) >
              std::make_tuple(best_safe, best_rc, -best_j)) {
            best_safe = safe;
            best_rc = rc(s, j);
            best_j = j;
          }
        }
        --st.counts(st.z(best_j, t) - 1, t);
        st.z(best_j, t) = s + 1;
        ++st.counts(s, t);
      }
    }
    bool ok = true;
    for (int s = 0; s < S; ++s) ok = ok && !violated(s);
    if (!ok) {
      if (n_needed > I)
        fail(Errc::ZeroLikelihoodData,
             "period " + std::to_string(t + 1) + " records " +
                 std::to_string(n_needed) + " states across " +
                 std::to_string(I) + " sites");
      int next_site = 0;
      for (int s = 0; s < S; ++s) {
        if (!needed[s]) continue;
        int best_j = next_site, best_rc = -1;
        for (int j = next_site; j < I; ++j)
          if (rc(s, j) > best_rc) {
            best_rc = rc(s, j);
            best_j = j;
          }
        std::swap(st.z(best_j, t), st.z(next_site, t));
        st.z(next_site, t) = s + 1;
        ++next_site;
      }
      rebuild_counts(st);
    }
  }

  st.m.assign(static_cast<std::size_t>(data.record_count()), 0);
  for (int t = 1; t <= T; ++t)
    for (int i = 1; i <= I; ++i)
      for (std::int64_t r = data.begin(i, t); r < data.end(i, t); ++r)
        st.m[r] = data.y[r] != st.z(i - 1, t - 1);

  st.P.resize(S, S);
  Vector ones = Vector::Ones(S);
  if (cfg.fixed_transition)
    st.P = cfg.fixed_transition->p;
  else
    for (int k = 0; k < S; ++k) st.P.col(k) = dirichlet_draw(rng, ones);
  st.phi = cfg.fixed_phi ? *cfg.fixed_phi : dirichlet_draw(rng, ones);
  st.e = cfg.fixed_e ? *cfg.fixed_e : uniform01(rng);

  if (st.spatial()) {
    if (cfg.fixed_bandwidth) {
      st.bw = *cfg.fixed_bandwidth;
    } else {
      st.bw.sigma1 = std::max(kSigmaFloor, uniform(rng, 0.0, cfg.sigma_upper));
      st.bw.sigma2 = std::max(kSigmaFloor, uniform(rng, 0.0, cfg.sigma_upper));
      if (cfg.fix_rho_zero) {
        st.bw.rho = 0.0;
      } else {
        double rho = uniform(rng, -1.0, 1.0);
        if (1.0 - rho * rho < kRhoSingularTol) rho = 0.99 * rho;
        st.bw.rho = rho;
      }
    }
    validate_bandwidth(st.bw.sigma1, st.bw.sigma2, st.bw.rho);
    st.K = kernel_matrix(frame, st.bw);
    st.D = st.K.rowwise().sum();
    rebuild_weight_cache(st);
  }

  rebuild_error_index(st, data);
  st.scratch_logw.resize(S);
  st.scratch_w.resize(S);
  return st;
}

void update_m(ChainState& st, const ObservationSet& data, Pcg32& rng) {
  const double e = st.e;
  for (int t = 1; t <= st.T; ++t)
    for (int i = 1; i <= st.I; ++i) {
      int zit = st.z(i - 1, t - 1);
      for (std::int64_t r = data.begin(i, t); r < data.end(i, t); ++r) {
        int y = data.y[r];
        if (y == zit) {
          double a = e * st.g(i, t, y);
          st.m[r] = bernoulli(rng, a / (a + (1.0 - e)));
        } else {
          if (st.counts(y - 1, t - 1) == 0)
            fail(Errc::ZeroSupport, "record " + std::to_string(y) + " at site " +
                                        std::to_string(i) + ", period " +
                                        std::to_string(t) +
                                        " has no dominance support");
          st.m[r] = 1;
        }
      }
    }
  rebuild_error_index(st, data);
}

void update_z_site(ChainState& st, const ObservationSet& data, int i, int t,
                   Pcg32& rng) {
  const int S = st.S, i0 = i - 1, t0 = t - 1;
  const int z_old = st.z(i0, t0);
  bool pinned = false;
  for (std::int64_t r = data.begin(i, t); r < data.end(i, t); ++r)
    if (!st.m[r]) {
      if (data.y[r] != z_old)
        fail(Errc::AllZeroWeights, "clean record contradicts the latent state at site " +
                                       std::to_string(i) + ", period " +
                                       std::to_string(t));
      pinned = true;
    }
  if (pinned) return;

  const auto& err_t = st.err_sites[t0];
  const bool old_recorded = !err_t[z_old - 1].empty();
  if (old_recorded && st.counts(z_old - 1, t0) == 1)
    return;  // last holder of a recorded state cannot move

  Vector& logw = st.scratch_logw;
  for (int s = 0; s < S; ++s) {
    double lp = (t == 1) ? std::log(st.phi(s))
                         : std::log(st.P(s, st.z(i0, t0 - 1) - 1));
    if (t < st.T) lp += std::log(st.P(st.z(i0, t0 + 1) - 1, s));
    logw(s) = lp;
  }

  double B = 0.0;
  if (st.spatial()) {
    const Matrix& Wt = st.W[t0];
    const double* Kcol = st.K.col(i0).data();
    if (old_recorded) {
      const double* Wcol = Wt.col(z_old - 1).data();
      for (int j : err_t[z_old - 1]) {
        if (Kcol[j] == 0.0) continue;
        double x = Kcol[j] / Wcol[j];
        B += x < 1.0 ? std::log1p(-x) : -kInf;
      }
    }
    for (int s = 0; s < S; ++s) {
      if (s == z_old - 1) continue;
      double A = 0.0;
      const auto& sites = err_t[s];
      if (!sites.empty()) {
        const double* Wcol = Wt.col(s).data();
        for (int j : sites) {
          if (Kcol[j] == 0.0) continue;
          double x = Kcol[j] / Wcol[j];
          if (!(x < kRatioCap)) x = kRatioCap;
          A += std::log1p(x);
        }
      }
      logw(s) += A + B;
    }
  } else {
    if (old_recorded) {
      double n_old = st.counts(z_old - 1, t0);
      B = static_cast<double>(err_t[z_old - 1].size()) * std::log1p(-1.0 / n_old);
    }
    for (int s = 0; s < S; ++s) {
      if (s == z_old - 1) continue;
      double A = 0.0;
      if (!err_t[s].empty()) {
        double x = 1.0 / st.counts(s, t0);
        if (!(x < kRatioCap)) x = kRatioCap;
        A = static_cast<double>(err_t[s].size()) * std::log1p(x);
      }
      logw(s) += A + B;
    }
  }

  double mx = logw.maxCoeff();
  if (mx == -kInf)
    fail(Errc::AllZeroWeights, "no admissible state at site " + std::to_string(i) +
                                   ", period " + std::to_string(t));
  Vector& w = st.scratch_w;
  for (int s = 0; s < S; ++s) w(s) = std::exp(logw(s) - mx);
  int s_new = draw_state(rng, w);
  if (s_new == z_old) return;

  st.z(i0, t0) = s_new;
  --st.counts(z_old - 1, t0);
  ++st.counts(s_new - 1, t0);
  if (st.spatial()) {
    st.W[t0].col(z_old - 1) -= st.K.col(i0);
    st.W[t0].col(s_new - 1) += st.K.col(i0);
  }
}

void update_transitions(ChainState& st, Pcg32& rng) {
  Matrix n = Matrix::Zero(st.S, st.S);
  for (int t = 0; t + 1 < st.T; ++t)
    for (int i = 0; i < st.I; ++i) n(st.z(i, t + 1) - 1, st.z(i, t) - 1) += 1.0;
  for (int k = 0; k < st.S; ++k)
    st.P.col(k) = dirichlet_draw(rng, (n.col(k).array() + 1.0).matrix());
}

void update_phi(ChainState& st, Pcg32& rng) {
  Vector alpha = st.counts.col(0).cast<double>().array() + 1.0;
  st.phi = dirichlet_draw(rng, alpha);
}

void update_e(ChainState& st, const ObservationSet& data, Pcg32& rng) {
  double flagged = static_cast<double>(st.m_total);
  double clean = static_cast<double>(data.record_count()) - flagged;
  st.e = beta_draw(rng, 1.0 + flagged, 1.0 + clean);
}

void update_bandwidth(ChainState& st, const ObservationSet& data, Pcg32& rng) {
  (void)data;
  if (!st.spatial() || st.bw_frozen) return;
  const SiteFrame& frame = st.frame;
  auto holders = holder_lists(st);
  double cur_ll = flagged_loglik(st);

  auto proposal_loglik = [&](const Matrix& Kp, const Vector& Dp) {
    double ll = 0.0;
    for (int t = 0; t < st.T; ++t)
      for (int s = 0; s < st.S; ++s) {
        const auto& sites = st.err_sites[t][s];
        if (sites.empty()) continue;
        const auto& hold = holders[t][s];
        for (int j : sites) {
          double w = 0.0;
          for (int l : hold) w += Kp(l, j);  // symmetric, column access
          double x = w / Dp(j);
          if (!(x > 0.0)) return -kInf;
          ll += std::log(x);
        }
      }
    return ll;
  };

  auto attempt = [&](BandwidthMatrix prop, double log_jac, ProposalStep& step,
                     bool in_support) {
    ++step.counter.proposals;
    double alpha = 0.0;
    if (in_support) {
      Matrix Kp = kernel_matrix(frame, prop);
      Vector Dp = Kp.rowwise().sum();
      double prop_ll = proposal_loglik(Kp, Dp);
      double la;
      if (prop_ll == -kInf)
        la = -kInf;
      else if (cur_ll == -kInf)
        la = kInf;
      else
        la = prop_ll - cur_ll + log_jac;
      alpha = la >= 0.0 ? 1.0 : std::exp(la);
      if (la >= 0.0 || std::log(uniform01(rng)) < la) {
        st.bw = prop;
        st.K.swap(Kp);
        st.D.swap(Dp);
        for (int t = 0; t < st.T; ++t) {
          Matrix& Wt = st.W[t];
          Wt.setZero();
          for (int s = 0; s < st.S; ++s)
            for (int l : holders[t][s]) Wt.col(s) += st.K.col(l);
        }
        cur_ll = prop_ll == -kInf ? flagged_loglik(st) : prop_ll;
        ++step.counter.accepted;
      }
    }
    adapt_step(step, alpha, st.adapting, std::log(1e-4), std::log(4.0));
  };

  {
    double s1 = st.bw.sigma1 * std::exp(std::exp(st.step_sigma1.log_step) * normal01(rng));
    BandwidthMatrix prop = st.bw;
    prop.sigma1 = s1;
    bool ok = s1 >= kSigmaFloor && s1 <= st.sigma_upper;
    attempt(prop, std::log(s1) - std::log(st.bw.sigma1), st.step_sigma1, ok);
  }
  {
    double s2 = st.bw.sigma2 * std::exp(std::exp(st.step_sigma2.log_step) * normal01(rng));
    BandwidthMatrix prop = st.bw;
    prop.sigma2 = s2;
    bool ok = s2 >= kSigmaFloor && s2 <= st.sigma_upper;
    attempt(prop, std::log(s2) - std::log(st.bw.sigma2), st.step_sigma2, ok);
  }
  if (!st.fix_rho) {
    double rho = st.bw.rho + std::exp(st.step_rho.log_step) * uniform(rng, -1.0, 1.0);
    for (int k = 0; k < 64 && (rho > 1.0 || rho < -1.0); ++k)
      rho = rho > 1.0 ? 2.0 - rho : -2.0 - rho;
    BandwidthMatrix prop = st.bw;
    prop.rho = rho;
    bool ok = 1.0 - rho * rho >= kRhoSingularTol;
    attempt(prop, 0.0, st.step_rho, ok);
  }
}

void audit_chain_state(const ChainState& st, const ObservationSet& data,
                       double tol) {
  IntMatrix counts = IntMatrix::Zero(st.S, st.T);
  for (int t = 0; t < st.T; ++t)
    for (int i = 0; i < st.I; ++i) ++counts(st.z(i, t) - 1, t);
  if (counts != st.counts) throw std::logic_error("holder counts out of sync");

  std::int64_t m_total = 0;
  for (auto f : st.m) m_total += f;
  if (m_total != st.m_total) throw std::logic_error("flag total out of sync");

  std::vector<std::vector<int>> sizes(st.T, std::vector<int>(st.S, 0));
  for (int t = 1; t <= st.T; ++t)
    for (int i = 1; i <= st.I; ++i)
      for (std::int64_t r = data.begin(i, t); r < data.end(i, t); ++r)
        if (st.m[r]) ++sizes[t - 1][data.y[r] - 1];
  for (int t = 0; t < st.T; ++t)
    for (int s = 0; s < st.S; ++s)
      if (sizes[t][s] != static_cast<int>(st.err_sites[t][s].size()))
        throw std::logic_error("error index out of sync");

  if (st.spatial()) {
    Vector D = st.K.rowwise().sum();
    if ((D - st.D).cwiseAbs().maxCoeff() > tol)
      throw std::logic_error("row-sum cache out of sync");
    for (int t = 0; t < st.T; ++t) {
      Matrix Z = Matrix::Zero(st.I, st.S);
      for (int i = 0; i < st.I; ++i) Z(i, st.z(i, t) - 1) = 1.0;
      Matrix W = st.K * Z;
      double scale = std::max(1.0, W.cwiseAbs().maxCoeff());
      if ((W - st.W[t]).cwiseAbs().maxCoeff() > tol * scale)
        throw std::logic_error("weight cache out of sync at period " +
                               std::to_string(t + 1));
    }
  }
}

ChainDraws run_chain(const ObservationSet& data, const SiteFrame& frame,
                     const StateSpace& states, const FitConfig& cfg,
                     std::uint64_t chain_tag) {
  validate_fit_config(cfg);
  Pcg32 rng = substream(cfg.seed, chain_tag);
  ChainState st = init_chain(data, frame, states, cfg, rng);

  ChainDraws out;
  const int retained = cfg.iterations / cfg.thin;
  out.transition.reserve(retained);
  out.phi.reserve(retained);
  out.e.reserve(retained);
  if (st.spatial()) {
    out.sigma1.reserve(retained);
    out.sigma2.reserve(retained);
    out.rho.reserve(retained);
  }

  const int total = cfg.burn_in + cfg.iterations;
  for (int k = 0; k < total; ++k) {
    st.sweep = k;
    st.adapting = cfg.adapt_steps && k < cfg.burn_in;
    try {
      update_m(st, data, rng);
      for (int t = 1; t <= st.T; ++t)
        for (int i = 1; i <= st.I; ++i) update_z_site(st, data, i, t, rng);
      if (!st.P_frozen) update_transitions(st, rng);
      if (!st.phi_frozen) update_phi(st, rng);
      if (!st.e_frozen) update_e(st, data, rng);
      update_bandwidth(st, data, rng);
      if (cfg.audit_every > 0 && (k + 1) % cfg.audit_every == 0)
        audit_chain_state(st, data);
    } catch (const ModelError& err) {
      throw ModelError(err.code(),
                       "sweep " + std::to_string(k + 1) + ": " + err.what());
    }
    if (k >= cfg.burn_in && (k - cfg.burn_in + 1) % cfg.thin == 0) {
      out.transition.push_back(st.P);
      out.phi.push_back(st.phi);
      out.e.push_back(st.e);
      if (st.spatial()) {
        out.sigma1.push_back(st.bw.sigma1);
        out.sigma2.push_back(st.bw.sigma2);
        out.rho.push_back(st.bw.rho);
      }
      if (cfg.store_z) out.z.push_back(st.z);
    }
  }
  out.acceptance.sigma1 = st.step_sigma1.counter;
  out.acceptance.sigma2 = st.step_sigma2.counter;
  out.acceptance.rho = st.step_rho.counter;
  return out;
}

PosteriorDraws run_chains(const ObservationSet& data, const SiteFrame& frame,
                          const StateSpace& states, const FitConfig& cfg) {
  validate_fit_config(cfg);
  PosteriorDraws out;
  out.model = cfg.model;
  out.S = states.S;
  out.chains.resize(cfg.chains);
  std::vector<std::exception_ptr> errors(cfg.chains);

  auto work = [&](int c) {
    try {
      out.chains[c] = run_chain(data, frame, states, cfg,
                                kChainTagBase + static_cast<std::uint64_t>(c));
    } catch (...) {
      errors[c] = std::current_exception();
    }
  };

  bool parallel = cfg.parallel_chains && cfg.chains > 1 &&
                  std::thread::hardware_concurrency() > 1;
  if (parallel) {
    std::vector<std::thread> pool;
    pool.reserve(cfg.chains);
    for (int c = 0; c < cfg.chains; ++c) pool.emplace_back(work, c);
    for (auto& th : pool) th.join();
  } else {
    for (int c = 0; c < cfg.chains; ++c) work(c);
  }

  for (int c = 0; c < cfg.chains; ++c) {
    if (!errors[c]) continue;
    try {
      std::rethrow_exception(errors[c]);
    } catch (const ModelError& err) {
      throw ModelError(err.code(),
                       "chain " + std::to_string(c + 1) + ": " + err.what());
    } catch (const std::exception& err) {
      throw std::runtime_error("chain " + std::to_string(c + 1) + ": " + err.what());
    }
  }
  return out;
}

}  // namespace occmarkov
