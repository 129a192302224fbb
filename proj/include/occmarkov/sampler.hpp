#pragma once

#include "occmarkov/rng.hpp"
#include "occmarkov/types.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace occmarkov {

enum class ModelKind { nonspatial, spatial };

const char* model_name(ModelKind kind);

struct FitConfig {
  ModelKind model = ModelKind::spatial;
  int chains = 3;
  int iterations = 3000;  // post-burn-in sweeps, before thinning
  int burn_in = 3000;
  int thin = 3;
  std::uint64_t seed = 0;
  double sigma_upper = 20.0;  // upper bound of the uniform scale prior
  bool fix_rho_zero = false;
  std::optional<BandwidthMatrix> fixed_bandwidth;  // freeze the kernel
  std::optional<TransitionMatrix> fixed_transition;
  std::optional<Vector> fixed_phi;
  std::optional<double> fixed_e;
  bool adapt_steps = true;   // tune proposal scales during burn-in
  bool store_z = false;
  int audit_every = 0;  // sweeps between cache audits; 0 disables
  bool parallel_chains = true;
};

void validate_fit_config(const FitConfig& cfg);

struct AcceptanceCounter {
  std::int64_t proposals = 0;
  std::int64_t accepted = 0;

  double rate() const {
    return proposals > 0 ? static_cast<double>(accepted) / proposals : 0.0;
  }
};

struct ProposalStep {
  double log_step = 0.0;
  AcceptanceCounter counter;
};

// Full latent configuration of one chain plus the caches that make the
// sweep cheap: K and its row sums, per-period weighted state masses
// W[t](i, s) = sum_j K(i, j) 1(z_jt = s+1), integer holder counts, and an
// index of flagged records grouped by period and recorded state.
struct ChainState {
  ModelKind model = ModelKind::spatial;
  int I = 0, T = 0, S = 0;
  SiteFrame frame;

  IntMatrix z;                   // I x T latent states
  std::vector<std::uint8_t> m;   // per-record error flags, CSR-aligned
  Matrix P;                      // S x S, columns stochastic
  Vector phi;
  double e = 0.5;
  BandwidthMatrix bw;

  Matrix K;               // I x I kernel weights (spatial only)
  Vector D;               // row sums of K
  std::vector<Matrix> W;  // per period, I x S
  IntMatrix counts;       // S x T holder counts
  std::vector<std::vector<std::vector<int>>> err_sites;  // [t][s] -> site ids
  std::int64_t m_total = 0;
  Vector scratch_logw, scratch_w;  // reusable per-cell draw buffers

  double sigma_upper = 20.0;
  bool fix_rho = false;
  bool bw_frozen = false;
  bool P_frozen = false, phi_frozen = false, e_frozen = false;
  bool adapting = true;
  ProposalStep step_sigma1, step_sigma2, step_rho;
  std::int64_t sweep = 0;

  bool spatial() const { return model == ModelKind::spatial; }
  // Dominance of state s at cell (i, t) under the current configuration.
  double g(int i, int t, int s) const {
    if (spatial()) return W[t - 1](i - 1, s - 1) / D(i - 1);
    return static_cast<double>(counts(s - 1, t - 1)) / I;
  }
};

struct AcceptanceLog {
  AcceptanceCounter sigma1, sigma2, rho;
};

struct ChainDraws {
  std::vector<Matrix> transition;
  std::vector<Vector> phi;
  std::vector<double> e;
  std::vector<double> sigma1, sigma2, rho;  // empty for nonspatial fits
  std::vector<IntMatrix> z;                 // populated when store_z is set
  AcceptanceLog acceptance;

  int size() const { return static_cast<int>(e.size()); }
};

struct PosteriorDraws {
  ModelKind model = ModelKind::spatial;
  int S = 0;
  std::vector<ChainDraws> chains;

  int draws_per_chain() const {
    return chains.empty() ? 0 : chains.front().size();
  }
};

// Deterministic starting configuration: modal states with temporal fill-in,
// repaired so every recorded state keeps a holder in its period, flags set
// wherever the record disagrees, and parameters drawn from their priors.
ChainState init_chain(const ObservationSet& data, const SiteFrame& frame,
                      const StateSpace& states, const FitConfig& cfg, Pcg32& rng);

// Gibbs step for every record flag given the latent panel.
void update_m(ChainState& state, const ObservationSet& data, Pcg32& rng);

// Gibbs step for one cell of the latent panel. Cells carrying a clean record
// are pinned to it; free cells draw from prior, forward term, and the
// likelihood ratio over flagged records of the period.
void update_z_site(ChainState& state, const ObservationSet& data, int i, int t,
                   Pcg32& rng);

// Conjugate column-wise Dirichlet step for the transition matrix.
void update_transitions(ChainState& state, Pcg32& rng);

// Conjugate Dirichlet step for the initial distribution.
void update_phi(ChainState& state, Pcg32& rng);

// Conjugate Beta step for the resampling error rate.
void update_e(ChainState& state, const ObservationSet& data, Pcg32& rng);

// Metropolis scan over sigma1, sigma2, and rho: log-scale random walks with
// the matching Jacobian for the scales, a reflected walk for the
// correlation, and step sizes adapted toward 0.44 acceptance while burning
// in. No-op for nonspatial or frozen-kernel fits.
void update_bandwidth(ChainState& state, const ObservationSet& data, Pcg32& rng);

// Verify cached quantities against a from-scratch rebuild.
void audit_chain_state(const ChainState& state, const ObservationSet& data,
                       double tol = 1e-9);

// chain_seed selects the chain's substream of cfg.seed.
ChainDraws run_chain(const ObservationSet& data, const SiteFrame& frame,
                     const StateSpace& states, const FitConfig& cfg,
                     std::uint64_t chain_seed);

PosteriorDraws run_chains(const ObservationSet& data, const SiteFrame& frame,
                          const StateSpace& states, const FitConfig& cfg);

}  // namespace occmarkov
