#include "occmarkov/simulate.hpp"

#include "occmarkov/kernel.hpp"

#include <string>

namespace occmarkov {

namespace {

constexpr std::uint64_t kReplicateTagBase = 0x5a0000000000ULL;
constexpr std::uint64_t kBatchTruthTag = 0x5b0000000000ULL;

}  // namespace

TransitionMatrix draw_transition(int S, Pcg32& rng) {
  if (S < 2) fail(Errc::InvalidArgument, "state count must be at least two");
  Matrix P(S, S);
  Vector alpha = Vector::Ones(S);
  for (int k = 0; k < S; ++k) P.col(k) = dirichlet_draw(rng, alpha);
  return validate_transition_matrix(P);
}

void validate_scenario(const SimulationScenario& sc) {
  if (sc.frame.I() == 0) fail(Errc::EmptyData, "scenario has no sites");
  if (sc.states.S < 2) fail(Errc::InvalidArgument, "scenario needs at least two states");
  if (sc.horizon < 1) fail(Errc::InvalidArgument, "scenario horizon must be positive");
  if (sc.phi.S() != sc.states.S)
    fail(Errc::InvalidArgument, "initial distribution does not match state count");
  validate_initial_distribution(sc.phi.phi);
  if (sc.transition) {
    if (sc.transition->S() != sc.states.S)
      fail(Errc::InvalidArgument, "transition matrix does not match state count");
    validate_transition_matrix(sc.transition->p);
  }
  if (!(sc.error_rate >= 0.0) || !(sc.error_rate <= 1.0))
    fail(Errc::InvalidArgument, "error rate must lie in [0, 1]");
  validate_bandwidth(sc.bandwidth.sigma1, sc.bandwidth.sigma2, sc.bandwidth.rho);
  if (sc.replicates.table) {
    const auto& tab = *sc.replicates.table;
    if (tab.rows() != sc.frame.I() || tab.cols() != sc.horizon)
      fail(Errc::InvalidArgument, "replicate table does not match frame and horizon");
    if ((tab.array() < 0).any())
      fail(Errc::InvalidArgument, "replicate counts must be nonnegative");
  } else if (sc.replicates.constant < 0) {
    fail(Errc::InvalidArgument, "replicate count must be nonnegative");
  }
}

SiteFrame make_grid(int rows, int cols) {
  if (rows < 1 || cols < 1)
    fail(Errc::InvalidArgument, "grid dimensions must be positive");
  CoordTable coords(static_cast<Eigen::Index>(rows) * cols, 2);
  int i = 0;
  for (int r = 1; r <= rows; ++r)
    for (int c = 1; c <= cols; ++c, ++i) {
      coords(i, 0) = static_cast<double>(c);
      coords(i, 1) = static_cast<double>(r);
    }
  return make_site_frame(std::move(coords));
}

OccupancyPanel simulate_occupancy(const SimulationScenario& sc, Pcg32& rng) {
  validate_scenario(sc);
  if (!sc.transition)
    fail(Errc::InvalidArgument, "scenario transition matrix is unresolved");
  const Matrix& P = sc.transition->p;
  const int I = sc.frame.I();
  const int T = sc.horizon;
  IntMatrix z(I, T);
  for (int i = 0; i < I; ++i) z(i, 0) = draw_state(rng, sc.phi.phi);
  for (int t = 1; t < T; ++t)
    for (int i = 0; i < I; ++i) z(i, t) = draw_state(rng, P.col(z(i, t - 1) - 1));
  return validate_panel(std::move(z), sc.states.S);
}

ObservationSet simulate_observations(const OccupancyPanel& panel,
                                     const SimulationScenario& sc, Pcg32& rng) {
  validate_scenario(sc);
  if (panel.I() != sc.frame.I() || panel.T() != sc.horizon)
    fail(Errc::InvalidArgument, "panel does not match scenario dimensions");
  const int I = panel.I();
  const int T = panel.T();
  const int S = sc.states.S;
  Matrix K = kernel_matrix(sc.frame, sc.bandwidth);
  ObservationBuilder builder(I, T, S);
  for (int t = 1; t <= T; ++t) {
    Matrix g = local_dominance(panel.z.col(t - 1), K, S);
    for (int i = 1; i <= I; ++i) {
      int n = sc.replicates.n(i, t);
      for (int k = 0; k < n; ++k) {
        bool err = bernoulli(rng, sc.error_rate);
        int y = err ? draw_state(rng, g.row(i - 1)) : panel.state(i, t);
        builder.add(i, t, y, err);
      }
    }
  }
  return builder.build();
}

SimulatedDataset simulate_dataset(const SimulationScenario& sc, int replicate) {
  validate_scenario(sc);
  if (replicate < 0) fail(Errc::InvalidArgument, "replicate index must be nonnegative");
  Pcg32 rng = substream(sc.seed, kReplicateTagBase + static_cast<std::uint64_t>(replicate));
  SimulatedDataset out;
  out.replicate = replicate;
  out.scenario = sc;
  if (!out.scenario.transition)
    out.scenario.transition = draw_transition(sc.states.S, rng);
  out.panel = simulate_occupancy(out.scenario, rng);
  out.observations = simulate_observations(out.panel, out.scenario, rng);
  return out;
}

std::vector<SimulatedDataset> run_scenario_batch(const SimulationScenario& sc,
                                                 int n_replicates) {
  validate_scenario(sc);
  if (n_replicates < 1)
    fail(Errc::InvalidArgument, "batch needs at least one replicate");
  SimulationScenario resolved = sc;
  if (!resolved.transition) {
    Pcg32 rng = substream(sc.seed, kBatchTruthTag);
    resolved.transition = draw_transition(sc.states.S, rng);
  }
  std::vector<SimulatedDataset> out;
  out.reserve(n_replicates);
  for (int r = 0; r < n_replicates; ++r) out.push_back(simulate_dataset(resolved, r));
  return out;
}

}  // namespace occmarkov
