#pragma once

#include "occmarkov/rng.hpp"
#include "occmarkov/types.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace occmarkov {

// Sampling effort per cell: a constant count, or an explicit I x T table.
struct ReplicateTable {
  int constant = 1;
  std::optional<IntMatrix> table;

  int n(int i, int t) const {
    return table ? (*table)(i - 1, t - 1) : constant;
  }
};

struct SimulationScenario {
  SiteFrame frame;
  StateSpace states;
  int horizon = 1;  // number of periods T
  InitialDistribution phi;
  std::optional<TransitionMatrix> transition;  // absent: drawn per replicate
  double error_rate = 0.0;
  BandwidthMatrix bandwidth;  // governs the dominance field behind errors
  ReplicateTable replicates;
  std::uint64_t seed = 0;
};

void validate_scenario(const SimulationScenario& sc);

struct SimulatedDataset {
  int replicate = 0;
  OccupancyPanel panel;
  ObservationSet observations;  // truth flags populated
  SimulationScenario scenario;  // echo with the realised transition truth

  const TransitionMatrix& transition() const { return *scenario.transition; }
};

// Row-major rectangular lattice with unit spacing: site 1 at (1, 1), the
// first coordinate advancing fastest, ending at (cols, rows).
SiteFrame make_grid(int rows, int cols);

// Latent panel: period 1 from phi, later periods from the transition columns.
// The scenario's transition matrix must be resolved.
OccupancyPanel simulate_occupancy(const SimulationScenario& sc, Pcg32& rng);

// Replicated records over a panel: each record errs with probability
// error_rate, in which case the recorded state is drawn from the local
// dominance profile of its cell; otherwise it copies the latent state.
ObservationSet simulate_observations(const OccupancyPanel& panel,
                                     const SimulationScenario& sc, Pcg32& rng);

// One full replicate on its own substream; the scenario transition is used
// when present, otherwise a uniform-Dirichlet draw realises the truth.
SimulatedDataset simulate_dataset(const SimulationScenario& sc, int replicate);

// When the scenario transition is absent, one batch-level truth is drawn
// from uniform-Dirichlet columns and shared by every replicate.
std::vector<SimulatedDataset> run_scenario_batch(const SimulationScenario& sc,
                                                 int n_replicates);

// Uniform-Dirichlet column draw used for batch truths.
TransitionMatrix draw_transition(int S, Pcg32& rng);

}  // namespace occmarkov
