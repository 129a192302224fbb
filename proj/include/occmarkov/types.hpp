#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace occmarkov {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using IntMatrix = Eigen::MatrixXi;
using IntVector = Eigen::VectorXi;
using Coord = Eigen::RowVector2d;
using CoordTable = Eigen::Matrix<double, Eigen::Dynamic, 2>;

enum class Errc {
  NonStochastic,
  NegativeEntry,
  SingularBandwidth,
  DegenerateBandwidth,
  InvalidArgument,
  EmptyData,
  ZeroSupport,
  AllZeroWeights,
  ZeroLikelihoodData,
  DegenerateChains,
  NonConvergent,
  AbsorbingState,
  NoTransitions,
  ReplicatedData,
  ZeroSubdominant,
  ParseError,
  DuplicateRecord,
  UnknownSite,
  IoFailure,
};

const char* errc_name(Errc code);

// True for conditions caused by bad inputs rather than runtime state.
bool errc_is_validation(Errc code);

class ModelError : public std::runtime_error {
 public:
  ModelError(Errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] void fail(Errc code, const std::string& what);

struct StateSpace {
  int S = 0;
  std::vector<std::string> labels;

  const std::string& label(int s) const { return labels.at(s - 1); }
};

// Labels default to "1".."S" when none are given.
StateSpace make_state_space(int S, std::vector<std::string> labels = {});

struct SiteFrame {
  CoordTable coords;  // row i-1 holds the planar position of site i
  int duplicate_pairs = 0;

  int I() const { return static_cast<int>(coords.rows()); }
  Coord site(int i) const { return coords.row(i - 1); }
};

SiteFrame make_site_frame(CoordTable coords);

struct TransitionMatrix {
  Matrix p;  // p(j-1, k-1) = P(next = j | current = k); columns sum to one

  int S() const { return static_cast<int>(p.rows()); }
};

// Column-sum tolerance for stochastic-matrix validation.
inline constexpr double kColumnSumTol = 1e-12;

TransitionMatrix validate_transition_matrix(const Matrix& p);

struct InitialDistribution {
  Vector phi;

  int S() const { return static_cast<int>(phi.size()); }
};

InitialDistribution validate_initial_distribution(const Vector& phi);

// Smallest usable kernel scale; smaller values are rejected as degenerate.
inline constexpr double kSigmaFloor = 1e-6;
// Determinant floor below which the bandwidth matrix counts as singular.
inline constexpr double kRhoSingularTol = 1e-14;

struct BandwidthMatrix {
  double sigma1 = 1.0;
  double sigma2 = 1.0;
  double rho = 0.0;

  Eigen::Matrix2d matrix() const;
};

BandwidthMatrix validate_bandwidth(double sigma1, double sigma2, double rho);

struct OccupancyPanel {
  IntMatrix z;  // I x T, entries in 1..S

  int I() const { return static_cast<int>(z.rows()); }
  int T() const { return static_cast<int>(z.cols()); }
  int state(int i, int t) const { return z(i - 1, t - 1); }
};

OccupancyPanel validate_panel(IntMatrix z, int S);

// Replicated observations in compressed ragged form, cell-major with time
// outermost: records for cell (i, t) occupy [offset(i, t), offset(i, t) + n).
struct ObservationSet {
  int I = 0;
  int T = 0;
  int S = 0;
  std::vector<std::int64_t> offsets;     // I * T + 1 entries
  std::vector<int> y;                    // recorded states, 1..S
  std::vector<std::uint8_t> truth_m;     // simulation truth flags; may be empty

  std::int64_t cell(int i, int t) const {
    return static_cast<std::int64_t>(t - 1) * I + (i - 1);
  }
  std::int64_t begin(int i, int t) const { return offsets[cell(i, t)]; }
  std::int64_t end(int i, int t) const { return offsets[cell(i, t) + 1]; }
  int n(int i, int t) const { return static_cast<int>(end(i, t) - begin(i, t)); }
  std::int64_t record_count() const { return offsets.back(); }
  bool has_truth() const { return !truth_m.empty(); }
};

// Accumulates records in any order, then emits a validated ObservationSet.
class ObservationBuilder {
 public:
  ObservationBuilder(int I, int T, int S);
  void add(int i, int t, int y, std::optional<bool> err_flag = std::nullopt);
  ObservationSet build();

 private:
  int I_, T_, S_;
  std::vector<std::vector<int>> cells_;
  std::vector<std::vector<std::uint8_t>> flags_;
  bool any_flag_ = false;
};

ObservationSet validate_observation_set(ObservationSet data);

// Per-period dominance profiles: field[t-1] is I x S with rows on the simplex.
using DominanceField = std::vector<Matrix>;

}  // namespace occmarkov
