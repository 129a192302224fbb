#include "occmarkov/types.hpp"

#include <cmath>
#include <set>
#include <utility>

namespace occmarkov {

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::NonStochastic: return "NonStochastic";
    case Errc::NegativeEntry: return "NegativeEntry";
    case Errc::SingularBandwidth: return "SingularBandwidth";
    case Errc::DegenerateBandwidth: return "DegenerateBandwidth";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::EmptyData: return "EmptyData";
    case Errc::ZeroSupport: return "ZeroSupport";
    case Errc::AllZeroWeights: return "AllZeroWeights";
    case Errc::ZeroLikelihoodData: return "ZeroLikelihoodData";
    case Errc::DegenerateChains: return "DegenerateChains";
    case Errc::NonConvergent: return "NonConvergent";
    case Errc::AbsorbingState: return "AbsorbingState";
    case Errc::NoTransitions: return "NoTransitions";
    case Errc::ReplicatedData: return "ReplicatedData";
    case Errc::ZeroSubdominant: return "ZeroSubdominant";
    case Errc::ParseError: return "ParseError";
    case Errc::DuplicateRecord: return "DuplicateRecord";
    case Errc::UnknownSite: return "UnknownSite";
    case Errc::IoFailure: return "IoFailure";
  }
  return "Unknown";
}

bool errc_is_validation(Errc code) {
  switch (code) {
    case Errc::NonStochastic:
    case Errc::NegativeEntry:
    case Errc::SingularBandwidth:
    case Errc::DegenerateBandwidth:
    case Errc::InvalidArgument:
    case Errc::EmptyData:
    case Errc::ZeroLikelihoodData:
    case Errc::ParseError:
    case Errc::DuplicateRecord:
    case Errc::UnknownSite:
    case Errc::ReplicatedData:
      return true;
    default:
      return false;
  }
}

void fail(Errc code, const std::string& what) {
  throw ModelError(code, std::string(errc_name(code)) + ": " + what);
}

StateSpace make_state_space(int S, std::vector<std::string> labels) {
  if (S < 2) fail(Errc::InvalidArgument, "state space needs at least two states");
  if (labels.empty()) {
    labels.reserve(S);
    for (int s = 1; s <= S; ++s) labels.push_back(std::to_string(s));
  }
  if (static_cast<int>(labels.size()) != S)
    fail(Errc::InvalidArgument, "label count does not match state count");
  std::set<std::string> seen(labels.begin(), labels.end());
  if (static_cast<int>(seen.size()) != S)
    fail(Errc::InvalidArgument, "state labels must be distinct");
  return StateSpace{S, std::move(labels)};
}

SiteFrame make_site_frame(CoordTable coords) {
  if (coords.rows() == 0) fail(Errc::EmptyData, "site frame has no sites");
  if (!coords.allFinite())
    fail(Errc::InvalidArgument, "site coordinates must be finite");
  SiteFrame frame;
  frame.coords = std::move(coords);
  std::set<std::pair<double, double>> seen;
  for (int i = 0; i < frame.coords.rows(); ++i) {
    auto key = std::make_pair(frame.coords(i, 0), frame.coords(i, 1));
    if (!seen.insert(key).second) ++frame.duplicate_pairs;
  }
  return frame;
}

TransitionMatrix validate_transition_matrix(const Matrix& p) {
  if (p.rows() < 2 || p.rows() != p.cols())
    fail(Errc::InvalidArgument, "transition matrix must be square with S >= 2");
  if (!p.allFinite())
    fail(Errc::NegativeEntry, "transition matrix has non-finite entries");
  if ((p.array() < 0.0).any())
    fail(Errc::NegativeEntry, "transition matrix has negative entries");
  for (int k = 0; k < p.cols(); ++k) {
    double sum = p.col(k).sum();
    if (std::abs(sum - 1.0) > kColumnSumTol)
      fail(Errc::NonStochastic,
           "column " + std::to_string(k + 1) + " sums to " + std::to_string(sum));
  }
  return TransitionMatrix{p};
}

InitialDistribution validate_initial_distribution(const Vector& phi) {
  if (phi.size() < 2)
    fail(Errc::InvalidArgument, "initial distribution needs at least two states");
  if (!phi.allFinite() || (phi.array() < 0.0).any())
    fail(Errc::NegativeEntry, "initial distribution has invalid entries");
  if (std::abs(phi.sum() - 1.0) > kColumnSumTol)
    fail(Errc::NonStochastic, "initial distribution sums to " + std::to_string(phi.sum()));
  return InitialDistribution{phi};
}

Eigen::Matrix2d BandwidthMatrix::matrix() const {
  Eigen::Matrix2d m;
  double off = rho * sigma1 * sigma2;
  m << sigma1 * sigma1, off, off, sigma2 * sigma2;
  return m;
}

BandwidthMatrix validate_bandwidth(double sigma1, double sigma2, double rho) {
  if (!std::isfinite(sigma1) || !std::isfinite(sigma2) || !std::isfinite(rho))
    fail(Errc::InvalidArgument, "bandwidth parameters must be finite");
  if (sigma1 < kSigmaFloor || sigma2 < kSigmaFloor)
    fail(Errc::DegenerateBandwidth, "kernel scales must be at least " +
                                        std::to_string(kSigmaFloor));
  if (1.0 - rho * rho < kRhoSingularTol)
    fail(Errc::SingularBandwidth, "|rho| too close to one");
  return BandwidthMatrix{sigma1, sigma2, rho};
}

OccupancyPanel validate_panel(IntMatrix z, int S) {
  if (z.rows() == 0 || z.cols() == 0) fail(Errc::EmptyData, "occupancy panel is empty");
  if (S < 2) fail(Errc::InvalidArgument, "state count must be at least two");
  if ((z.array() < 1).any() || (z.array() > S).any())
    fail(Errc::InvalidArgument, "panel states must lie in 1..S");
  return OccupancyPanel{std::move(z)};
}

ObservationBuilder::ObservationBuilder(int I, int T, int S) : I_(I), T_(T), S_(S) {
  if (I < 1 || T < 1) fail(Errc::InvalidArgument, "observation set needs I >= 1, T >= 1");
  if (S < 2) fail(Errc::InvalidArgument, "state count must be at least two");
  cells_.resize(static_cast<std::size_t>(I) * T);
  flags_.resize(cells_.size());
}

void ObservationBuilder::add(int i, int t, int y, std::optional<bool> err_flag) {
  if (i < 1 || i > I_) fail(Errc::UnknownSite, "site index " + std::to_string(i));
  if (t < 1 || t > T_) fail(Errc::InvalidArgument, "period index " + std::to_string(t));
  if (y < 1 || y > S_)
    fail(Errc::InvalidArgument, "recorded state " + std::to_string(y) + " outside 1.." +
                                    std::to_string(S_));
  auto cell = static_cast<std::size_t>(t - 1) * I_ + (i - 1);
  cells_[cell].push_back(y);
  flags_[cell].push_back(err_flag.value_or(false) ? 1 : 0);
  if (err_flag) any_flag_ = true;
}

ObservationSet ObservationBuilder::build() {
  ObservationSet out;
  out.I = I_;
  out.T = T_;
  out.S = S_;
  out.offsets.resize(cells_.size() + 1, 0);
  std::int64_t total = 0;
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    out.offsets[c] = total;
    total += static_cast<std::int64_t>(cells_[c].size());
  }
  out.offsets[cells_.size()] = total;
  if (total == 0) fail(Errc::EmptyData, "observation set has no records");
  out.y.reserve(total);
  if (any_flag_) out.truth_m.reserve(total);
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    out.y.insert(out.y.end(), cells_[c].begin(), cells_[c].end());
    if (any_flag_)
      out.truth_m.insert(out.truth_m.end(), flags_[c].begin(), flags_[c].end());
  }
  return out;
}

ObservationSet validate_observation_set(ObservationSet data) {
  if (data.I < 1 || data.T < 1 || data.S < 2)
    fail(Errc::InvalidArgument, "observation set has invalid dimensions");
  auto cells = static_cast<std::size_t>(data.I) * data.T;
  if (data.offsets.size() != cells + 1)
    fail(Errc::InvalidArgument, "offset table has wrong length");
  if (data.offsets.front() != 0)
    fail(Errc::InvalidArgument, "offset table must start at zero");
  for (std::size_t c = 0; c < cells; ++c)
    if (data.offsets[c + 1] < data.offsets[c])
      fail(Errc::InvalidArgument, "offset table must be nondecreasing");
  if (data.offsets.back() != static_cast<std::int64_t>(data.y.size()))
    fail(Errc::InvalidArgument, "record storage does not match offsets");
  if (data.record_count() == 0) fail(Errc::EmptyData, "observation set has no records");
  for (int v : data.y)
    if (v < 1 || v > data.S)
      fail(Errc::InvalidArgument, "recorded state " + std::to_string(v) + " outside 1.." +
                                      std::to_string(data.S));
  if (!data.truth_m.empty() && data.truth_m.size() != data.y.size())
    fail(Errc::InvalidArgument, "truth flags do not match records");
  return data;
}

}  // namespace occmarkov
