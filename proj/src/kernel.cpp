#include "occmarkov/kernel.hpp"

#include <cmath>
#include <cstdint>

namespace occmarkov {

namespace {

// Integer-lattice frames admit a shared table of weights per displacement,
// which keeps repeated kernel evaluation cheap on gridded designs.
struct LatticeLayout {
  bool usable = false;
  std::int64_t lo1 = 0, hi1 = 0, lo2 = 0, hi2 = 0;
};

LatticeLayout detect_lattice(const CoordTable& coords) {
  LatticeLayout lay;
  constexpr double kMaxAbs = 1e9;
  for (int i = 0; i < coords.rows(); ++i) {
    for (int c = 0; c < 2; ++c) {
      double v = coords(i, c);
      if (std::abs(v) > kMaxAbs || v != std::floor(v)) return lay;
    }
  }
  lay.lo1 = static_cast<std::int64_t>(coords.col(0).minCoeff());
  lay.hi1 = static_cast<std::int64_t>(coords.col(0).maxCoeff());
  lay.lo2 = static_cast<std::int64_t>(coords.col(1).minCoeff());
  lay.hi2 = static_cast<std::int64_t>(coords.col(1).maxCoeff());
  std::int64_t cells = (2 * (lay.hi1 - lay.lo1) + 1) * (2 * (lay.hi2 - lay.lo2) + 1);
  std::int64_t pairs = coords.rows() * coords.rows();
  lay.usable = cells <= pairs * 4 && cells <= (1 << 24);
  return lay;
}

}  // namespace

double kernel_weight(const Coord& xi, const Coord& xj, const BandwidthMatrix& bw) {
  validate_bandwidth(bw.sigma1, bw.sigma2, bw.rho);
  double q = kernel_exponent(xi(0) - xj(0), xi(1) - xj(1), bw.sigma1, bw.sigma2,
                             bw.rho);
  return std::exp(-0.5 * q);
}

Matrix kernel_matrix(const SiteFrame& frame, const BandwidthMatrix& bw) {
  validate_bandwidth(bw.sigma1, bw.sigma2, bw.rho);
  const int I = frame.I();
  Matrix K(I, I);
  const auto& X = frame.coords;
  LatticeLayout lay = detect_lattice(X);
  if (lay.usable) {
    const std::int64_t span1 = lay.hi1 - lay.lo1;
    const std::int64_t span2 = lay.hi2 - lay.lo2;
    Matrix table(2 * span1 + 1, 2 * span2 + 1);
    for (std::int64_t d1 = -span1; d1 <= span1; ++d1)
      for (std::int64_t d2 = -span2; d2 <= span2; ++d2) {
        double q = kernel_exponent(static_cast<double>(d1), static_cast<double>(d2),
                                   bw.sigma1, bw.sigma2, bw.rho);
        table(d1 + span1, d2 + span2) = std::exp(-0.5 * q);
      }
    for (int j = 0; j < I; ++j) {
      std::int64_t xj1 = static_cast<std::int64_t>(X(j, 0));
      std::int64_t xj2 = static_cast<std::int64_t>(X(j, 1));
      for (int i = 0; i < I; ++i) {
        std::int64_t d1 = static_cast<std::int64_t>(X(i, 0)) - xj1;
        std::int64_t d2 = static_cast<std::int64_t>(X(i, 1)) - xj2;
        K(i, j) = table(d1 + span1, d2 + span2);
      }
    }
    return K;
  }
  for (int j = 0; j < I; ++j) {
    K(j, j) = 1.0;
    for (int i = j + 1; i < I; ++i) {
      double q = kernel_exponent(X(i, 0) - X(j, 0), X(i, 1) - X(j, 1), bw.sigma1,
                                 bw.sigma2, bw.rho);
      double w = std::exp(-0.5 * q);
      K(i, j) = w;
      K(j, i) = w;
    }
  }
  return K;
}

Matrix local_dominance(const IntVector& z_t, const Matrix& K, int S) {
  const int I = static_cast<int>(z_t.size());
  if (I == 0) fail(Errc::EmptyData, "state vector is empty");
  if (K.rows() != I || K.cols() != I)
    fail(Errc::InvalidArgument, "weight matrix does not match site count");
  if (S < 2) fail(Errc::InvalidArgument, "state count must be at least two");
  if ((z_t.array() < 1).any() || (z_t.array() > S).any())
    fail(Errc::InvalidArgument, "states must lie in 1..S");
  Matrix Z = Matrix::Zero(I, S);
  for (int i = 0; i < I; ++i) Z(i, z_t(i) - 1) = 1.0;
  Matrix G = K * Z;
  Vector D = G.rowwise().sum();
  for (int i = 0; i < I; ++i) {
    if (!(D(i) > 0.0))
      fail(Errc::AllZeroWeights, "site " + std::to_string(i + 1) +
                                     " has zero total weight");
    G.row(i) /= D(i);
  }
  return G;
}

Vector global_dominance(const IntVector& z_t, int S) {
  const int I = static_cast<int>(z_t.size());
  if (I == 0) fail(Errc::EmptyData, "state vector is empty");
  if (S < 2) fail(Errc::InvalidArgument, "state count must be at least two");
  if ((z_t.array() < 1).any() || (z_t.array() > S).any())
    fail(Errc::InvalidArgument, "states must lie in 1..S");
  Vector f = Vector::Zero(S);
  for (int i = 0; i < I; ++i) f(z_t(i) - 1) += 1.0;
  return f / static_cast<double>(I);
}

DominanceField dominance_field(const OccupancyPanel& panel, const Matrix& K, int S) {
  DominanceField field;
  field.reserve(panel.T());
  for (int t = 0; t < panel.T(); ++t)
    field.push_back(local_dominance(panel.z.col(t), K, S));
  return field;
}

DominanceField dominance_field_global(const OccupancyPanel& panel, int S) {
  DominanceField field;
  field.reserve(panel.T());
  for (int t = 0; t < panel.T(); ++t) {
    Vector f = global_dominance(panel.z.col(t), S);
    field.push_back(f.transpose().replicate(panel.I(), 1));
  }
  return field;
}

}  // namespace occmarkov
