#pragma once

#include "occmarkov/types.hpp"

namespace occmarkov {

// Quadratic form d' Sigma^{-1} d for a planar displacement d, expanded in
// closed form so no 2x2 inverse is materialised.
template <typename Scalar>
Scalar kernel_exponent(Scalar dx1, Scalar dx2, Scalar sigma1, Scalar sigma2,
                       Scalar rho) {
  Scalar a = dx1 / sigma1;
  Scalar b = dx2 / sigma2;
  return (a * a - Scalar(2) * rho * a * b + b * b) / (Scalar(1) - rho * rho);
}

// Unnormalised Gaussian weight exp(-q/2) between two sites.
double kernel_weight(const Coord& xi, const Coord& xj, const BandwidthMatrix& bw);

// Dense I x I weight matrix over a site frame; symmetric with unit diagonal.
Matrix kernel_matrix(const SiteFrame& frame, const BandwidthMatrix& bw);

// Kernel-smoothed state profile for one period: row i gives the weighted
// frequency of each state around site i. Rows sum to one.
Matrix local_dominance(const IntVector& z_t, const Matrix& K, int S);

// Unweighted state frequencies for one period.
Vector global_dominance(const IntVector& z_t, int S);

// local_dominance applied across all periods of a panel.
DominanceField dominance_field(const OccupancyPanel& panel, const Matrix& K, int S);

// dominance_field counterpart built from global frequencies; every site in a
// period shares the same profile.
DominanceField dominance_field_global(const OccupancyPanel& panel, int S);

}  // namespace occmarkov
