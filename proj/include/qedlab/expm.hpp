#pragma once

#include <Eigen/Dense>

namespace qedlab {

// Spectral decomposition of a real 3x3 generator. `ok` is false when the
// eigenvalues are too close for the eigenvector basis to be trusted
// (relative gap below `gap_tol`); callers then fall back to
// scaling-and-squaring.
struct EigDecomp {
  bool ok = false;
  Eigen::Vector3cd eigenvalues;
  Eigen::Matrix3cd vectors;
  Eigen::Matrix3cd vectors_inv;
};

EigDecomp eig_decompose(const Eigen::Matrix3d& a, double gap_tol = 1e-8);

// exp(a) by scaling-and-squaring with a Taylor core. Accurate to ~1e-15
// for the generator norms seen here; used when the spectral route is
// unavailable.
Eigen::Matrix3d expm_taylor(const Eigen::Matrix3d& a);

// exp(a*t) through the decomposition (d.ok) or the Taylor fallback.
Eigen::Matrix3d expm_scaled(const Eigen::Matrix3d& a, const EigDecomp& d,
                            double t);

}  // namespace qedlab
