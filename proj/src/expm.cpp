#include "qedlab/expm.hpp"

#include <cmath>

namespace qedlab {

EigDecomp eig_decompose(const Eigen::Matrix3d& a, double gap_tol) {
  EigDecomp d;
  Eigen::EigenSolver<Eigen::Matrix3d> solver(a, /*computeEigenvectors=*/true);
  if (solver.info() != Eigen::Success) {
    return d;
  }
  d.eigenvalues = solver.eigenvalues();
  d.vectors = solver.eigenvectors();

  double scale = 0.0;
  for (int i = 0; i < 3; ++i) {
    scale = std::max(scale, std::abs(d.eigenvalues(i)));
  }
  if (scale == 0.0) {
    return d;  // zero generator: exp is the identity, use the fallback
  }
  double min_gap = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 3; ++i) {
    for (int j = i + 1; j < 3; ++j) {
      min_gap =
          std::min(min_gap, std::abs(d.eigenvalues(i) - d.eigenvalues(j)));
    }
  }
  if (min_gap / scale < gap_tol) {
    return d;  // nearly defective basis, keep d.ok = false
  }

  Eigen::FullPivLU<Eigen::Matrix3cd> lu(d.vectors);
  if (!lu.isInvertible()) {
    return d;
  }
  d.vectors_inv = lu.inverse();
  d.ok = true;
  return d;
}

Eigen::Matrix3d expm_taylor(const Eigen::Matrix3d& a) {
  // Scale until the norm is small, run a 13-term Taylor series, square back.
  const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();  // inf-norm
  int squarings = 0;
  if (norm > 0.25) {
    squarings = static_cast<int>(std::ceil(std::log2(norm / 0.25)));
  }
  const Eigen::Matrix3d s = a / std::ldexp(1.0, squarings);

  Eigen::Matrix3d result = Eigen::Matrix3d::Identity();
  Eigen::Matrix3d term = Eigen::Matrix3d::Identity();
  for (int k = 1; k <= 13; ++k) {
    term = (term * s / static_cast<double>(k)).eval();
    result += term;
  }
  for (int k = 0; k < squarings; ++k) {
    result = (result * result).eval();
  }
  return result;
}

Eigen::Matrix3d expm_scaled(const Eigen::Matrix3d& a, const EigDecomp& d,
                            double t) {
  bool diagonal = true;
  for (int r = 0; r < 3 && diagonal; ++r) {
    for (int c = 0; c < 3; ++c) {
      if (r != c && a(r, c) != 0.0) {
        diagonal = false;
        break;
      }
    }
  }
  if (diagonal) {
    Eigen::Matrix3d e = Eigen::Matrix3d::Zero();
    for (int k = 0; k < 3; ++k) {
      e(k, k) = std::exp(a(k, k) * t);
    }
    return e;
  }
  if (!d.ok) {
    return expm_taylor(a * t);
  }
  Eigen::Vector3cd phases;
  for (int i = 0; i < 3; ++i) {
    phases(i) = std::exp(d.eigenvalues(i) * t);
  }
  const Eigen::Matrix3cd e =
      d.vectors * phases.asDiagonal() * d.vectors_inv;
  return e.real();
}

}  // namespace qedlab
