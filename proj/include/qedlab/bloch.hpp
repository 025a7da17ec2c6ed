#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "qedlab/exec.hpp"
#include "qedlab/expm.hpp"

namespace qedlab {

// Tolerance on the Bloch-vector norm: |sigma| may exceed 1 by at most this
// much before a state is rejected as unphysical.
inline constexpr double kBlochNormTol = 1e-9;

// Fitted decay rates come with experimental error bars, so gamma2 is
// allowed to undershoot the radiative limit gamma1/2 by this relative
// slack before validation rejects the pair.
inline constexpr double kRateSlack = 0.02;

struct AtomParams {
  double omega_a = 0;  // transition frequency, rad/s
  double gamma1 = 0;   // energy relaxation rate, rad/s
  double gamma2 = 0;   // total dephasing rate, rad/s
  double phi_p = 0;    // dipole transition matrix element, Wb
  double z_line = 0;   // transmission-line impedance, Ohm
  std::optional<double> persistent_current;  // A
  std::optional<double> mutual_inductance;   // H

  // gamma1 = gamma2 = 0 is allowed as a lossless test configuration.
  bool undamped() const { return gamma1 == 0.0 && gamma2 == 0.0; }

  double pure_dephasing() const { return gamma2 - gamma1 / 2.0; }

  // Norm band for states under this atom's evolution. Fitted rate pairs
  // with gamma2 a hair below gamma1/2 (negative pure dephasing within the
  // validation slack) are not strictly contractive at the south pole: the
  // growth rate of |sigma|^2 there is bounded by 2 g^2/(gamma1 - gamma2)
  // with g = -pure_dephasing(), acting for about 2/gamma1, so the ball
  // can be exceeded by that much and no more.
  double norm_tolerance() const;

  // Relaxation rate implied by the dipole coupling to the line,
  // omega_a * phi_p^2 / (hbar * Z); used by the consistency check.
  double predicted_gamma1() const;

  void validate() const;
};

struct DriveField {
  double rabi = 0;   // Rabi frequency, rad/s
  double phase = 0;  // drive phase, rad

  static double normalized_phase(double phi);

  void validate() const;
};

struct BlochVector {
  double sx = 0;
  double sy = 0;
  double sz = -1;

  double norm() const;
  // Output-side clamp: states inside the tolerance band are scaled back
  // onto the unit ball; raw values stay untouched internally.
  BlochVector clamped() const;
  void validate(double norm_tol = kBlochNormTol) const;
};

struct BlochTrajectory {
  std::vector<double> t_grid;        // s, strictly increasing
  std::vector<BlochVector> states;   // one per grid point
};

struct BlochGenerator {
  Eigen::Matrix3d b_matrix;
  Eigen::Vector3d b_vector;
};

// Drift matrix and inhomogeneity of d(sigma)/dt = B sigma + b for a
// resonant drive of given Rabi frequency and phase.
BlochGenerator build_bloch_generator(const AtomParams& atom,
                                     const DriveField& drive);

BlochVector steady_state(const AtomParams& atom, const DriveField& drive);

// Rotation of a Bloch vector about the z axis by `angle` (counterclockwise
// looking down the axis). Changing the drive phase is equivalent to
// conjugating the evolution with this rotation.
BlochVector rotate_z(const BlochVector& s, double angle);

// Precomputed propagator for one constant-drive segment. Construction
// factors the generator once; apply() then costs three complex
// exponentials per evaluation. The same decomposition feeds the analytic
// spectrum.
class Propagator {
 public:
  Propagator(const AtomParams& atom, const DriveField& drive);

  BlochVector apply(const BlochVector& state, double duration) const;
  Eigen::Vector3d apply(const Eigen::Vector3d& state, double duration) const;

  // exp(B t) acting on a complex vector; B is real so this is just the
  // real propagator applied to both parts. Used by the regression solver.
  Eigen::Vector3cd apply_homogeneous(const Eigen::Vector3cd& state,
                                     double duration) const;

  Eigen::Matrix3d exp_bt(double duration) const;

  const Eigen::Matrix3d& generator() const { return gen_.b_matrix; }
  const Eigen::Vector3d& inhomogeneity() const { return gen_.b_vector; }
  const EigDecomp& decomposition() const { return eig_; }
  bool damped() const { return damped_; }
  // Fixed point of the affine flow; only defined for damped atoms.
  const Eigen::Vector3d& steady() const;

 private:
  BlochGenerator gen_;
  EigDecomp eig_;
  bool damped_ = false;
  Eigen::Vector3d sigma_ss_ = Eigen::Vector3d::Zero();
};

BlochVector propagate_exact(const BlochVector& state, const AtomParams& atom,
                            const DriveField& drive, double duration);

// Step recommended for the fixed-step integrator: 1/800 of the fastest
// timescale. Classical RK4 at 50 steps per period leaves ~1e-5 phase error
// per Rabi cycle; 800 steps keeps the mismatch against the exact
// propagator below 1e-8 over the segment lengths used here.
double default_rk_step(const AtomParams& atom, const DriveField& drive);

BlochVector propagate_rk(const BlochVector& state, const AtomParams& atom,
                         const DriveField& drive, double duration, double dt);

// Samples the exact solution of one constant-drive segment on t_grid;
// states[i] corresponds to elapsed time t_grid[i] - t_grid[0].
BlochTrajectory trajectory(const BlochVector& state0, const AtomParams& atom,
                           const DriveField& drive,
                           const std::vector<double>& t_grid,
                           Exec exec = Exec::parallel);

}  // namespace qedlab
