#include "qedlab/bloch.hpp"

#include <cmath>

#include "qedlab/errors.hpp"
#include "qedlab/units.hpp"

namespace qedlab {

namespace {

Eigen::Vector3d to_eigen(const BlochVector& s) {
  return Eigen::Vector3d(s.sx, s.sy, s.sz);
}

BlochVector from_eigen(const Eigen::Vector3d& v) {
  return BlochVector{v(0), v(1), v(2)};
}

}  // namespace

double AtomParams::predicted_gamma1() const {
  return omega_a * phi_p * phi_p / (kHBar * z_line);
}

double AtomParams::norm_tolerance() const {
  const double g = -pure_dephasing();
  if (!(g > 0.0) || !(gamma1 > gamma2)) {
    return kBlochNormTol;
  }
  return kBlochNormTol + 4.0 * g * g / ((gamma1 - gamma2) * gamma1);
}

void AtomParams::validate() const {
  if (!(omega_a > 0.0)) {
    throw Error(ErrorKind::parameter, "atom: omega_a must be positive");
  }
  if (!(z_line > 0.0)) {
    throw Error(ErrorKind::parameter, "atom: z_line must be positive");
  }
  if (gamma1 < 0.0 || gamma2 < 0.0) {
    throw Error(ErrorKind::parameter, "atom: decay rates must be nonnegative");
  }
  if (!undamped()) {
    if (!(gamma1 > 0.0)) {
      throw Error(ErrorKind::parameter,
                  "atom: gamma1 must be positive (or both rates zero)");
    }
    if (gamma2 < 0.5 * gamma1 * (1.0 - kRateSlack)) {
      throw Error(ErrorKind::parameter,
                  "atom: gamma2 below the radiative limit gamma1/2");
    }
  }
  if (persistent_current && mutual_inductance) {
    const double expected = *persistent_current * *mutual_inductance;
    if (std::abs(phi_p - expected) > 1e-12 * std::abs(expected)) {
      throw Error(ErrorKind::parameter,
                  "atom: phi_p inconsistent with M * Ip");
    }
  }
}

double DriveField::normalized_phase(double phi) {
  double p = std::fmod(phi, kTwoPi);
  if (p < 0.0) {
    p += kTwoPi;
  }
  return p;
}

void DriveField::validate() const {
  if (!(rabi >= 0.0)) {
    throw Error(ErrorKind::parameter, "drive: rabi must be nonnegative");
  }
  if (!std::isfinite(phase)) {
    throw Error(ErrorKind::parameter, "drive: phase must be finite");
  }
}

double BlochVector::norm() const {
  return std::sqrt(sx * sx + sy * sy + sz * sz);
}

BlochVector BlochVector::clamped() const {
  const double n = norm();
  if (n <= 1.0) {
    return *this;
  }
  return BlochVector{sx / n, sy / n, sz / n};
}

void BlochVector::validate(double norm_tol) const {
  if (!std::isfinite(sx) || !std::isfinite(sy) || !std::isfinite(sz)) {
    throw Error(ErrorKind::parameter, "bloch vector: non-finite component");
  }
  if (norm() > 1.0 + norm_tol) {
    throw Error(ErrorKind::parameter,
                "bloch vector: norm exceeds 1 beyond tolerance");
  }
}

BlochGenerator build_bloch_generator(const AtomParams& atom,
                                     const DriveField& drive) {
  atom.validate();
  drive.validate();
  const double s = std::sin(drive.phase);
  const double c = std::cos(drive.phase);
  BlochGenerator g;
  g.b_matrix << -atom.gamma2, 0.0, -drive.rabi * s,
      0.0, -atom.gamma2, -drive.rabi * c,
      drive.rabi * s, drive.rabi * c, -atom.gamma1;
  g.b_vector = Eigen::Vector3d(0.0, 0.0, -atom.gamma1);
  return g;
}

BlochVector steady_state(const AtomParams& atom, const DriveField& drive) {
  const BlochGenerator g = build_bloch_generator(atom, drive);
  if (atom.undamped()) {
    throw Error(ErrorKind::degenerate_system,
                "steady state undefined for a lossless atom");
  }
  const Eigen::Vector3d ss = g.b_matrix.partialPivLu().solve(-g.b_vector);
  return from_eigen(ss);
}

BlochVector rotate_z(const BlochVector& s, double angle) {
  const double c = std::cos(angle);
  const double sn = std::sin(angle);
  return BlochVector{c * s.sx - sn * s.sy, sn * s.sx + c * s.sy, s.sz};
}

Propagator::Propagator(const AtomParams& atom, const DriveField& drive)
    : gen_(build_bloch_generator(atom, drive)) {
  eig_ = eig_decompose(gen_.b_matrix);
  damped_ = !atom.undamped();
  if (damped_) {
    sigma_ss_ = gen_.b_matrix.partialPivLu().solve(-gen_.b_vector);
  }
}

const Eigen::Vector3d& Propagator::steady() const {
  if (!damped_) {
    throw Error(ErrorKind::degenerate_system,
                "steady state undefined for a lossless atom");
  }
  return sigma_ss_;
}

Eigen::Matrix3d Propagator::exp_bt(double duration) const {
  return expm_scaled(gen_.b_matrix, eig_, duration);
}

Eigen::Vector3d Propagator::apply(const Eigen::Vector3d& state,
                                  double duration) const {
  if (duration == 0.0) {
    return state;
  }
  const Eigen::Matrix3d e = exp_bt(duration);
  if (!damped_) {
    return e * state;  // b vanishes with the rates
  }
  return sigma_ss_ + e * (state - sigma_ss_);
}

BlochVector Propagator::apply(const BlochVector& state,
                              double duration) const {
  return from_eigen(apply(to_eigen(state), duration));
}

Eigen::Vector3cd Propagator::apply_homogeneous(const Eigen::Vector3cd& state,
                                               double duration) const {
  const Eigen::Matrix3d e = exp_bt(duration);
  return e * state.real() +
         std::complex<double>(0.0, 1.0) * (e * state.imag());
}

BlochVector propagate_exact(const BlochVector& state, const AtomParams& atom,
                            const DriveField& drive, double duration) {
  if (duration < 0.0) {
    throw Error(ErrorKind::parameter, "propagate: duration must be >= 0");
  }
  state.validate(atom.norm_tolerance());
  return Propagator(atom, drive).apply(state, duration);
}

double default_rk_step(const AtomParams& atom, const DriveField& drive) {
  double fastest = std::numeric_limits<double>::infinity();
  if (drive.rabi > 0.0) {
    fastest = std::min(fastest, kTwoPi / drive.rabi);
  }
  if (atom.gamma2 > 0.0) {
    fastest = std::min(fastest, 1.0 / atom.gamma2);
  }
  if (atom.gamma1 > 0.0) {
    fastest = std::min(fastest, 1.0 / atom.gamma1);
  }
  if (!std::isfinite(fastest)) {
    return 1e-9;  // no dynamics at all; any step works
  }
  return fastest / 800.0;
}

BlochVector propagate_rk(const BlochVector& state, const AtomParams& atom,
                         const DriveField& drive, double duration, double dt) {
  if (!(dt > 0.0)) {
    throw Error(ErrorKind::parameter, "propagate_rk: dt must be positive");
  }
  if (duration < 0.0) {
    throw Error(ErrorKind::parameter, "propagate_rk: duration must be >= 0");
  }
  state.validate(atom.norm_tolerance());
  const BlochGenerator g = build_bloch_generator(atom, drive);
  if (duration == 0.0) {
    return state;
  }

  // Cap the user step at 2% of the fastest timescale.
  double cap = std::numeric_limits<double>::infinity();
  if (drive.rabi > 0.0) {
    cap = std::min(cap, 0.02 * kTwoPi / drive.rabi);
  }
  if (atom.gamma2 > 0.0) {
    cap = std::min(cap, 0.02 / atom.gamma2);
  }
  dt = std::min({dt, cap, duration});

  const auto n_steps = static_cast<long long>(std::ceil(duration / dt));
  const double h = duration / static_cast<double>(n_steps);

  Eigen::Vector3d y = to_eigen(state);
  const Eigen::Matrix3d& b = g.b_matrix;
  const Eigen::Vector3d& c = g.b_vector;
  for (long long i = 0; i < n_steps; ++i) {
    const Eigen::Vector3d k1 = b * y + c;
    const Eigen::Vector3d k2 = b * (y + 0.5 * h * k1) + c;
    const Eigen::Vector3d k3 = b * (y + 0.5 * h * k2) + c;
    const Eigen::Vector3d k4 = b * (y + h * k3) + c;
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return from_eigen(y);
}

BlochTrajectory trajectory(const BlochVector& state0, const AtomParams& atom,
                           const DriveField& drive,
                           const std::vector<double>& t_grid, Exec exec) {
  if (t_grid.empty()) {
    throw Error(ErrorKind::grid, "trajectory: empty time grid");
  }
  for (std::size_t i = 1; i < t_grid.size(); ++i) {
    if (!(t_grid[i] > t_grid[i - 1])) {
      throw Error(ErrorKind::grid, "trajectory: grid must increase strictly");
    }
  }
  state0.validate(atom.norm_tolerance());

  const Propagator prop(atom, drive);
  BlochTrajectory traj;
  traj.t_grid = t_grid;
  traj.states.resize(t_grid.size());
  const double t0 = t_grid.front();
  parallel_for(static_cast<std::int64_t>(t_grid.size()), exec,
               [&](std::int64_t i) {
                 traj.states[i] = prop.apply(state0, t_grid[i] - t0);
               });
  return traj;
}

}  // namespace qedlab
