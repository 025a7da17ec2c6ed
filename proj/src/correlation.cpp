#include "qedlab/correlation.hpp"

#include <cmath>

#include "qedlab/errors.hpp"
#include "qedlab/pulses.hpp"
#include "qedlab/units.hpp"

namespace qedlab {

namespace {

void check_correlation_grid(const std::vector<double>& t_grid) {
  if (t_grid.empty()) {
    throw Error(ErrorKind::grid, "correlation: empty time grid");
  }
  if (t_grid.front() != 0.0) {
    throw Error(ErrorKind::grid, "correlation: grid must start at t = 0");
  }
  for (std::size_t i = 1; i < t_grid.size(); ++i) {
    if (!(t_grid[i] > t_grid[i - 1])) {
      throw Error(ErrorKind::grid,
                  "correlation: grid must increase strictly");
    }
  }
}

std::complex<double> compose(const Eigen::Vector3cd& s) {
  return 0.5 * (s(0) - std::complex<double>(0.0, 1.0) * s(1));
}

}  // namespace

Eigen::Vector3cd regression_initial_condition(const AtomParams& atom,
                                              const DriveField& drive,
                                              InitMode mode) {
  atom.validate();
  drive.validate();
  const std::complex<double> i1(0.0, 1.0);
  if (mode == InitMode::strong_drive) {
    return Eigen::Vector3cd(0.5, 0.5 * i1, 0.0);
  }
  const BlochVector ss = steady_state(atom, drive);
  const std::complex<double> sp = 0.5 * (ss.sx + i1 * ss.sy);  // <sigma+>
  Eigen::Vector3cd s0;
  s0(0) = 0.5 * (1.0 + ss.sz) - sp * ss.sx;
  s0(1) = i1 * 0.5 * (1.0 + ss.sz) - sp * ss.sy;
  s0(2) = -sp * (1.0 + ss.sz);
  return s0;
}

std::vector<double> default_correlation_grid(const AtomParams& atom,
                                             const DriveField& drive) {
  atom.validate();
  drive.validate();
  if (atom.undamped()) {
    throw Error(ErrorKind::degenerate_system,
                "correlation grid: lossless atom has no decay horizon");
  }
  double dt = 1.0 / atom.gamma2;
  if (drive.rabi > 0.0) {
    dt = std::min(dt, kTwoPi / drive.rabi);
  }
  dt /= 40.0;
  const double slowest =
      std::min(atom.gamma2, 0.5 * (atom.gamma1 + atom.gamma2));
  const double t_max = 14.0 / slowest;
  const auto n = static_cast<std::size_t>(std::ceil(t_max / dt)) + 1;
  std::vector<double> grid(n);
  for (std::size_t i = 0; i < n; ++i) {
    grid[i] = static_cast<double>(i) * dt;
  }
  return grid;
}

CorrelationTrace correlation_direct(const AtomParams& atom,
                                    const DriveField& drive,
                                    const std::vector<double>& t_grid,
                                    InitMode mode, Exec exec) {
  check_correlation_grid(t_grid);
  const Eigen::Vector3cd s0 = regression_initial_condition(atom, drive, mode);
  const Propagator prop(atom, drive);

  CorrelationTrace trace;
  trace.t_grid = t_grid;
  trace.values.resize(t_grid.size());
  parallel_for(static_cast<std::int64_t>(t_grid.size()), exec,
               [&](std::int64_t i) {
                 trace.values[i] =
                     compose(prop.apply_homogeneous(s0, t_grid[i]));
               });
  return trace;
}

DifferencingResult correlation_via_differencing(const AtomParams& atom,
                                                const DriveField& drive,
                                                const std::vector<double>& t_grid,
                                                PrepStyle style,
                                                double prep_phase_offset,
                                                Exec exec) {
  check_correlation_grid(t_grid);
  atom.validate();
  drive.validate();

  std::array<Eigen::Vector3d, 4> starts = {
      Eigen::Vector3d(1.0, 0.0, 0.0), Eigen::Vector3d(-1.0, 0.0, 0.0),
      Eigen::Vector3d(0.0, 1.0, 0.0), Eigen::Vector3d(0.0, -1.0, 0.0)};

  if (style == PrepStyle::pulsed) {
    // Ground state rotated onto (sin phi, cos phi, 0) by a pi/2 pulse of
    // phase phi; the four target axes need phi = pi/2, 3pi/2, 0, pi.
    const PulseCalibration cal = calibrate_pulses(atom, drive);
    const std::array<double, 4> phases = {0.25 * kTwoPi, 0.75 * kTwoPi, 0.0,
                                          0.5 * kTwoPi};
    for (int k = 0; k < 4; ++k) {
      const DriveField prep{
          drive.rabi,
          DriveField::normalized_phase(phases[k] + prep_phase_offset)};
      const BlochVector s = Propagator(atom, prep).apply(
          BlochVector{0.0, 0.0, -1.0}, cal.t_pi_2);
      starts[k] = Eigen::Vector3d(s.sx, s.sy, s.sz);
    }
  }

  const Propagator prop(atom, drive);
  const std::size_t n = t_grid.size();

  DifferencingResult result;
  result.corr.t_grid = t_grid;
  result.corr.values.resize(n);
  for (auto& traj : result.trajectories) {
    traj.t_grid = t_grid;
    traj.states.resize(n);
  }

  parallel_for(static_cast<std::int64_t>(n), exec, [&](std::int64_t i) {
    const double t = t_grid[i];
    std::array<Eigen::Vector3d, 4> evolved;
    for (int k = 0; k < 4; ++k) {
      evolved[k] = prop.apply(starts[k], t);
      result.trajectories[k].states[i] =
          BlochVector{evolved[k](0), evolved[k](1), evolved[k](2)};
    }
    const Eigen::Vector3d s1 = 0.5 * (evolved[0] - evolved[1]);
    const Eigen::Vector3d s2 = 0.5 * (evolved[2] - evolved[3]);
    const std::complex<double> i1(0.0, 1.0);
    result.corr.values[i] =
        0.25 * ((s1(0) - i1 * s1(1)) + i1 * (s2(0) - i1 * s2(1)));
  });
  return result;
}

}  // namespace qedlab
