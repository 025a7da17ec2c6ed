#include "qedlab/pulses.hpp"

#include <algorithm>
#include <cmath>

#include "qedlab/errors.hpp"
#include "qedlab/units.hpp"

namespace qedlab {

namespace {

constexpr double kBisectTol = 1e-13;  // s (1e-4 ns)

const BlochVector kGround{0.0, 0.0, -1.0};

// In-phase quadrature of the emission relative to a drive of phase phi.
double in_phase(const BlochVector& s, double phi) {
  return std::sin(phi) * s.sx + std::cos(phi) * s.sy;
}

double bisect(double lo, double hi, const auto& f) {
  double flo = f(lo);
  while (hi - lo > kBisectTol) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((flo <= 0.0) == (fm <= 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

void ReadoutConfig::validate() const {
  if (!(dt_r > 0.0)) {
    throw Error(ErrorKind::parameter, "readout: dt_r must be positive");
  }
  if (t_r < 0.0) {
    throw Error(ErrorKind::parameter, "readout: t_r must be nonnegative");
  }
  if (t_rep < t_r + dt_r) {
    throw Error(ErrorKind::parameter,
                "readout: repetition period shorter than t_r + dt_r");
  }
}

bool ReadoutConfig::short_window(const AtomParams& atom) const {
  return dt_r * atom.gamma2 < 5.0;
}

std::complex<double> emission_quadratures(const BlochVector& state) {
  return {0.5 * state.sy, 0.5 * state.sx};
}

void ReadoutRecord::validate(double norm_tol) const {
  if (std::abs(sigma_minus) > 0.5 + norm_tol) {
    throw Error(ErrorKind::parameter, "readout record: |sigma_minus| > 1/2");
  }
  if (sigma_z < -1.0 - norm_tol || sigma_z > 1.0 + norm_tol) {
    throw Error(ErrorKind::parameter, "readout record: sigma_z out of range");
  }
  if (p_avg < 0.0) {
    throw Error(ErrorKind::parameter, "readout record: negative power");
  }
}

std::complex<double> coherent_current(const BlochVector& state,
                                      const AtomParams& atom) {
  if (!(atom.phi_p > 0.0)) {
    throw Error(ErrorKind::parameter, "coherent_current: phi_p must be > 0");
  }
  state.validate(atom.norm_tolerance());
  return (kHBar * atom.gamma1 / atom.phi_p) * emission_quadratures(state);
}

double emitted_power(const BlochVector& state, const AtomParams& atom) {
  state.validate(atom.norm_tolerance());
  // sz may undershoot -1 by the norm tolerance; power is still zero then.
  return 0.25 * kHBar * atom.omega_a * atom.gamma1 *
         std::max(0.0, 1.0 + state.sz);
}

ReadoutRecord readout_average(const BlochVector& state_at_tr,
                              const AtomParams& atom, const ReadoutConfig& cfg,
                              bool finite_window) {
  if (!(atom.phi_p > 0.0)) {
    throw Error(ErrorKind::parameter, "readout_average: phi_p must be > 0");
  }
  cfg.validate();
  state_at_tr.validate(atom.norm_tolerance());

  double window_i = 1.0;
  double window_p = 1.0;
  if (finite_window) {
    window_i = 1.0 - std::exp(-atom.gamma2 * cfg.dt_r);
    window_p = 1.0 - std::exp(-atom.gamma1 * cfg.dt_r);
  }

  ReadoutRecord rec;
  rec.state = state_at_tr;
  rec.sigma_minus = emission_quadratures(state_at_tr);
  rec.sigma_z = state_at_tr.sz;
  rec.i_avg = kHBar * atom.gamma1 / (atom.phi_p * atom.gamma2 * cfg.t_rep) *
              rec.sigma_minus * window_i;
  rec.p_avg = kHBar * atom.omega_a / (4.0 * cfg.t_rep) *
              std::max(0.0, 1.0 + rec.sigma_z) * window_p;
  rec.validate(atom.norm_tolerance());
  return rec;
}

ReadoutRecord run_sequence(const std::vector<Pulse>& seq,
                           const ReadoutConfig& cfg, const AtomParams& atom,
                           bool finite_window) {
  cfg.validate();
  double cursor = 0.0;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    const Pulse& p = seq[i];
    if (p.duration < 0.0) {
      throw Error(ErrorKind::sequence, "sequence: negative pulse duration");
    }
    if (p.start < cursor) {
      throw Error(ErrorKind::sequence,
                  "sequence: pulses overlap or are out of order");
    }
    cursor = p.end();
  }
  if (cfg.t_r < cursor) {
    throw Error(ErrorKind::sequence,
                "sequence: readout starts before the last pulse ends");
  }

  const Propagator free_prop(atom, DriveField{0.0, 0.0});
  BlochVector state = kGround;
  double t = 0.0;
  for (const Pulse& p : seq) {
    if (p.start > t) {
      state = free_prop.apply(state, p.start - t);
    }
    state = Propagator(atom, p.drive).apply(state, p.duration);
    t = p.end();
  }
  if (cfg.t_r > t) {
    state = free_prop.apply(state, cfg.t_r - t);
  }
  return readout_average(state, atom, cfg, finite_window);
}

PulseCalibration calibrate_pulses(const AtomParams& atom,
                                  const DriveField& drive) {
  atom.validate();
  drive.validate();
  if (!(drive.rabi > 0.5 * (atom.gamma1 + atom.gamma2))) {
    throw Error(ErrorKind::calibration,
                "calibration: drive too weak, response is overdamped");
  }

  const Propagator prop(atom, drive);
  const double phi = drive.phase;
  const auto q = [&](double t) { return in_phase(prop.apply(kGround, t), phi); };
  const auto dq = [&](double t) {
    const BlochVector s = prop.apply(kGround, t);
    const Eigen::Vector3d ds =
        prop.generator() * Eigen::Vector3d(s.sx, s.sy, s.sz) +
        prop.inhomogeneity();
    return std::sin(phi) * ds(0) + std::cos(phi) * ds(1);
  };

  // March a fine grid until the derivative turns negative, then bisect for
  // the first maximum; same again on q itself for the first zero after it.
  const double h = (kTwoPi / drive.rabi) / 40.0;
  const double t_limit = 6.0 * kTwoPi / drive.rabi;

  double t_pi_2 = -1.0;
  for (double t = h; t <= t_limit; t += h) {
    if (dq(t) <= 0.0) {
      t_pi_2 = bisect(t - h, t, dq);
      break;
    }
  }
  if (t_pi_2 < 0.0) {
    throw Error(ErrorKind::calibration,
                "calibration: no quadrature maximum found");
  }

  double t_pi = -1.0;
  for (double t = t_pi_2 + h; t <= t_pi_2 + t_limit; t += h) {
    if (q(t) <= 0.0) {
      t_pi = bisect(t - h, t, q);
      break;
    }
  }
  if (t_pi < 0.0) {
    throw Error(ErrorKind::calibration,
                "calibration: quadrature never crosses zero (drive too weak "
                "against the stationary emission level)");
  }
  return PulseCalibration{t_pi_2, t_pi};
}

std::vector<RabiPoint> rabi_experiment(const AtomParams& atom,
                                       const DriveField& drive,
                                       const std::vector<double>& dt_p_grid,
                                       const ReadoutConfig& cfg, Exec exec) {
  if (dt_p_grid.empty()) {
    throw Error(ErrorKind::grid, "rabi: empty pulse-length grid");
  }
  for (std::size_t i = 0; i < dt_p_grid.size(); ++i) {
    if (dt_p_grid[i] < 0.0 ||
        (i > 0 && !(dt_p_grid[i] > dt_p_grid[i - 1]))) {
      throw Error(ErrorKind::grid, "rabi: grid must increase from >= 0");
    }
  }
  cfg.validate();

  const Propagator prop(atom, drive);
  std::vector<RabiPoint> out(dt_p_grid.size());
  parallel_for(static_cast<std::int64_t>(dt_p_grid.size()), exec,
               [&](std::int64_t i) {
                 RabiPoint& pt = out[i];
                 pt.dt_p = dt_p_grid[i];
                 pt.state = prop.apply(kGround, pt.dt_p);
                 pt.record = readout_average(pt.state, atom, cfg);
               });
  return out;
}

DecayTrace t2_experiment(const AtomParams& atom, const DriveField& drive,
                         const std::vector<double>& delays, Exec exec) {
  const PulseCalibration cal = calibrate_pulses(atom, drive);
  const Propagator pulse_prop(atom, drive);
  const Propagator free_prop(atom, DriveField{0.0, 0.0});
  const BlochVector prepared = pulse_prop.apply(kGround, cal.t_pi_2);

  DecayTrace trace;
  trace.delays = delays;
  trace.values.resize(delays.size());
  parallel_for(static_cast<std::int64_t>(delays.size()), exec,
               [&](std::int64_t i) {
                 const BlochVector s = free_prop.apply(prepared, delays[i]);
                 trace.values[i] = in_phase(s, drive.phase);
               });
  return trace;
}

DecayTrace t1_experiment(const AtomParams& atom, const DriveField& drive,
                         const std::vector<double>& delays, Exec exec) {
  const PulseCalibration cal = calibrate_pulses(atom, drive);
  const Propagator pulse_prop(atom, drive);
  const Propagator free_prop(atom, DriveField{0.0, 0.0});
  // Opposite-phase pi/2 pulse maps +z onto the +in-phase axis.
  const DriveField m_drive{drive.rabi,
                           DriveField::normalized_phase(drive.phase + kTwoPi / 2.0)};
  const Propagator m_prop(atom, m_drive);
  const BlochVector inverted = pulse_prop.apply(kGround, cal.t_pi);

  DecayTrace trace;
  trace.delays = delays;
  trace.values.resize(delays.size());
  parallel_for(static_cast<std::int64_t>(delays.size()), exec,
               [&](std::int64_t i) {
                 BlochVector s = free_prop.apply(inverted, delays[i]);
                 s = m_prop.apply(s, cal.t_pi_2);
                 trace.values[i] = in_phase(s, drive.phase);
               });
  return trace;
}

}  // namespace qedlab
