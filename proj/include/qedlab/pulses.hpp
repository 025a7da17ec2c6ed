#pragma once

#include <complex>
#include <vector>

#include "qedlab/bloch.hpp"
#include "qedlab/fit.hpp"

namespace qedlab {

struct Pulse {
  double start = 0;     // s
  double duration = 0;  // s
  DriveField drive;
  char label = 'P';  // 'P' prepare, 'M' manipulate

  double end() const { return start + duration; }
};

struct ReadoutConfig {
  double t_r = 0;    // readout start, s
  double dt_r = 0;   // readout window, s
  double t_rep = 0;  // repetition period, s

  void validate() const;
  // The averaging formulas assume the emission tail fits the window;
  // flag configurations where dt_r * gamma2 < 5.
  bool short_window(const AtomParams& atom) const;
};

// Quadrature convention, used everywhere a complex emission amplitude
// appears: re = <sigma_y>/2 is the component in phase with a zero-phase
// drive, im = <sigma_x>/2 the orthogonal one. A maximally superposed state
// has magnitude 1/2.
std::complex<double> emission_quadratures(const BlochVector& state);

struct ReadoutRecord {
  std::complex<double> sigma_minus;  // emission_quadratures(state)
  double sigma_z = -1;
  std::complex<double> i_avg = 0;  // repetition-averaged VNA amplitude, A
  double p_avg = 0;                // repetition-averaged SA power, W

  BlochVector state;  // raw state at the readout instant

  void validate(double norm_tol = kBlochNormTol) const;
};

// Coherent forward-wave amplitude (hbar*Gamma1/phi_p) * quadratures, in
// amperes, for the atom at the line origin.
std::complex<double> coherent_current(const BlochVector& state,
                                      const AtomParams& atom);

// Instantaneous one-direction emitted power (hbar*omega_a*Gamma1/4)(1+sz).
double emitted_power(const BlochVector& state, const AtomParams& atom);

// Repetition-averaged detector signals:
//   i_avg = hbar*Gamma1/(phi_p*Gamma2*Tr) * quadratures
//   p_avg = hbar*omega_a/(4*Tr) * (1+sz)
// With finite_window the (1 - exp(-Gamma*dt_r)) window factors multiply in
// instead of the infinite-tail limit.
ReadoutRecord readout_average(const BlochVector& state_at_tr,
                              const AtomParams& atom,
                              const ReadoutConfig& cfg,
                              bool finite_window = false);

// Evolves the ground state through the pulse train (drive on inside each
// pulse, free decay in the gaps), then averages the readout at cfg.t_r.
ReadoutRecord run_sequence(const std::vector<Pulse>& seq,
                           const ReadoutConfig& cfg, const AtomParams& atom,
                           bool finite_window = false);

struct PulseCalibration {
  double t_pi_2 = 0;  // s
  double t_pi = 0;    // s
};

// Pulse lengths read off the damped ground-state response: t_pi_2 at the
// first maximum of the in-phase quadrature, t_pi at its first zero
// afterwards, both bisected on the exact solution to 1e-13 s. Decoherence
// during the pulse is part of the definition.
PulseCalibration calibrate_pulses(const AtomParams& atom,
                                  const DriveField& drive);

struct RabiPoint {
  double dt_p = 0;  // pulse length, s
  BlochVector state;
  ReadoutRecord record;
};

// One drive pulse of swept length, readout immediately after.
std::vector<RabiPoint> rabi_experiment(const AtomParams& atom,
                                       const DriveField& drive,
                                       const std::vector<double>& dt_p_grid,
                                       const ReadoutConfig& cfg,
                                       Exec exec = Exec::parallel);

// pi/2 pulse, free decay for each delay, readout: the in-phase quadrature
// relaxes at gamma2.
DecayTrace t2_experiment(const AtomParams& atom, const DriveField& drive,
                         const std::vector<double>& delays,
                         Exec exec = Exec::parallel);

// pi pulse, free decay, then a pi/2 pulse of opposite phase projecting the
// population onto the measured quadrature: the trace follows
// 2*exp(-gamma1*t) - 1 up to pulse-fidelity factors.
DecayTrace t1_experiment(const AtomParams& atom, const DriveField& drive,
                         const std::vector<double>& delays,
                         Exec exec = Exec::parallel);

}  // namespace qedlab
