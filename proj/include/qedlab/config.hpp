#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qedlab/bloch.hpp"
#include "qedlab/pulses.hpp"
#include "qedlab/table.hpp"

namespace qedlab {

// Flat key=value run configuration. Defaults are the measured device
// values shipped in configs/default.cfg; every key can be overridden from
// a file or --set. Unknown keys are rejected.
struct RunConfig {
  // atom (linear units)
  double omega_a_ghz = 9.888;
  double gamma1_mhz = 18.3;
  double gamma2_mhz = 9.1;
  std::optional<double> ip_na = 213.0;
  std::optional<double> m_ph = 13.6;
  double z_ohm = 50.0;

  // drive; several amplitudes make sweep commands emit one file each
  std::vector<double> rabi_mhz = {140.0};
  double phase_rad = 0.0;

  // readout
  double dt_r_ns = 50.0;
  double t_rep_ns = 250.0;

  // pulse-length sweep
  double tp_min_ns = 0.0;
  double tp_max_ns = 60.0;
  double tp_step_ns = 0.1;

  // decay delays
  double t1_max_ns = 50.0;
  double t1_step_ns = 0.25;
  double t2_max_ns = 100.0;
  double t2_step_ns = 0.5;

  // correlation / spectrum grids; 0 selects the rate-derived defaults
  double corr_dt_ns = 0.0;
  double corr_t_max_ns = 0.0;
  int pad_factor = 8;
  double f_span_mhz = 0.0;  // half-span of the emitted detuning axis

  // noise injection
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;

  // flags
  bool normalized = false;
  bool dead_time_mask = false;
  bool finite_window = false;
  double dead_time_ns = 0.8;

  // output
  std::string out_path;  // empty = "<command>.<format>"
  OutputFormat format = OutputFormat::csv;

  void validate() const;

  AtomParams atom() const;
  DriveField drive(double amplitude_mhz) const;
  ReadoutConfig readout(double t_r_ns) const;

  std::vector<double> pulse_length_grid_ns() const;
  std::vector<double> decay_grid_ns(const std::string& kind) const;
};

// Applies "key = value" onto cfg; throws ErrorKind::config for unknown
// keys or unparsable values.
void apply_config_entry(RunConfig& cfg, const std::string& key,
                        const std::string& value);

// Reads a flat key=value file ('#' comments) onto the defaults.
RunConfig load_config_file(const std::string& path);

}  // namespace qedlab
