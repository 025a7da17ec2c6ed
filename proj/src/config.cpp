#include "qedlab/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "qedlab/errors.hpp"
#include "qedlab/units.hpp"

namespace qedlab {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) {
    return "";
  }
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) {
      throw std::invalid_argument(value);
    }
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorKind::config,
                "config: bad numeric value for '" + key + "': " + value);
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") {
    return true;
  }
  if (value == "false" || value == "0") {
    return false;
  }
  throw Error(ErrorKind::config,
              "config: bad boolean for '" + key + "': " + value);
}

std::vector<double> parse_double_list(const std::string& key,
                                      const std::string& value) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    out.push_back(parse_double(key, trim(item)));
  }
  if (out.empty()) {
    throw Error(ErrorKind::config, "config: empty list for '" + key + "'");
  }
  return out;
}

std::vector<double> linear_grid_ns(double lo, double hi, double step,
                                   const std::string& what) {
  if (!(step > 0.0)) {
    throw Error(ErrorKind::config, "config: " + what + " step must be > 0");
  }
  if (hi < lo) {
    throw Error(ErrorKind::config, "config: " + what + " range is empty");
  }
  const auto n = static_cast<std::size_t>(
                     std::floor((hi - lo) / step + 1e-9)) +
                 1;
  std::vector<double> grid(n);
  for (std::size_t i = 0; i < n; ++i) {
    grid[i] = lo + static_cast<double>(i) * step;
  }
  return grid;
}

}  // namespace

void RunConfig::validate() const {
  if (!(omega_a_ghz > 0.0) || !(gamma1_mhz > 0.0) || !(gamma2_mhz > 0.0)) {
    throw Error(ErrorKind::config, "config: frequencies must be positive");
  }
  if (!(z_ohm > 0.0)) {
    throw Error(ErrorKind::config, "config: z_ohm must be positive");
  }
  for (double amp : rabi_mhz) {
    if (!(amp > 0.0)) {
      throw Error(ErrorKind::config, "config: rabi_mhz must be positive");
    }
  }
  if (pad_factor < 8) {
    throw Error(ErrorKind::config, "config: pad_factor must be >= 8");
  }
  if (noise_sigma < 0.0) {
    throw Error(ErrorKind::config, "config: noise_sigma must be >= 0");
  }
  atom().validate();
}

AtomParams RunConfig::atom() const {
  AtomParams a;
  a.omega_a = ghz_to_angular(omega_a_ghz);
  a.gamma1 = mhz_to_angular(gamma1_mhz);
  a.gamma2 = mhz_to_angular(gamma2_mhz);
  a.z_line = z_ohm;
  if (ip_na) {
    a.persistent_current = *ip_na * 1e-9;
  }
  if (m_ph) {
    a.mutual_inductance = *m_ph * 1e-12;
  }
  if (a.persistent_current && a.mutual_inductance) {
    a.phi_p = *a.persistent_current * *a.mutual_inductance;
  } else {
    // Dipole element backed out of the measured relaxation rate.
    a.phi_p = std::sqrt(kHBar * a.z_line * a.gamma1 / a.omega_a);
  }
  return a;
}

DriveField RunConfig::drive(double amplitude_mhz) const {
  return DriveField{mhz_to_angular(amplitude_mhz),
                    DriveField::normalized_phase(phase_rad)};
}

ReadoutConfig RunConfig::readout(double t_r_ns) const {
  return ReadoutConfig{ns_to_s(t_r_ns), ns_to_s(dt_r_ns), ns_to_s(t_rep_ns)};
}

std::vector<double> RunConfig::pulse_length_grid_ns() const {
  return linear_grid_ns(tp_min_ns, tp_max_ns, tp_step_ns, "pulse-length grid");
}

std::vector<double> RunConfig::decay_grid_ns(const std::string& kind) const {
  if (kind == "t1") {
    return linear_grid_ns(0.0, t1_max_ns, t1_step_ns, "t1 delay grid");
  }
  if (kind == "t2") {
    return linear_grid_ns(0.0, t2_max_ns, t2_step_ns, "t2 delay grid");
  }
  throw Error(ErrorKind::config, "config: decay kind must be t1 or t2");
}

void apply_config_entry(RunConfig& cfg, const std::string& raw_key,
                        const std::string& raw_value) {
  const std::string key = trim(raw_key);
  const std::string value = trim(raw_value);
  if (key.empty()) {
    throw Error(ErrorKind::config, "config: empty key");
  }

  if (key == "omega_a_ghz") {
    cfg.omega_a_ghz = parse_double(key, value);
  } else if (key == "gamma1_mhz") {
    cfg.gamma1_mhz = parse_double(key, value);
  } else if (key == "gamma2_mhz") {
    cfg.gamma2_mhz = parse_double(key, value);
  } else if (key == "ip_na") {
    if (value == "none") {
      cfg.ip_na.reset();
    } else {
      cfg.ip_na = parse_double(key, value);
    }
  } else if (key == "m_ph") {
    if (value == "none") {
      cfg.m_ph.reset();
    } else {
      cfg.m_ph = parse_double(key, value);
    }
  } else if (key == "z_ohm") {
    cfg.z_ohm = parse_double(key, value);
  } else if (key == "rabi_mhz") {
    cfg.rabi_mhz = parse_double_list(key, value);
  } else if (key == "phase_rad") {
    cfg.phase_rad = parse_double(key, value);
  } else if (key == "dt_r_ns") {
    cfg.dt_r_ns = parse_double(key, value);
  } else if (key == "t_rep_ns") {
    cfg.t_rep_ns = parse_double(key, value);
  } else if (key == "tp_min_ns") {
    cfg.tp_min_ns = parse_double(key, value);
  } else if (key == "tp_max_ns") {
    cfg.tp_max_ns = parse_double(key, value);
  } else if (key == "tp_step_ns") {
    cfg.tp_step_ns = parse_double(key, value);
  } else if (key == "t1_max_ns") {
    cfg.t1_max_ns = parse_double(key, value);
  } else if (key == "t1_step_ns") {
    cfg.t1_step_ns = parse_double(key, value);
  } else if (key == "t2_max_ns") {
    cfg.t2_max_ns = parse_double(key, value);
  } else if (key == "t2_step_ns") {
    cfg.t2_step_ns = parse_double(key, value);
  } else if (key == "corr_dt_ns") {
    cfg.corr_dt_ns = parse_double(key, value);
  } else if (key == "corr_t_max_ns") {
    cfg.corr_t_max_ns = parse_double(key, value);
  } else if (key == "pad_factor") {
    cfg.pad_factor = static_cast<int>(parse_double(key, value));
  } else if (key == "f_span_mhz") {
    cfg.f_span_mhz = parse_double(key, value);
  } else if (key == "noise_sigma") {
    cfg.noise_sigma = parse_double(key, value);
  } else if (key == "seed") {
    cfg.seed = static_cast<std::uint64_t>(parse_double(key, value));
  } else if (key == "normalized") {
    cfg.normalized = parse_bool(key, value);
  } else if (key == "dead_time_mask") {
    cfg.dead_time_mask = parse_bool(key, value);
  } else if (key == "finite_window") {
    cfg.finite_window = parse_bool(key, value);
  } else if (key == "dead_time_ns") {
    cfg.dead_time_ns = parse_double(key, value);
  } else if (key == "out") {
    cfg.out_path = value;
  } else if (key == "format") {
    if (value == "csv") {
      cfg.format = OutputFormat::csv;
    } else if (value == "json") {
      cfg.format = OutputFormat::json;
    } else {
      throw Error(ErrorKind::config, "config: format must be csv or json");
    }
  } else {
    throw Error(ErrorKind::config, "config: unknown key '" + key + "'");
  }
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorKind::config, "config: cannot open file: " + path);
  }
  RunConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::config,
                  "config: line " + std::to_string(line_no) +
                      ": expected key = value");
    }
    apply_config_entry(cfg, line.substr(0, eq), line.substr(eq + 1));
  }
  return cfg;
}

}  // namespace qedlab
