#include "qedlab/commands.hpp"

#include <array>
#include <cmath>
#include <complex>
#include <fstream>
#include <ostream>
#include <sstream>

#include "qedlab/correlation.hpp"
#include "qedlab/errors.hpp"
#include "qedlab/spectrum.hpp"
#include "qedlab/units.hpp"

namespace qedlab {

namespace {

std::string extension(OutputFormat f) {
  return f == OutputFormat::csv ? ".csv" : ".json";
}

std::string output_path(const RunConfig& cfg, const std::string& stem) {
  if (!cfg.out_path.empty()) {
    return cfg.out_path;
  }
  return stem + extension(cfg.format);
}

std::string with_suffix(const std::string& path, const std::string& suffix) {
  const auto dot = path.rfind('.');
  const auto slash = path.find_last_of("/\\");
  if (dot == std::string::npos ||
      (slash != std::string::npos && dot < slash)) {
    return path + suffix;
  }
  return path.substr(0, dot) + suffix + path.substr(dot);
}

void add_atom_meta(Table& t, const RunConfig& cfg) {
  t.meta.emplace_back("omega_a_ghz", format_double(cfg.omega_a_ghz));
  t.meta.emplace_back("gamma1_mhz", format_double(cfg.gamma1_mhz));
  t.meta.emplace_back("gamma2_mhz", format_double(cfg.gamma2_mhz));
  t.meta.emplace_back("z_ohm", format_double(cfg.z_ohm));
}

void add_drive_meta(Table& t, double rabi_mhz, double phase_rad) {
  t.meta.emplace_back("rabi_mhz", format_double(rabi_mhz));
  t.meta.emplace_back("phase_rad", format_double(phase_rad));
}

nlohmann::ordered_json fit_to_json(const FitResult& fit) {
  nlohmann::ordered_json j;
  j["converged"] = fit.converged;
  j["iterations"] = fit.iterations;
  j["residual_rms"] = fit.residual_rms;
  nlohmann::ordered_json params = nlohmann::ordered_json::object();
  for (const auto& [name, value] : fit.params) {
    params[name] = value;
  }
  j["params"] = params;
  if (!fit.message.empty()) {
    j["message"] = fit.message;
  }
  if (fit.covariance.size() > 0) {
    nlohmann::ordered_json cov = nlohmann::ordered_json::array();
    for (Eigen::Index r = 0; r < fit.covariance.rows(); ++r) {
      nlohmann::ordered_json row = nlohmann::ordered_json::array();
      for (Eigen::Index c = 0; c < fit.covariance.cols(); ++c) {
        row.push_back(fit.covariance(r, c));
      }
      cov.push_back(row);
    }
    j["covariance"] = cov;
  }
  return j;
}

std::vector<double> correlation_grid(const RunConfig& cfg,
                                     const AtomParams& atom,
                                     const DriveField& drive) {
  if (cfg.corr_dt_ns > 0.0 && cfg.corr_t_max_ns > 0.0) {
    const auto n = static_cast<std::size_t>(
                       std::floor(cfg.corr_t_max_ns / cfg.corr_dt_ns + 1e-9)) +
                   1;
    std::vector<double> grid(n);
    for (std::size_t i = 0; i < n; ++i) {
      grid[i] = ns_to_s(static_cast<double>(i) * cfg.corr_dt_ns);
    }
    return grid;
  }
  return default_correlation_grid(atom, drive);
}

void warn_short_window(const RunConfig& cfg, const AtomParams& atom,
                       std::ostream& log) {
  if (cfg.readout(0.0).short_window(atom)) {
    log << "warning: readout window dt_r covers less than 5/gamma2; the "
           "averaged formulas assume the full emission tail\n";
  }
}

}  // namespace

CommandOutcome run_rabi(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  const AtomParams atom = cfg.atom();
  warn_short_window(cfg, atom, log);
  const std::vector<double> grid_ns = cfg.pulse_length_grid_ns();
  std::vector<double> grid_s(grid_ns.size());
  for (std::size_t i = 0; i < grid_ns.size(); ++i) {
    grid_s[i] = ns_to_s(grid_ns[i]);
  }

  CommandOutcome outcome;
  const std::string base = output_path(cfg, "rabi");
  for (double amp : cfg.rabi_mhz) {
    const DriveField drive = cfg.drive(amp);
    const ReadoutConfig rcfg = cfg.readout(0.0);
    const auto points = rabi_experiment(atom, drive, grid_s, rcfg);

    Table t;
    t.title = "rabi";
    add_atom_meta(t, cfg);
    add_drive_meta(t, amp, cfg.phase_rad);
    t.meta.emplace_back("t_rep_ns", format_double(cfg.t_rep_ns));
    t.columns = {{"dt_p_ns", "ns"},          {"sx", "1"},
                 {"sy", "1"},                {"sz", "1"},
                 {"re_sigma_minus", "1"},    {"im_sigma_minus", "1"},
                 {"p_avg_W", "W"}};
    for (std::size_t i = 0; i < points.size(); ++i) {
      const BlochVector s = points[i].state.clamped();
      const ReadoutRecord rec =
          readout_average(s, atom, rcfg, cfg.finite_window);
      t.add_row({grid_ns[i], s.sx, s.sy, s.sz, rec.sigma_minus.real(),
                 rec.sigma_minus.imag(), rec.p_avg});
    }

    std::string path = base;
    if (cfg.rabi_mhz.size() > 1) {
      path = with_suffix(base, "_" + format_double(amp) + "mhz");
    }
    write_table_file(t, path, cfg.format);
    outcome.files.push_back(path);
    log << "rabi: wrote " << path << " (" << t.rows.size() << " points)\n";
  }
  return outcome;
}

CommandOutcome run_decay(const RunConfig& cfg, const std::string& kind,
                         std::ostream& log) {
  cfg.validate();
  if (kind != "t1" && kind != "t2") {
    throw Error(ErrorKind::config, "decay: kind must be t1 or t2");
  }
  const AtomParams atom = cfg.atom();
  warn_short_window(cfg, atom, log);
  const DriveField drive = cfg.drive(cfg.rabi_mhz.front());
  const std::vector<double> grid_ns = cfg.decay_grid_ns(kind);
  std::vector<double> delays(grid_ns.size());
  for (std::size_t i = 0; i < grid_ns.size(); ++i) {
    delays[i] = ns_to_s(grid_ns[i]);
  }

  DecayTrace trace = (kind == "t1") ? t1_experiment(atom, drive, delays)
                                    : t2_experiment(atom, drive, delays);
  if (cfg.noise_sigma > 0.0) {
    trace = add_noise(trace, cfg.noise_sigma, cfg.seed);
  }
  const FitResult fit = fit_exponential(trace);

  Table t;
  t.title = "decay_" + kind;
  add_atom_meta(t, cfg);
  add_drive_meta(t, cfg.rabi_mhz.front(), cfg.phase_rad);
  t.meta.emplace_back("noise_sigma", format_double(cfg.noise_sigma));
  t.meta.emplace_back("seed", std::to_string(cfg.seed));
  t.columns = {{"delay_ns", "ns"}, {"signal", "1"}};
  for (std::size_t i = 0; i < grid_ns.size(); ++i) {
    t.add_row({grid_ns[i], trace.values[i]});
  }
  t.fit = fit_to_json(fit);

  const std::string path = output_path(cfg, "decay_" + kind);
  write_table_file(t, path, cfg.format);

  CommandOutcome outcome;
  outcome.files.push_back(path);
  outcome.numeric_ok = fit.converged;
  if (fit.converged) {
    log << "decay " << kind
        << ": rate_mhz = " << format_double(fit.params.at("rate_mhz"))
        << ", wrote " << path << "\n";
  } else {
    log << "decay " << kind << ": fit failed (" << fit.message << "), wrote "
        << path << "\n";
  }
  return outcome;
}

CommandOutcome run_correlation(const RunConfig& cfg, const std::string& method,
                               std::ostream& log) {
  cfg.validate();
  if (method != "direct" && method != "differencing") {
    throw Error(ErrorKind::config,
                "correlation: method must be direct or differencing");
  }
  const AtomParams atom = cfg.atom();
  const DriveField drive = cfg.drive(cfg.rabi_mhz.front());
  const std::vector<double> grid = correlation_grid(cfg, atom, drive);

  const CorrelationTrace direct =
      correlation_direct(atom, drive, grid, InitMode::strong_drive);

  Table t;
  t.title = "correlation_" + method;
  add_atom_meta(t, cfg);
  add_drive_meta(t, cfg.rabi_mhz.front(), cfg.phase_rad);
  t.columns = {{"t_ns", "ns"}, {"re_C", "1"}, {"im_C", "1"}};
  if (cfg.dead_time_mask) {
    t.columns.push_back({"masked", "1"});
  }

  CommandOutcome outcome;
  const std::string path = output_path(cfg, "correlation_" + method);

  const CorrelationTrace* emitted = &direct;
  DifferencingResult diff;
  if (method == "differencing") {
    diff = correlation_via_differencing(atom, drive, grid);
    emitted = &diff.corr;

    double max_gap = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      max_gap = std::max(max_gap,
                         std::abs(diff.corr.values[i] - direct.values[i]));
    }
    std::ostringstream gap;
    gap.setf(std::ios::scientific);
    gap.precision(3);
    gap << max_gap;
    t.meta.emplace_back("max_diff_vs_direct", gap.str());
    log << "correlation: max |C_differencing - C_direct| = " << gap.str()
        << "\n";
  }

  const double dead_time = ns_to_s(cfg.dead_time_ns);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const bool masked = cfg.dead_time_mask && grid[i] < dead_time;
    // Masked rows carry the direct-route continuation of the trace.
    const std::complex<double> c =
        masked ? direct.values[i] : emitted->values[i];
    if (cfg.dead_time_mask) {
      t.add_row({s_to_ns(grid[i]), c.real(), c.imag(), masked ? 1.0 : 0.0});
    } else {
      t.add_row({s_to_ns(grid[i]), c.real(), c.imag()});
    }
  }
  write_table_file(t, path, cfg.format);
  outcome.files.push_back(path);
  log << "correlation " << method << ": wrote " << path << "\n";

  if (method == "differencing") {
    // Deviation trajectories of the four preparations, the raw material of
    // the differencing construction.
    const BlochVector ss = steady_state(atom, drive);
    Table traj;
    traj.title = "correlation_trajectories";
    add_atom_meta(traj, cfg);
    add_drive_meta(traj, cfg.rabi_mhz.front(), cfg.phase_rad);
    traj.columns = {{"t_ns", "ns"}};
    const std::array<std::string, 4> tags = {"xplus", "xminus", "yplus",
                                             "yminus"};
    for (const auto& tag : tags) {
      traj.columns.push_back({"dsx_" + tag, "1"});
      traj.columns.push_back({"dsy_" + tag, "1"});
    }
    for (std::size_t i = 0; i < grid.size(); ++i) {
      std::vector<double> row;
      row.reserve(9);
      row.push_back(s_to_ns(grid[i]));
      for (int k = 0; k < 4; ++k) {
        const BlochVector& s = diff.trajectories[k].states[i];
        row.push_back(s.sx - ss.sx);
        row.push_back(s.sy - ss.sy);
      }
      traj.rows.push_back(std::move(row));
    }
    const std::string traj_path = with_suffix(path, "_trajectories");
    write_table_file(traj, traj_path, cfg.format);
    outcome.files.push_back(traj_path);
    log << "correlation differencing: wrote " << traj_path << "\n";
  }
  return outcome;
}

CommandOutcome run_spectrum(const RunConfig& cfg, const std::string& source,
                            std::ostream& log) {
  cfg.validate();
  if (source != "mollow" && source != "free_induction") {
    throw Error(ErrorKind::config,
                "spectrum: source must be mollow or free_induction");
  }
  const AtomParams atom = cfg.atom();

  SpectrumOptions opts;
  opts.pad_factor = cfg.pad_factor;
  opts.f_max = cfg.f_span_mhz > 0.0 ? cfg.f_span_mhz * 1e6 : 0.0;
  opts.normalized = cfg.normalized;

  Table t;
  t.title = "spectrum_" + source;
  add_atom_meta(t, cfg);
  const std::string density_unit = cfg.normalized ? "1" : "W/Hz";

  CommandOutcome outcome;
  const std::string path = output_path(cfg, "spectrum_" + source);

  if (source == "mollow") {
    const DriveField drive = cfg.drive(cfg.rabi_mhz.front());
    add_drive_meta(t, cfg.rabi_mhz.front(), cfg.phase_rad);
    const CorrelationTrace corr = correlation_direct(
        atom, drive, correlation_grid(cfg, atom, drive),
        InitMode::strong_drive);
    const Spectrum spec = incoherent_spectrum(corr, atom, opts);
    const AnalyticSpectrum oracle = analytic_triplet(
        atom, drive, spec.detuning, InitMode::strong_drive, cfg.normalized);

    t.columns = {{"detuning_MHz", "MHz"}, {"S", density_unit}};
    if (oracle.eigen_route) {
      t.columns.push_back({"S_analytic", density_unit});
    }
    for (std::size_t i = 0; i < spec.detuning.size(); ++i) {
      if (oracle.eigen_route) {
        t.add_row({spec.detuning[i] / 1e6, spec.density[i],
                   oracle.spectrum.density[i]});
      } else {
        t.add_row({spec.detuning[i] / 1e6, spec.density[i]});
      }
    }
  } else {
    const Spectrum spec = free_induction_spectrum(atom, opts);
    const FitResult fit = fit_lorentzian(spec.detuning, spec.density);
    t.columns = {{"detuning_MHz", "MHz"}, {"S", density_unit}};
    for (std::size_t i = 0; i < spec.detuning.size(); ++i) {
      t.add_row({spec.detuning[i] / 1e6, spec.density[i]});
    }
    t.fit = fit_to_json(fit);
    outcome.numeric_ok = fit.converged;
    if (fit.converged) {
      log << "spectrum free_induction: hwhm_mhz = "
          << format_double(fit.params.at("hwhm_mhz")) << "\n";
    }
  }

  write_table_file(t, path, cfg.format);
  outcome.files.push_back(path);
  log << "spectrum " << source << ": wrote " << path << "\n";
  return outcome;
}

DecayTrace read_xy_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorKind::parse, "fit: cannot open input file: " + path);
  }
  DecayTrace trace;
  std::string line;
  int line_no = 0;
  bool header_allowed = true;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) {
      line = line.substr(0, hash);
    }
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }

    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
      fields.push_back(field);
    }
    if (fields.size() < 2 || fields.size() > 3) {
      throw Error(ErrorKind::parse,
                  "fit: line " + std::to_string(line_no) +
                      ": expected 2 or 3 comma-separated columns");
    }
    std::vector<double> nums;
    bool numeric = true;
    for (const auto& f : fields) {
      try {
        std::size_t used = 0;
        nums.push_back(std::stod(f, &used));
        if (used != f.size()) {
          numeric = false;
        }
      } catch (const std::exception&) {
        numeric = false;
      }
    }
    if (!numeric) {
      if (header_allowed) {
        header_allowed = false;  // one header row is fine
        continue;
      }
      throw Error(ErrorKind::parse, "fit: line " + std::to_string(line_no) +
                                        ": malformed numeric value");
    }
    header_allowed = false;
    trace.delays.push_back(nums[0]);
    trace.values.push_back(nums[1]);
    if (nums.size() == 3) {
      trace.sigma.push_back(nums[2]);
    }
  }
  if (!trace.sigma.empty() && trace.sigma.size() != trace.values.size()) {
    throw Error(ErrorKind::parse,
                "fit: sigma column present only on some rows");
  }
  if (trace.delays.empty()) {
    throw Error(ErrorKind::parse, "fit: no data rows in " + path);
  }
  return trace;
}

CommandOutcome run_fit(const RunConfig& cfg, const std::string& input_path,
                       const std::string& model, std::ostream& log) {
  DecayTrace raw = read_xy_csv(input_path);

  FitResult fit;
  if (model == "exponential" || model == "damped_oscillation") {
    // Trace abscissa arrives in ns, the fit works in seconds.
    DecayTrace trace = raw;
    for (double& d : trace.delays) {
      d *= 1e-9;
    }
    fit = (model == "exponential") ? fit_exponential(trace)
                                   : fit_damped_oscillation(trace);
  } else if (model == "lorentzian") {
    std::vector<double> x_hz = raw.delays;
    for (double& f : x_hz) {
      f *= 1e6;  // MHz in the file
    }
    fit = fit_lorentzian(x_hz, raw.values);
  } else {
    throw Error(ErrorKind::config,
                "fit: model must be exponential, damped_oscillation or "
                "lorentzian");
  }

  nlohmann::ordered_json report = fit_to_json(fit);
  report["model"] = model;
  report["input"] = input_path;

  const std::string path =
      cfg.out_path.empty() ? "fit.json" : cfg.out_path;
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(ErrorKind::config, "fit: cannot open output file: " + path);
  }
  out << report.dump(2) << "\n";

  CommandOutcome outcome;
  outcome.files.push_back(path);
  outcome.numeric_ok = fit.converged;
  log << "fit " << model << ": " << (fit.converged ? "converged" : "FAILED")
      << ", wrote " << path << "\n";
  return outcome;
}

CommandOutcome run_check(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  const AtomParams atom = cfg.atom();

  const double predicted = atom.predicted_gamma1();
  const double configured = atom.gamma1;
  const double gap = (configured - predicted) / configured;

  log << "consistency check\n";
  if (atom.persistent_current && atom.mutual_inductance) {
    log << "  phi_p = M * Ip = " << format_double(atom.phi_p) << " Wb\n";
  } else {
    log << "  phi_p (from configured gamma1) = " << format_double(atom.phi_p)
        << " Wb\n";
  }
  log << "  gamma1 configured          : "
      << format_double(angular_to_mhz(configured)) << " MHz\n";
  log << "  gamma1 from dipole coupling: "
      << format_double(angular_to_mhz(predicted)) << " MHz\n";
  log << "  relative gap               : "
      << format_double(100.0 * gap) << " %\n";

  CommandOutcome outcome;
  if (!cfg.out_path.empty()) {
    nlohmann::ordered_json j;
    j["phi_p_wb"] = atom.phi_p;
    j["gamma1_configured_mhz"] = angular_to_mhz(configured);
    j["gamma1_predicted_mhz"] = angular_to_mhz(predicted);
    j["relative_gap"] = gap;
    std::ofstream out(cfg.out_path, std::ios::binary);
    if (!out) {
      throw Error(ErrorKind::config,
                  "check: cannot open output file: " + cfg.out_path);
    }
    out << j.dump(2) << "\n";
    outcome.files.push_back(cfg.out_path);
  }
  return outcome;
}

}  // namespace qedlab
