#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qedlab/commands.hpp"
#include "qedlab/errors.hpp"

namespace {

int exit_code_for(qedlab::ErrorKind kind) {
  switch (kind) {
    case qedlab::ErrorKind::parameter:
    case qedlab::ErrorKind::grid:
    case qedlab::ErrorKind::sequence:
    case qedlab::ErrorKind::config:
    case qedlab::ErrorKind::parse:
      return 2;
    default:
      return 3;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "qedlab - pulse, emission and spectrum experiments on a two-level "
      "atom in an open transmission line"};
  app.footer(
      "Exit codes: 0 success, 2 configuration or parse error, 3 numerical "
      "failure (non-convergence, degenerate system).\n"
      "Config files are flat 'key = value' text; see configs/default.cfg "
      "for every key and README.md for the file formats.");
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_path;
  std::string format = "csv";
  std::uint64_t seed = 0;

  app.fallthrough();
  app.add_option("--config", config_path, "Parameter file (key = value)");
  app.add_option("--set", overrides,
                 "Override one key, e.g. --set rabi_mhz=44 (repeatable)")
      ->allow_extra_args(false);
  app.add_option("--out", out_path, "Output file path");
  app.add_option("--format", format, "Output file format")
      ->check(CLI::IsMember({"csv", "json"}));
  auto* seed_opt = app.add_option("--seed", seed, "Noise seed");

  auto* cmd_rabi = app.add_subcommand(
      "rabi", "Sweep one drive pulse's length; emission after the pulse");
  auto* cmd_decay = app.add_subcommand(
      "decay", "Coherence (t2) or population (t1) decay with fitted rate");
  std::string decay_kind;
  cmd_decay->add_option("kind", decay_kind, "t1 or t2")
      ->required()
      ->check(CLI::IsMember({"t1", "t2"}));
  auto* cmd_corr = app.add_subcommand(
      "correlation", "Two-time correlation of the emission fluctuations");
  std::string corr_method = "differencing";
  cmd_corr->add_option("--method", corr_method, "direct or differencing")
      ->check(CLI::IsMember({"direct", "differencing"}));
  auto* cmd_spec = app.add_subcommand(
      "spectrum", "Incoherent emission spectrum against detuning");
  std::string spec_source = "mollow";
  cmd_spec->add_option("--source", spec_source, "mollow or free_induction")
      ->check(CLI::IsMember({"mollow", "free_induction"}));
  auto* cmd_fit = app.add_subcommand(
      "fit", "Fit a model to an {x, y[, sigma]} CSV (x in ns, or MHz for "
             "lorentzian)");
  std::string fit_input;
  std::string fit_model;
  cmd_fit->add_option("input", fit_input, "Input CSV path")->required();
  cmd_fit->add_option("--model", fit_model,
                      "exponential, damped_oscillation or lorentzian")
      ->required();
  auto* cmd_check = app.add_subcommand(
      "check", "Compare the configured relaxation rate with the one implied "
               "by the dipole coupling");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // command-line errors are config errors
  }

  try {
    qedlab::RunConfig cfg;
    if (!config_path.empty()) {
      cfg = qedlab::load_config_file(config_path);
    }
    for (const auto& entry : overrides) {
      const auto eq = entry.find('=');
      if (eq == std::string::npos) {
        throw qedlab::Error(qedlab::ErrorKind::config,
                            "--set expects key=value, got: " + entry);
      }
      qedlab::apply_config_entry(cfg, entry.substr(0, eq),
                                 entry.substr(eq + 1));
    }
    if (!out_path.empty()) {
      cfg.out_path = out_path;
    }
    cfg.format = (format == "json") ? qedlab::OutputFormat::json
                                    : qedlab::OutputFormat::csv;
    if (seed_opt->count() > 0) {
      cfg.seed = seed;
    }

    qedlab::CommandOutcome outcome;
    if (cmd_rabi->parsed()) {
      outcome = qedlab::run_rabi(cfg, std::cout);
    } else if (cmd_decay->parsed()) {
      outcome = qedlab::run_decay(cfg, decay_kind, std::cout);
    } else if (cmd_corr->parsed()) {
      outcome = qedlab::run_correlation(cfg, corr_method, std::cout);
    } else if (cmd_spec->parsed()) {
      outcome = qedlab::run_spectrum(cfg, spec_source, std::cout);
    } else if (cmd_fit->parsed()) {
      outcome = qedlab::run_fit(cfg, fit_input, fit_model, std::cout);
    } else if (cmd_check->parsed()) {
      outcome = qedlab::run_check(cfg, std::cout);
    }
    return outcome.numeric_ok ? 0 : 3;
  } catch (const qedlab::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
