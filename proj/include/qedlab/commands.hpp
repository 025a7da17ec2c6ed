#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "qedlab/config.hpp"

namespace qedlab {

// Outcome of one CLI command. numeric_ok = false marks a completed run
// whose numerical result is unusable (a fit that did not converge); the
// CLI turns that into exit code 3.
struct CommandOutcome {
  std::vector<std::string> files;
  bool numeric_ok = true;
};

CommandOutcome run_rabi(const RunConfig& cfg, std::ostream& log);
CommandOutcome run_decay(const RunConfig& cfg, const std::string& kind,
                         std::ostream& log);
CommandOutcome run_correlation(const RunConfig& cfg, const std::string& method,
                               std::ostream& log);
CommandOutcome run_spectrum(const RunConfig& cfg, const std::string& source,
                            std::ostream& log);
CommandOutcome run_fit(const RunConfig& cfg, const std::string& input_path,
                       const std::string& model, std::ostream& log);
// Reports how the configured relaxation rate compares with the one implied
// by the dipole coupling; informational, never fails on a gap.
CommandOutcome run_check(const RunConfig& cfg, std::ostream& log);

// {x, y[, sigma]} columns from a CSV with '#' comments and an optional
// header row; parse errors carry the line number.
DecayTrace read_xy_csv(const std::string& path);

}  // namespace qedlab
