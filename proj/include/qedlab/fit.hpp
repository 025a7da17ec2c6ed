#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qedlab {

struct DecayTrace {
  std::vector<double> delays;  // s, strictly increasing
  std::vector<double> values;  // dimensionless signal
  std::vector<double> sigma;   // optional per-point noise scale (empty = 1)

  void validate(std::size_t min_points) const;
};

struct FitResult {
  // Named estimates; rates and frequencies appear both angular (per s)
  // and as linear MHz.
  std::map<std::string, double> params;
  double residual_rms = 0.0;
  Eigen::MatrixXd covariance;  // linearized, empty when not available
  bool converged = false;
  int iterations = 0;
  std::string message;
};

// y ~ amplitude * exp(-rate * t) + offset. Initial guess from log-linear
// regression on baseline-subtracted data; refined by damped Gauss-Newton
// with analytic Jacobians. Non-decaying data comes back converged=false.
FitResult fit_exponential(const DecayTrace& trace);

// y ~ amplitude * exp(-decay * t) * sin(frequency * t + phase) + offset.
// The frequency is seeded from the dominant discrete-transform bin, the
// linear subproblem (two quadratures + offset) is solved exactly, then the
// full model is refined. The positive-frequency branch is reported.
FitResult fit_damped_oscillation(const DecayTrace& trace);

// y ~ height * hwhm^2 / ((x - center)^2 + hwhm^2) + offset on an arbitrary
// x axis (Hz for spectra). Center seeded from the maximum bin.
FitResult fit_lorentzian(const std::vector<double>& x,
                         const std::vector<double>& y);

// Deterministic Gaussian stream: mt19937_64 (sequence pinned by the
// standard) plus a hand-rolled Box-Muller transform, so identical seeds
// give identical samples everywhere.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : engine_(seed) {}
  double next();

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Adds i.i.d. Gaussian perturbations of absolute scale sigma; sigma = 0
// returns the input unchanged.
DecayTrace add_noise(const DecayTrace& trace, double sigma,
                     std::uint64_t seed);
std::vector<double> add_noise(const std::vector<double>& values, double sigma,
                              std::uint64_t seed);

}  // namespace qedlab
