#include "qedlab/fit.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>

#include "qedlab/errors.hpp"
#include "qedlab/units.hpp"

namespace qedlab {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr int kMaxIterations = 200;
constexpr double kStepTol = 1e-10;

// Fills f(p) and J = df/dp row-per-point for a scalar model on abscissa x.
// Every fit below rescales its data to O(1) variables first, so the normal
// equations stay well conditioned whatever units the caller used.
using ModelFn =
    std::function<void(const VectorXd& p, const std::vector<double>& x,
                       VectorXd& f, MatrixXd& j)>;

struct LMOutcome {
  VectorXd p;
  double cost = 0.0;
  int iterations = 0;
  bool converged = false;
  MatrixXd covariance;
};

// Damped Gauss-Newton: (J^T J + lambda diag(J^T J)) step = J^T r with
// multiplicative lambda adaptation. Deterministic: no randomness, fixed
// iteration policy.
LMOutcome lm_minimize(const ModelFn& model, const std::vector<double>& x,
                      const VectorXd& y, const VectorXd& inv_sigma,
                      const VectorXd& p0) {
  const auto n = static_cast<Eigen::Index>(x.size());
  const Eigen::Index m = p0.size();

  VectorXd f(n);
  MatrixXd j(n, m);
  VectorXd p = p0;

  const auto weighted_residual = [&](const VectorXd& params, VectorXd& out) {
    model(params, x, f, j);
    out = (y - f).cwiseProduct(inv_sigma);
  };

  VectorXd r(n);
  weighted_residual(p, r);
  MatrixXd jw = inv_sigma.asDiagonal() * j;
  double cost = 0.5 * r.squaredNorm();

  LMOutcome out;
  double lambda = 1e-3;
  for (int iter = 1; iter <= kMaxIterations; ++iter) {
    out.iterations = iter;
    const MatrixXd jtj = jw.transpose() * jw;
    const VectorXd g = jw.transpose() * r;

    bool stepped = false;
    for (int attempt = 0; attempt < 32; ++attempt) {
      MatrixXd damped = jtj;
      for (Eigen::Index k = 0; k < m; ++k) {
        damped(k, k) += lambda * std::max(jtj(k, k), 1e-30);
      }
      const VectorXd step = damped.ldlt().solve(g);
      if (!step.allFinite()) {
        lambda *= 4.0;
        continue;
      }
      const VectorXd trial = p + step;
      VectorXd r_trial(n);
      weighted_residual(trial, r_trial);
      const double trial_cost = 0.5 * r_trial.squaredNorm();
      if (std::isfinite(trial_cost) && trial_cost <= cost) {
        const double rel_step = step.norm() / (p.norm() + 1e-300);
        p = trial;
        r = r_trial;
        jw = inv_sigma.asDiagonal() * j;
        cost = trial_cost;
        lambda = std::max(lambda / 3.0, 1e-14);
        stepped = true;
        if (rel_step < kStepTol) {
          out.converged = true;
        }
        break;
      }
      lambda *= 4.0;
    }
    if (!stepped) {
      // No damping produced a downhill step: the current point is the
      // minimum to working precision.
      out.converged = true;
    }
    if (out.converged) {
      break;
    }
  }

  out.p = p;
  out.cost = cost;
  if (n > m) {
    const MatrixXd jtj = jw.transpose() * jw;
    const Eigen::FullPivLU<MatrixXd> lu(jtj);
    if (lu.isInvertible()) {
      const double variance = 2.0 * cost / static_cast<double>(n - m);
      out.covariance = variance * lu.inverse();
    }
  }
  return out;
}

VectorXd unit_weights(std::size_t n) {
  return VectorXd::Ones(static_cast<Eigen::Index>(n));
}

double rms(double cost, std::size_t n) {
  return std::sqrt(2.0 * cost / static_cast<double>(n));
}

FitResult failed(const std::string& why) {
  FitResult fr;
  fr.converged = false;
  fr.message = why;
  return fr;
}

// Maps a diagonal parameter rescale p = scale .* p' (+shift) back onto the
// covariance of p'.
MatrixXd rescale_covariance(const MatrixXd& cov, const VectorXd& scale) {
  if (cov.size() == 0) {
    return cov;
  }
  return scale.asDiagonal() * cov * scale.asDiagonal();
}

}  // namespace

void DecayTrace::validate(std::size_t min_points) const {
  if (delays.size() != values.size()) {
    throw Error(ErrorKind::grid, "trace: delays/values size mismatch");
  }
  if (delays.size() < min_points) {
    throw Error(ErrorKind::grid, "trace: too few points for this fit");
  }
  for (std::size_t i = 1; i < delays.size(); ++i) {
    if (!(delays[i] > delays[i - 1])) {
      throw Error(ErrorKind::grid, "trace: delays must increase strictly");
    }
  }
  if (!sigma.empty()) {
    if (sigma.size() != values.size()) {
      throw Error(ErrorKind::grid, "trace: sigma size mismatch");
    }
    for (double s : sigma) {
      if (!(s > 0.0)) {
        throw Error(ErrorKind::grid, "trace: sigma must be positive");
      }
    }
  }
}

FitResult fit_exponential(const DecayTrace& trace) {
  trace.validate(4);
  const std::size_t n = trace.values.size();

  // Baseline from the tail, amplitude sign from the head.
  const std::size_t tail = std::max<std::size_t>(1, n / 10);
  double c0 = 0.0;
  for (std::size_t i = n - tail; i < n; ++i) {
    c0 += trace.values[i];
  }
  c0 /= static_cast<double>(tail);

  double span = 0.0;
  for (double v : trace.values) {
    span = std::max(span, std::abs(v - c0));
  }
  if (span == 0.0) {
    return failed("flat trace, nothing to fit");
  }
  const double sign = (trace.values.front() - c0) >= 0.0 ? 1.0 : -1.0;

  // Log-linear regression on baseline-subtracted points that are still
  // clearly above the baseline.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = sign * (trace.values[i] - c0);
    if (d > 0.05 * span) {
      const double ly = std::log(d);
      sx += trace.delays[i];
      sy += ly;
      sxx += trace.delays[i] * trace.delays[i];
      sxy += trace.delays[i] * ly;
      ++m;
    }
  }
  if (m < 2) {
    return failed("no decaying segment above the baseline");
  }
  const double det = m * sxx - sx * sx;
  const double slope = (m * sxy - sx * sy) / det;
  const double intercept = (sy * sxx - sx * sxy) / det;
  const double r0 = -slope;
  const double a0 = sign * std::exp(intercept);
  if (!(r0 > 0.0)) {
    return failed("trace does not decay (initial rate <= 0)");
  }

  // Dimensionless problem: time in units of 1/r0, signal in units of span.
  const double t_scale = 1.0 / r0;
  const double y_scale = span;
  std::vector<double> xs(n);
  VectorXd ys(static_cast<Eigen::Index>(n));
  VectorXd inv_sigma = unit_weights(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = trace.delays[i] / t_scale;
    ys(static_cast<Eigen::Index>(i)) = (trace.values[i] - c0) / y_scale;
    if (!trace.sigma.empty()) {
      inv_sigma(static_cast<Eigen::Index>(i)) = y_scale / trace.sigma[i];
    }
  }

  const ModelFn model = [](const VectorXd& p, const std::vector<double>& x,
                           VectorXd& f, MatrixXd& j) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      const double e = std::exp(-p(1) * x[i]);
      f(k) = p(0) * e + p(2);
      j(k, 0) = e;
      j(k, 1) = -p(0) * x[i] * e;
      j(k, 2) = 1.0;
    }
  };

  VectorXd p0(3);
  p0 << a0 / y_scale, 1.0, 0.0;
  const LMOutcome lm = lm_minimize(model, xs, ys, inv_sigma, p0);

  FitResult fr;
  fr.iterations = lm.iterations;
  fr.residual_rms =
      trace.sigma.empty() ? rms(lm.cost, n) * y_scale : rms(lm.cost, n);
  VectorXd scale(3);
  scale << y_scale, 1.0 / t_scale, y_scale;
  fr.covariance = rescale_covariance(lm.covariance, scale);
  if (!lm.converged) {
    fr.message = "no convergence within the iteration budget";
    return fr;
  }
  const double rate = lm.p(1) / t_scale;
  if (!(rate > 0.0)) {
    fr.message = "fitted rate is not positive";
    return fr;
  }
  fr.converged = true;
  fr.params["amplitude"] = lm.p(0) * y_scale;
  fr.params["rate_per_s"] = rate;
  fr.params["rate_mhz"] = angular_to_mhz(rate);
  fr.params["offset"] = c0 + lm.p(2) * y_scale;
  return fr;
}

FitResult fit_damped_oscillation(const DecayTrace& trace) {
  trace.validate(8);
  const std::size_t n = trace.values.size();
  const double span = trace.delays.back() - trace.delays.front();

  double mean = 0.0;
  for (double v : trace.values) {
    mean += v;
  }
  mean /= static_cast<double>(n);

  // Seed the frequency from the dominant discrete-transform bin.
  const std::size_t n_bins = n / 2;
  double best_mag = 0.0;
  double best_freq = 0.0;
  std::vector<double> mags;
  mags.reserve(n_bins);
  for (std::size_t k = 1; k <= n_bins; ++k) {
    const double f = static_cast<double>(k) / span;
    std::complex<double> acc(0.0, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double ph = -kTwoPi * f * trace.delays[i];
      acc += (trace.values[i] - mean) *
             std::complex<double>(std::cos(ph), std::sin(ph));
    }
    const double mag = std::abs(acc);
    mags.push_back(mag);
    if (mag > best_mag) {
      best_mag = mag;
      best_freq = f;
    }
  }
  std::nth_element(mags.begin(), mags.begin() + mags.size() / 2, mags.end());
  if (!(best_mag > 3.0 * mags[mags.size() / 2])) {
    return failed("no spectral peak above the noise floor");
  }
  const double omega0 = kTwoPi * best_freq;

  // Crude decay seed from the RMS drop between the two halves.
  double rms1 = 0.0, rms2 = 0.0;
  std::size_t n1 = 0, n2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = trace.values[i] - mean;
    if (trace.delays[i] < trace.delays.front() + 0.5 * span) {
      rms1 += d * d;
      ++n1;
    } else {
      rms2 += d * d;
      ++n2;
    }
  }
  rms1 = std::sqrt(rms1 / std::max<std::size_t>(n1, 1));
  rms2 = std::sqrt(rms2 / std::max<std::size_t>(n2, 1));
  double lambda0 = 0.0;
  if (rms1 > 0.0 && rms2 > 0.0 && rms1 > rms2) {
    lambda0 = 2.0 * std::log(rms1 / rms2) / span;
  }

  // Dimensionless problem: time in units of 1/omega0.
  const double t_scale = 1.0 / omega0;
  std::vector<double> xs(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = trace.delays[i] / t_scale;
  }

  // Exact linear subproblem for the two quadratures and the offset.
  Eigen::Matrix3d ata = Eigen::Matrix3d::Zero();
  Eigen::Vector3d aty = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    const double t = xs[i];
    const double e = std::exp(-lambda0 * t_scale * t);
    const Eigen::Vector3d row(e * std::sin(t), e * std::cos(t), 1.0);
    ata += row * row.transpose();
    aty += row * trace.values[i];
  }
  const Eigen::Vector3d abc = ata.ldlt().solve(aty);

  double y_scale = std::max(std::hypot(abc(0), abc(1)), 1e-300);
  VectorXd ys(static_cast<Eigen::Index>(n));
  VectorXd inv_sigma = unit_weights(n);
  for (std::size_t i = 0; i < n; ++i) {
    ys(static_cast<Eigen::Index>(i)) = trace.values[i] / y_scale;
    if (!trace.sigma.empty()) {
      inv_sigma(static_cast<Eigen::Index>(i)) = y_scale / trace.sigma[i];
    }
  }

  const ModelFn model = [](const VectorXd& p, const std::vector<double>& x,
                           VectorXd& f, MatrixXd& j) {
    // p = (a, b, lambda, omega, c), time already in 1/omega0 units
    for (std::size_t i = 0; i < x.size(); ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      const double t = x[i];
      const double e = std::exp(-p(2) * t);
      const double s = std::sin(p(3) * t);
      const double c = std::cos(p(3) * t);
      f(k) = e * (p(0) * s + p(1) * c) + p(4);
      j(k, 0) = e * s;
      j(k, 1) = e * c;
      j(k, 2) = -t * e * (p(0) * s + p(1) * c);
      j(k, 3) = t * e * (p(0) * c - p(1) * s);
      j(k, 4) = 1.0;
    }
  };

  VectorXd p0(5);
  p0 << abc(0) / y_scale, abc(1) / y_scale, lambda0 * t_scale, 1.0,
      abc(2) / y_scale;
  const LMOutcome lm = lm_minimize(model, xs, ys, inv_sigma, p0);

  FitResult fr;
  fr.iterations = lm.iterations;
  fr.residual_rms =
      trace.sigma.empty() ? rms(lm.cost, n) * y_scale : rms(lm.cost, n);
  VectorXd scale(5);
  scale << y_scale, y_scale, 1.0 / t_scale, 1.0 / t_scale, y_scale;
  fr.covariance = rescale_covariance(lm.covariance, scale);
  if (!lm.converged) {
    fr.message = "no convergence within the iteration budget";
    return fr;
  }

  double a = lm.p(0) * y_scale;
  const double b = lm.p(1) * y_scale;
  double omega = lm.p(3) / t_scale;
  if (omega < 0.0) {
    // sin(-w t) = -sin(w t): fold onto the positive-frequency branch.
    omega = -omega;
    a = -a;
  }
  double phase = std::atan2(b, a);
  if (phase < 0.0) {
    phase += kTwoPi;
  }
  fr.converged = true;
  fr.params["amplitude"] = std::hypot(a, b);
  fr.params["frequency_per_s"] = omega;
  fr.params["frequency_mhz"] = angular_to_mhz(omega);
  fr.params["decay_per_s"] = std::abs(lm.p(2)) / t_scale;
  fr.params["decay_mhz"] = angular_to_mhz(std::abs(lm.p(2)) / t_scale);
  fr.params["phase_rad"] = phase;
  fr.params["offset"] = lm.p(4) * y_scale;
  return fr;
}

FitResult fit_lorentzian(const std::vector<double>& x,
                         const std::vector<double>& y) {
  if (x.size() != y.size()) {
    throw Error(ErrorKind::grid, "lorentzian: x/y size mismatch");
  }
  if (x.size() < 8) {
    throw Error(ErrorKind::grid, "lorentzian: need at least 8 points");
  }
  const std::size_t n = x.size();

  double c0 = y[0];
  for (double v : y) {
    c0 = std::min(c0, v);
  }
  std::size_t i_max = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (y[i] > y[i_max]) {
      i_max = i;
    }
  }
  const double h0 = y[i_max] - c0;
  if (!(h0 > 0.0) || i_max == 0 || i_max == n - 1) {
    return failed("no interior peak in the data");
  }

  // Half-height crossings seed the width.
  const double half = c0 + 0.5 * h0;
  double w_right = 0.0, w_left = 0.0;
  for (std::size_t i = i_max; i < n; ++i) {
    if (y[i] <= half) {
      w_right = x[i] - x[i_max];
      break;
    }
  }
  for (std::size_t i = i_max + 1; i-- > 0;) {
    if (y[i] <= half) {
      w_left = x[i_max] - x[i];
      break;
    }
  }
  double w0 = 0.5 * (w_left + w_right);
  if (!(w0 > 0.0)) {
    w0 = std::max(w_left, w_right);
  }
  if (!(w0 > 0.0)) {
    w0 = 0.25 * (x.back() - x.front());
  }

  // Dimensionless problem: abscissa centered on the seed peak in units of
  // the seed width, ordinate in units of the seed height.
  const double x0 = x[i_max];
  std::vector<double> xs(n);
  VectorXd ys(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = (x[i] - x0) / w0;
    ys(static_cast<Eigen::Index>(i)) = (y[i] - c0) / h0;
  }

  const ModelFn model = [](const VectorXd& p, const std::vector<double>& xv,
                           VectorXd& f, MatrixXd& j) {
    // p = (height, center, hwhm, offset)
    for (std::size_t i = 0; i < xv.size(); ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      const double dx = xv[i] - p(1);
      const double w2 = p(2) * p(2);
      const double den = dx * dx + w2;
      f(k) = p(0) * w2 / den + p(3);
      j(k, 0) = w2 / den;
      j(k, 1) = p(0) * w2 * 2.0 * dx / (den * den);
      j(k, 2) = p(0) * 2.0 * p(2) * dx * dx / (den * den);
      j(k, 3) = 1.0;
    }
  };

  VectorXd p0(4);
  p0 << 1.0, 0.0, 1.0, 0.0;
  const LMOutcome lm = lm_minimize(model, xs, ys, unit_weights(n), p0);

  FitResult fr;
  fr.iterations = lm.iterations;
  fr.residual_rms = rms(lm.cost, n) * h0;
  VectorXd scale(4);
  scale << h0, w0, w0, h0;
  fr.covariance = rescale_covariance(lm.covariance, scale);
  if (!lm.converged) {
    fr.message = "no convergence within the iteration budget";
    return fr;
  }
  if (!(lm.p(0) > 0.0)) {
    fr.message = "fitted height is not positive";
    return fr;
  }
  fr.converged = true;
  fr.params["height"] = lm.p(0) * h0;
  fr.params["center"] = x0 + lm.p(1) * w0;
  fr.params["center_mhz"] = (x0 + lm.p(1) * w0) / 1e6;
  fr.params["hwhm"] = std::abs(lm.p(2)) * w0;
  fr.params["hwhm_mhz"] = std::abs(lm.p(2)) * w0 / 1e6;
  fr.params["offset"] = c0 + lm.p(3) * h0;
  return fr;
}

double GaussianStream::next() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  // Uniforms built directly from the engine words so the stream does not
  // depend on library-specific distribution internals.
  const double u1 =
      (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;  // (0,1]
  const double u2 = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  const double r = std::sqrt(-2.0 * std::log(u1));
  spare_ = r * std::sin(kTwoPi * u2);
  have_spare_ = true;
  return r * std::cos(kTwoPi * u2);
}

std::vector<double> add_noise(const std::vector<double>& values, double sigma,
                              std::uint64_t seed) {
  if (sigma < 0.0) {
    throw Error(ErrorKind::parameter, "add_noise: sigma must be >= 0");
  }
  if (sigma == 0.0) {
    return values;
  }
  GaussianStream g(seed);
  std::vector<double> out = values;
  for (double& v : out) {
    v += sigma * g.next();
  }
  return out;
}

DecayTrace add_noise(const DecayTrace& trace, double sigma,
                     std::uint64_t seed) {
  DecayTrace out = trace;
  out.values = add_noise(trace.values, sigma, seed);
  return out;
}

}  // namespace qedlab
