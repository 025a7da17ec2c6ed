#include "qedlab/spectrum.hpp"

#include <cmath>
#include <complex>
#include <sstream>

#include "qedlab/errors.hpp"
#include "qedlab/units.hpp"

namespace qedlab {

namespace {

// Uniform step of the trace grid, or a grid error.
double uniform_step(const std::vector<double>& t) {
  const double h = t[1] - t[0];
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (std::abs(t[i] - t[i - 1] - h) > 1e-9 * h) {
      throw Error(ErrorKind::grid, "spectrum: trace grid must be uniform");
    }
  }
  return h;
}

void normalize_peak(Spectrum& s) {
  double peak = 0.0;
  for (double v : s.density) {
    peak = std::max(peak, v);
  }
  if (!(peak > 0.0)) {
    throw Error(ErrorKind::numeric, "spectrum: cannot normalize a zero peak");
  }
  for (double& v : s.density) {
    v /= peak;
  }
}

}  // namespace

Spectrum incoherent_spectrum(const CorrelationTrace& corr,
                             const AtomParams& atom,
                             const SpectrumOptions& opts, Exec exec) {
  atom.validate();
  if (corr.t_grid.size() < 2 || corr.t_grid.size() != corr.values.size()) {
    throw Error(ErrorKind::grid, "spectrum: trace needs >= 2 matched points");
  }
  if (corr.t_grid.front() != 0.0) {
    throw Error(ErrorKind::grid, "spectrum: trace must start at t = 0");
  }
  if (opts.pad_factor < 8) {
    throw Error(ErrorKind::parameter, "spectrum: pad_factor must be >= 8");
  }
  const double h = uniform_step(corr.t_grid);
  const std::size_t n = corr.t_grid.size();
  const double t_max = corr.t_grid.back();

  const double c0 = std::abs(corr.values.front());
  const double c_end = std::abs(corr.values.back());
  if (c0 > 0.0 && c_end > 1e-6 * c0) {
    // Estimate the decay seen over the trailing half and report how far
    // the trace would have to run.
    const std::size_t mid = n / 2;
    const double c_mid = std::abs(corr.values[mid]);
    double required = t_max * 2.0;
    if (c_mid > c_end && c_end > 0.0) {
      const double rate =
          std::log(c_mid / c_end) / (t_max - corr.t_grid[mid]);
      required = t_max + std::log(c_end / (1e-6 * c0)) / rate;
    }
    std::ostringstream msg;
    msg << "spectrum: trace truncated before decaying to 1e-6 of C(0); "
        << "extend t_max to about " << required << " s";
    throw Error(ErrorKind::truncation, msg.str());
  }

  const double df = 1.0 / (static_cast<double>(opts.pad_factor) * t_max);
  const double nyquist = 1.0 / (2.0 * h);
  const double f_max =
      opts.f_max > 0.0 ? std::min(opts.f_max, nyquist) : nyquist;
  const auto k_max = static_cast<std::int64_t>(std::floor(f_max / df));

  Spectrum spec;
  spec.detuning.resize(2 * k_max + 1);
  spec.density.resize(2 * k_max + 1);

  const double prefactor = kHBar * atom.omega_a * atom.gamma1;
  parallel_for(2 * k_max + 1, exec, [&](std::int64_t idx) {
    const std::int64_t k = idx - k_max;
    const double f = static_cast<double>(k) * df;
    const double w = kTwoPi * f;
    // One-sided trapezoid sum of C(t) e^{i w t}; the Hermitian extension
    // to t < 0 doubles its real part.
    const std::complex<double> step(std::cos(w * h), std::sin(w * h));
    std::complex<double> phase(1.0, 0.0);
    std::complex<double> acc(0.0, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      const double weight = (j == 0 || j == n - 1) ? 0.5 : 1.0;
      acc += weight * corr.values[j] * phase;
      phase *= step;
    }
    spec.detuning[idx] = f;
    spec.density[idx] = prefactor * 2.0 * h * acc.real();
  });

  if (opts.normalized) {
    normalize_peak(spec);
  }
  return spec;
}

AnalyticSpectrum analytic_triplet(const AtomParams& atom,
                                  const DriveField& drive,
                                  const std::vector<double>& detuning_hz,
                                  InitMode mode, bool normalized) {
  atom.validate();
  drive.validate();
  if (atom.undamped()) {
    throw Error(ErrorKind::degenerate_system,
                "analytic spectrum: lossless atom has no line shape");
  }
  if (detuning_hz.empty()) {
    throw Error(ErrorKind::grid, "analytic spectrum: empty detuning grid");
  }

  const BlochGenerator gen = build_bloch_generator(atom, drive);
  const EigDecomp eig = eig_decompose(gen.b_matrix);

  AnalyticSpectrum out;
  if (!eig.ok) {
    // Nearly degenerate eigenvalues: fall back to the transform route and
    // interpolate onto the requested grid.
    out.eigen_route = false;
    const CorrelationTrace trace = correlation_direct(
        atom, drive, default_correlation_grid(atom, drive), mode);
    SpectrumOptions opts;
    const Spectrum fine = incoherent_spectrum(trace, atom, opts);
    out.spectrum.detuning = detuning_hz;
    out.spectrum.density.resize(detuning_hz.size());
    for (std::size_t i = 0; i < detuning_hz.size(); ++i) {
      const double f = detuning_hz[i];
      if (f <= fine.detuning.front()) {
        out.spectrum.density[i] = fine.density.front();
      } else if (f >= fine.detuning.back()) {
        out.spectrum.density[i] = fine.density.back();
      } else {
        const auto it = std::lower_bound(fine.detuning.begin(),
                                         fine.detuning.end(), f);
        const std::size_t hi = it - fine.detuning.begin();
        const std::size_t lo = hi - 1;
        const double u = (f - fine.detuning[lo]) /
                         (fine.detuning[hi] - fine.detuning[lo]);
        out.spectrum.density[i] =
            (1.0 - u) * fine.density[lo] + u * fine.density[hi];
      }
    }
    if (normalized) {
      normalize_peak(out.spectrum);
    }
    return out;
  }

  const Eigen::Vector3cd s0 = regression_initial_condition(atom, drive, mode);
  const Eigen::Vector3cd alpha = eig.vectors_inv * s0;
  const std::complex<double> i1(0.0, 1.0);
  Eigen::Vector3cd beta;
  for (int k = 0; k < 3; ++k) {
    beta(k) = 0.5 * alpha(k) * (eig.vectors(0, k) - i1 * eig.vectors(1, k));
  }

  const double prefactor = kHBar * atom.omega_a * atom.gamma1;
  out.spectrum.detuning = detuning_hz;
  out.spectrum.density.resize(detuning_hz.size());
  for (std::size_t i = 0; i < detuning_hz.size(); ++i) {
    const double w = kTwoPi * detuning_hz[i];
    std::complex<double> sum(0.0, 0.0);
    for (int k = 0; k < 3; ++k) {
      sum += beta(k) / (eig.eigenvalues(k) + i1 * w);
    }
    out.spectrum.density[i] = prefactor * (-2.0) * sum.real();
  }
  if (normalized) {
    normalize_peak(out.spectrum);
  }
  return out;
}

Spectrum free_induction_spectrum(const AtomParams& atom,
                                 const SpectrumOptions& opts, Exec exec) {
  atom.validate();
  if (!(atom.gamma2 > 0.0)) {
    throw Error(ErrorKind::parameter,
                "free induction: gamma2 must be positive");
  }
  // A saturated atom (sz = 0, no coherence) left alone: the fluctuation
  // correlation is exp(-gamma2 t)/2.
  CorrelationTrace trace;
  trace.t_grid = default_correlation_grid(atom, DriveField{0.0, 0.0});
  trace.values.resize(trace.t_grid.size());
  for (std::size_t i = 0; i < trace.t_grid.size(); ++i) {
    trace.values[i] = 0.5 * std::exp(-atom.gamma2 * trace.t_grid[i]);
  }
  return incoherent_spectrum(trace, atom, opts, exec);
}

}  // namespace qedlab
