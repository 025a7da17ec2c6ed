#pragma once

#include <vector>

#include "qedlab/correlation.hpp"

namespace qedlab {

// One-direction incoherent emission spectral density S(f) = 2*pi*S(omega)
// against detuning from the atomic line, carrying the physical
// hbar*omega_a*Gamma1 prefactor (W/Hz) unless normalized to unit peak.
struct Spectrum {
  std::vector<double> detuning;  // Hz
  std::vector<double> density;   // W/Hz (or unit peak when normalized)
};

struct SpectrumOptions {
  // Frequency resolution is 1/(pad_factor * t_max): the discrete transform
  // is evaluated on a grid this fine, equivalent to zero-padding the trace
  // pad_factor times before an FFT.
  int pad_factor = 8;
  double f_max = 0.0;       // Hz half-span; 0 = everything up to Nyquist
  bool normalized = false;  // scale the peak to exactly 1
};

// Transforms the correlation trace: Hermitian extension C(-t) = conj C(t),
// trapezoid-weighted discrete transform, so S is real by construction.
// The trace must reach |C| <= 1e-6 |C(0)|; otherwise a truncation error
// reports the horizon that would be needed.
Spectrum incoherent_spectrum(const CorrelationTrace& corr,
                             const AtomParams& atom,
                             const SpectrumOptions& opts = {},
                             Exec exec = Exec::parallel);

struct AnalyticSpectrum {
  Spectrum spectrum;
  // True when the closed-form eigenvalue route was used; false means the
  // generator was too close to degenerate and the numerical transform of a
  // default-grid trace was interpolated instead.
  bool eigen_route = true;
};

// Closed-form spectrum: C(t) is a sum of three complex exponentials from
// the eigendecomposition of B, so S is the matching sum of (generalized)
// Lorentzians -2 Re[beta_k / (lambda_k + i omega)]. Serves as the
// independent oracle for the transform route.
AnalyticSpectrum analytic_triplet(const AtomParams& atom,
                                  const DriveField& drive,
                                  const std::vector<double>& detuning_hz,
                                  InitMode mode = InitMode::strong_drive,
                                  bool normalized = false);

// Spectrum of the free decay of a saturated atom (<sigma_z> = 0, no
// drive): C(t) = exp(-gamma2 t)/2, i.e. a Lorentzian of HWHM gamma2/2pi
// centered on the line.
Spectrum free_induction_spectrum(const AtomParams& atom,
                                 const SpectrumOptions& opts = {},
                                 Exec exec = Exec::parallel);

}  // namespace qedlab
