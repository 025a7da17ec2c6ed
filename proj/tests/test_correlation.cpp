#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "qedlab/correlation.hpp"
#include "qedlab/errors.hpp"
#include "qedlab/units.hpp"
#include "test_util.hpp"

using namespace qedlab;
using namespace qedlab::test;

namespace {

std::vector<double> short_grid(double t_max, std::size_t n) {
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) {
    g[i] = t_max * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  return g;
}

}  // namespace

TEST_CASE("initial condition: strong drive is (1, i, 0)/2") {
  const Eigen::Vector3cd s0 = regression_initial_condition(
      paper_atom(), drive_mhz(140.0), InitMode::strong_drive);
  CHECK(s0(0) == std::complex<double>(0.5, 0.0));
  CHECK(s0(1) == std::complex<double>(0.0, 0.5));
  CHECK(s0(2) == std::complex<double>(0.0, 0.0));
}

TEST_CASE("initial condition: general mode approaches it at strong drive") {
  const Eigen::Vector3cd strong = regression_initial_condition(
      paper_atom(), drive_mhz(500.0), InitMode::strong_drive);
  const Eigen::Vector3cd general = regression_initial_condition(
      paper_atom(), drive_mhz(500.0), InitMode::general);
  for (int k = 0; k < 3; ++k) {
    CHECK(std::abs(general(k) - strong(k)) < 0.02);
  }
}

TEST_CASE("initial condition: the undriven ground state has no "
          "fluctuation correlations") {
  const Eigen::Vector3cd s0 = regression_initial_condition(
      paper_atom(), DriveField{0.0, 0.0}, InitMode::general);
  CHECK(s0.norm() < 1e-15);
}

TEST_CASE("correlation_direct: C(0) = 1/2 and undriven silence") {
  const auto grid = short_grid(50e-9, 101);
  const CorrelationTrace strong = correlation_direct(
      paper_atom(), drive_mhz(140.0), grid, InitMode::strong_drive);
  CHECK(strong.values[0].real() == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(std::abs(strong.values[0].imag()) < 1e-12);

  const CorrelationTrace silent = correlation_direct(
      paper_atom(), DriveField{0.0, 0.0}, grid, InitMode::general);
  for (const auto& v : silent.values) {
    CHECK(std::abs(v) < 1e-15);
  }
}

TEST_CASE("correlation_direct: oscillates near Omega with an envelope "
          "between gamma2 and the mean rate") {
  const AtomParams atom = paper_atom();
  const DriveField drive = drive_mhz(140.0);
  const auto grid = default_correlation_grid(atom, drive);
  const CorrelationTrace c =
      correlation_direct(atom, drive, grid, InitMode::strong_drive);

  // Locate successive maxima of Re C.
  std::vector<double> peak_t, peak_v;
  for (std::size_t i = 1; i + 1 < c.values.size() && peak_t.size() < 6; ++i) {
    const double prev = c.values[i - 1].real();
    const double here = c.values[i].real();
    const double next = c.values[i + 1].real();
    if (here >= prev && here > next && here > 1e-3) {
      peak_t.push_back(c.t_grid[i]);
      peak_v.push_back(here);
    }
  }
  REQUIRE(peak_t.size() >= 4);
  const double period = kTwoPi / drive.rabi;
  for (std::size_t k = 0; k + 1 < peak_t.size(); ++k) {
    CHECK(std::abs((peak_t[k + 1] - peak_t[k]) - period) < 0.03 * period);
  }
  // Effective envelope rate: between the x-quadrature decay gamma2 and the
  // rotating-pair decay (gamma1 + gamma2)/2.
  const double rate =
      std::log(peak_v[0] / peak_v[3]) / (peak_t[3] - peak_t[0]);
  CHECK(rate > 0.98 * atom.gamma2);
  CHECK(rate < 1.02 * 0.5 * (atom.gamma1 + atom.gamma2));
}

TEST_CASE("differencing: C(0) = 1/2 from the four preparations") {
  const auto grid = short_grid(10e-9, 11);
  const DifferencingResult r =
      correlation_via_differencing(paper_atom(), drive_mhz(140.0), grid);
  CHECK(r.corr.values[0].real() == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(std::abs(r.corr.values[0].imag()) < 1e-14);
  // Four full evolutions sampled on the same grid come along.
  for (const auto& traj : r.trajectories) {
    CHECK(traj.states.size() == grid.size());
  }
  CHECK(r.trajectories[0].states[0].sx == doctest::Approx(1.0));
  CHECK(r.trajectories[3].states[0].sy == doctest::Approx(-1.0));
}

TEST_CASE("differencing equals the direct regression solution") {
  std::mt19937_64 eng(4242);
  for (int i = 0; i < 200; ++i) {
    const RandomParams rp = draw_params(eng);
    const double slowest =
        std::min(rp.atom.gamma2, 0.5 * (rp.atom.gamma1 + rp.atom.gamma2));
    const auto grid = short_grid(3.0 / slowest, 64);
    const CorrelationTrace direct = correlation_direct(
        rp.atom, rp.drive, grid, InitMode::strong_drive);
    const DifferencingResult diff =
        correlation_via_differencing(rp.atom, rp.drive, grid);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      CHECK(std::abs(diff.corr.values[k] - direct.values[k]) < 1e-10);
    }
  }
}

TEST_CASE("differencing: pulsed preparations at zero damping match the "
          "ideal axes") {
  const AtomParams atom = lossless_atom();
  const DriveField drive = drive_mhz(140.0);
  const auto grid = short_grid(30e-9, 61);
  const DifferencingResult ideal = correlation_via_differencing(
      atom, drive, grid, PrepStyle::ideal);
  const DifferencingResult pulsed = correlation_via_differencing(
      atom, drive, grid, PrepStyle::pulsed);
  // The pair differencing cancels the calibration's 1e-13 s bisection
  // tolerance to first order; what survives is (Omega * 1e-13)^2 / 2.
  const double tol = drive.rabi * 1e-13 * drive.rabi * 1e-13;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    CHECK(std::abs(ideal.corr.values[k] - pulsed.corr.values[k]) < tol);
  }
}

TEST_CASE("differencing robustness: a common preparation-phase offset "
          "only dephases the trace") {
  const AtomParams atom = paper_atom();
  const DriveField drive = drive_mhz(140.0);
  const auto grid = short_grid(60e-9, 121);
  const double dphi = 0.05;

  const DifferencingResult base = correlation_via_differencing(
      atom, drive, grid, PrepStyle::pulsed, 0.0);
  const DifferencingResult off = correlation_via_differencing(
      atom, drive, grid, PrepStyle::pulsed, dphi);

  double peak = 0.0;
  for (const auto& v : base.corr.values) {
    peak = std::max(peak, std::abs(v));
  }
  for (std::size_t k = 0; k < grid.size(); ++k) {
    // The offset multiplies C by exactly e^{i dphi}: the measured real
    // part moves only at second order, the magnitude not at all.
    CHECK(std::abs(off.corr.values[k].real() - base.corr.values[k].real()) <=
          10.0 * dphi * dphi * peak);
    CHECK(std::abs(std::abs(off.corr.values[k]) -
                   std::abs(base.corr.values[k])) < 1e-12);
  }
}

TEST_CASE("default correlation grid decays below 1e-6 of C(0)") {
  const AtomParams atom = paper_atom();
  const DriveField drive = drive_mhz(140.0);
  const auto grid = default_correlation_grid(atom, drive);
  CHECK(grid.front() == 0.0);
  const CorrelationTrace c =
      correlation_direct(atom, drive, grid, InitMode::strong_drive);
  CHECK(std::abs(c.values.back()) <= 1e-6 * std::abs(c.values.front()));
}

TEST_CASE("general-mode C(0) stays within the physical band") {
  std::mt19937_64 eng(5150);
  for (int i = 0; i < 100; ++i) {
    const RandomParams rp = draw_params(eng);
    const auto grid = short_grid(1e-9, 2);
    const CorrelationTrace c =
        correlation_direct(rp.atom, rp.drive, grid, InitMode::general);
    CHECK(c.values[0].real() >= -1e-12);
    CHECK(c.values[0].real() <= 0.5 + 1e-9);
  }
}

TEST_CASE("correlation grids must start at zero and increase") {
  CHECK_THROWS_AS(correlation_direct(paper_atom(), drive_mhz(140.0),
                                     {1e-9, 2e-9}, InitMode::strong_drive),
                  Error);
  CHECK_THROWS_AS(correlation_direct(paper_atom(), drive_mhz(140.0),
                                     {0.0, 2e-9, 2e-9}, InitMode::strong_drive),
                  Error);
}
