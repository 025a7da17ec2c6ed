#include <doctest.h>

#include <cstring>

#include "qedlab/correlation.hpp"
#include "qedlab/pulses.hpp"
#include "qedlab/spectrum.hpp"
#include "qedlab/units.hpp"
#include "test_util.hpp"

using namespace qedlab;
using namespace qedlab::test;

// The OpenMP kernels compute every element independently, so they must
// reproduce the serial reference bit for bit.

namespace {

bool same_bits(const std::vector<BlochVector>& a,
               const std::vector<BlochVector>& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), a.size() * sizeof(BlochVector)) == 0;
}

}  // namespace

TEST_CASE("parallel trajectory sampling is bitwise serial") {
  const auto grid = linspace(0.0, 200e-9, 5001);
  const BlochVector s0{0.0, 0.0, -1.0};
  const BlochTrajectory ser =
      trajectory(s0, paper_atom(), drive_mhz(140.0), grid, Exec::serial);
  const BlochTrajectory par =
      trajectory(s0, paper_atom(), drive_mhz(140.0), grid, Exec::parallel);
  CHECK(same_bits(ser.states, par.states));
}

TEST_CASE("parallel rabi sweep is bitwise serial") {
  const auto grid = linspace(0.0, 60e-9, 1201);
  const ReadoutConfig cfg{0.0, 50e-9, 250e-9};
  const auto ser = rabi_experiment(paper_atom(), drive_mhz(140.0), grid, cfg,
                                   Exec::serial);
  const auto par = rabi_experiment(paper_atom(), drive_mhz(140.0), grid, cfg,
                                   Exec::parallel);
  REQUIRE(ser.size() == par.size());
  for (std::size_t i = 0; i < ser.size(); ++i) {
    CHECK(std::memcmp(&ser[i].state, &par[i].state, sizeof(BlochVector)) == 0);
    CHECK(ser[i].record.i_avg == par[i].record.i_avg);
    CHECK(ser[i].record.p_avg == par[i].record.p_avg);
  }
}

TEST_CASE("parallel decay experiments are bitwise serial") {
  const auto delays = linspace(0.0, 100e-9, 401);
  const DecayTrace t2s =
      t2_experiment(paper_atom(), drive_mhz(140.0), delays, Exec::serial);
  const DecayTrace t2p =
      t2_experiment(paper_atom(), drive_mhz(140.0), delays, Exec::parallel);
  CHECK(t2s.values == t2p.values);

  const DecayTrace t1s =
      t1_experiment(paper_atom(), drive_mhz(140.0), delays, Exec::serial);
  const DecayTrace t1p =
      t1_experiment(paper_atom(), drive_mhz(140.0), delays, Exec::parallel);
  CHECK(t1s.values == t1p.values);
}

TEST_CASE("parallel correlation routes are bitwise serial") {
  const AtomParams atom = paper_atom();
  const DriveField drive = drive_mhz(140.0);
  const auto grid = default_correlation_grid(atom, drive);

  const CorrelationTrace ds = correlation_direct(
      atom, drive, grid, InitMode::strong_drive, Exec::serial);
  const CorrelationTrace dp = correlation_direct(
      atom, drive, grid, InitMode::strong_drive, Exec::parallel);
  CHECK(ds.values == dp.values);

  const DifferencingResult fs = correlation_via_differencing(
      atom, drive, grid, PrepStyle::ideal, 0.0, Exec::serial);
  const DifferencingResult fp = correlation_via_differencing(
      atom, drive, grid, PrepStyle::ideal, 0.0, Exec::parallel);
  CHECK(fs.corr.values == fp.corr.values);
  for (int k = 0; k < 4; ++k) {
    CHECK(same_bits(fs.trajectories[k].states, fp.trajectories[k].states));
  }
}

TEST_CASE("parallel spectrum transform is bitwise serial") {
  const AtomParams atom = paper_atom();
  const DriveField drive = drive_mhz(140.0);
  const CorrelationTrace corr =
      correlation_direct(atom, drive, default_correlation_grid(atom, drive));
  const Spectrum ser = incoherent_spectrum(corr, atom, {}, Exec::serial);
  const Spectrum par = incoherent_spectrum(corr, atom, {}, Exec::parallel);
  CHECK(ser.detuning == par.detuning);
  CHECK(ser.density == par.density);
}
