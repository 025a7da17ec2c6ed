// Times the OpenMP kernels against their serial reference and checks that
// both produce identical bytes. Usage: qedlab_bench [repeats]

#include <chrono>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "qedlab/correlation.hpp"
#include "qedlab/pulses.hpp"
#include "qedlab/spectrum.hpp"
#include "qedlab/units.hpp"

using namespace qedlab;

namespace {

AtomParams bench_atom() {
  AtomParams a;
  a.omega_a = ghz_to_angular(9.888);
  a.gamma1 = mhz_to_angular(18.3);
  a.gamma2 = mhz_to_angular(9.1);
  a.phi_p = 13.6e-12 * 213e-9;
  a.z_line = 50.0;
  return a;
}

template <typename F>
double time_ms(int repeats, F&& body) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto start = std::chrono::steady_clock::now();
    body();
    const auto stop = std::chrono::steady_clock::now();
    best = std::min(
        best, std::chrono::duration<double, std::milli>(stop - start).count());
  }
  return best;
}

void report(const std::string& name, double serial_ms, double parallel_ms,
            bool identical) {
  std::printf("%-28s serial %9.2f ms   parallel %9.2f ms   x%.2f   %s\n",
              name.c_str(), serial_ms, parallel_ms, serial_ms / parallel_ms,
              identical ? "identical" : "MISMATCH");
}

bool same_states(const std::vector<BlochVector>& a,
                 const std::vector<BlochVector>& b) {
  return std::memcmp(a.data(), b.data(), a.size() * sizeof(BlochVector)) == 0;
}

}  // namespace

int main(int argc, char** argv) {
  const int repeats = argc > 1 ? std::atoi(argv[1]) : 3;
  const AtomParams atom = bench_atom();
  const DriveField drive{mhz_to_angular(140.0), 0.0};

  {
    std::vector<double> grid(200000);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      grid[i] = static_cast<double>(i) * 1e-12;
    }
    const BlochVector s0{0.0, 0.0, -1.0};
    BlochTrajectory ser, par;
    const double ts = time_ms(repeats, [&] {
      ser = trajectory(s0, atom, drive, grid, Exec::serial);
    });
    const double tp = time_ms(repeats, [&] {
      par = trajectory(s0, atom, drive, grid, Exec::parallel);
    });
    report("trajectory (200k points)", ts, tp, same_states(ser.states, par.states));
  }

  {
    std::vector<double> grid(40000);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      grid[i] = ns_to_s(static_cast<double>(i) * 0.002);
    }
    const ReadoutConfig rcfg{0.0, ns_to_s(50.0), ns_to_s(250.0)};
    std::vector<RabiPoint> ser, par;
    const double ts = time_ms(repeats, [&] {
      ser = rabi_experiment(atom, drive, grid, rcfg, Exec::serial);
    });
    const double tp = time_ms(repeats, [&] {
      par = rabi_experiment(atom, drive, grid, rcfg, Exec::parallel);
    });
    bool same = ser.size() == par.size();
    for (std::size_t i = 0; same && i < ser.size(); ++i) {
      same = std::memcmp(&ser[i].state, &par[i].state, sizeof(BlochVector)) == 0;
    }
    report("rabi sweep (40k pulses)", ts, tp, same);
  }

  {
    const std::vector<double> grid = default_correlation_grid(atom, drive);
    DifferencingResult ser, par;
    const double ts = time_ms(repeats, [&] {
      ser = correlation_via_differencing(atom, drive, grid, PrepStyle::ideal,
                                         0.0, Exec::serial);
    });
    const double tp = time_ms(repeats, [&] {
      par = correlation_via_differencing(atom, drive, grid, PrepStyle::ideal,
                                         0.0, Exec::parallel);
    });
    const bool same =
        std::memcmp(ser.corr.values.data(), par.corr.values.data(),
                    ser.corr.values.size() * sizeof(std::complex<double>)) == 0;
    report("differencing correlation", ts, tp, same);
  }

  {
    const CorrelationTrace corr = correlation_direct(
        atom, drive, default_correlation_grid(atom, drive));
    SpectrumOptions opts;
    Spectrum ser, par;
    const double ts = time_ms(repeats, [&] {
      ser = incoherent_spectrum(corr, atom, opts, Exec::serial);
    });
    const double tp = time_ms(repeats, [&] {
      par = incoherent_spectrum(corr, atom, opts, Exec::parallel);
    });
    const bool same = std::memcmp(ser.density.data(), par.density.data(),
                                  ser.density.size() * sizeof(double)) == 0;
    report("spectrum transform", ts, tp, same);
  }

  return 0;
}
