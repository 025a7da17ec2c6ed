#pragma once

// Unit conventions used throughout the library:
//   * every rate and frequency is stored as an angular quantity in rad/s,
//   * every time is stored in seconds,
//   * file and CLI boundaries speak linear MHz / GHz and nanoseconds.
// The conversion helpers below are the only place the 2*pi factor lives.

namespace qedlab {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;
inline constexpr double kHBar = 1.0546e-34;  // J s

constexpr double mhz_to_angular(double f_mhz) { return kTwoPi * f_mhz * 1e6; }
constexpr double angular_to_mhz(double w) { return w / (kTwoPi * 1e6); }
constexpr double ghz_to_angular(double f_ghz) { return kTwoPi * f_ghz * 1e9; }
constexpr double angular_to_ghz(double w) { return w / (kTwoPi * 1e9); }

constexpr double ns_to_s(double t_ns) { return t_ns * 1e-9; }
constexpr double s_to_ns(double t_s) { return t_s * 1e9; }

}  // namespace qedlab
