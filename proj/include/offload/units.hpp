#pragma once

#include <cmath>

// Everything inside the library is SI: bits, bits/s, cycles, cycles/s (Hz),
// watts, joules, seconds. These helpers convert at the file/CLI boundary.
namespace offload::units {

inline constexpr double kGiga = 1e9;
inline constexpr double kMega = 1e6;

constexpr double ghz_to_hz(double ghz) { return ghz * kGiga; }
constexpr double hz_to_ghz(double hz) { return hz / kGiga; }
constexpr double gbps_to_bps(double gbps) { return gbps * kGiga; }
constexpr double bps_to_gbps(double bps) { return bps / kGiga; }
constexpr double gbit_to_bits(double gbit) { return gbit * kGiga; }
constexpr double bits_to_gbit(double bits) { return bits / kGiga; }

/// cycles per Gbit -> cycles per bit.
constexpr double per_gbit_to_per_bit(double per_gbit) { return per_gbit / kGiga; }

inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watts_to_dbm(double watts) { return 10.0 * std::log10(watts) + 30.0; }

/// 10^6 cycles/Gbit, the workload intensity used throughout the experiments.
inline constexpr double kDefaultCyclesPerBit = per_gbit_to_per_bit(1e6);

}  // namespace offload::units
