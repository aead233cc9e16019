#pragma once

#include "jamloc/common.hpp"

namespace jamloc::rf {

/// Baseline environmental noise level.
constexpr double kAmbientNoiseDbm = -100.0;
/// Shortest device-jammer separation used in path loss evaluation; distances
/// below this are clamped to avoid the log singularity.
constexpr double kMinDistanceM = 0.1;

struct PropagationParams {
  double pl0_db = 40.0;     ///< reference path loss at d0 (approx. 1 m free-space at 2.4 GHz)
  double gamma = 3.0;       ///< path loss exponent
  double sigma_db = 4.0;    ///< shadowing standard deviation
  double d0_m = 1.0;        ///< reference distance
  double ambient_noise_dbm = kAmbientNoiseDbm;

  bool operator==(const PropagationParams&) const = default;
};

struct JammerConfig {
  Vec3 position;
  double tx_power_dbm = 30.0;
  double tx_gain_dbi = 0.0;
  double rx_gain_dbi = 0.0;

  bool operator==(const JammerConfig&) const = default;
};

inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
inline double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }

/// Log-distance path loss in dB. `shadowing_db` is a pre-drawn Gaussian sample
/// (pass 0 for deterministic evaluation). Throws std::domain_error for d <= 0.
double path_loss_ldpl(double distance_m, const PropagationParams& params, double shadowing_db);

/// Received jammer power at a device position, in dBm. The device-jammer
/// distance is clamped to kMinDistanceM.
double jammer_rssi(const Vec3& device_pos, const JammerConfig& jammer,
                   const PropagationParams& params, double shadowing_db);

/// Combines ambient noise and jammer interference in linear scale:
/// 10*log10(10^(ambient/10) + 10^(jammer/10)).
double noise_floor(double jammer_rssi_dbm, double ambient_dbm = kAmbientNoiseDbm);

}  // namespace jamloc::rf
