#include "jamloc/rf.hpp"

namespace jamloc::rf {

double path_loss_ldpl(double distance_m, const PropagationParams& params, double shadowing_db) {
  if (distance_m <= 0.0) {
    throw std::domain_error("path_loss_ldpl: distance must be positive, got " +
                            std::to_string(distance_m));
  }
  return params.pl0_db + 10.0 * params.gamma * std::log10(distance_m / params.d0_m) +
         shadowing_db;
}

double jammer_rssi(const Vec3& device_pos, const JammerConfig& jammer,
                   const PropagationParams& params, double shadowing_db) {
  const double d = std::max(distance(device_pos, jammer.position), kMinDistanceM);
  return jammer.tx_power_dbm + jammer.tx_gain_dbi + jammer.rx_gain_dbi -
         path_loss_ldpl(d, params, shadowing_db);
}

double noise_floor(double jammer_rssi_dbm, double ambient_dbm) {
  // -inf jammer power means zero interference; the sum below handles it since
  // 10^(-inf) == 0.
  return mw_to_dbm(dbm_to_mw(ambient_dbm) + dbm_to_mw(jammer_rssi_dbm));
}

}  // namespace jamloc::rf
