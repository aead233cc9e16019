#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "jamloc/scenario.hpp"

namespace jamloc::classical {

enum class EstimatorKind { kWcl, kMlat, kMle, kLsq, kPl, kModel };

std::string to_string(EstimatorKind k);
EstimatorKind estimator_from_string(const std::string& s);

struct PathlossFit {
  double gamma_hat = 0.0;
  double tx_power_dbm_hat = 0.0;
  Vec3 position;  ///< candidate position the fit was evaluated at
};

struct EstimateResult {
  Vec3 position_m;
  EstimatorKind estimator = EstimatorKind::kWcl;
  bool converged = true;
  /// Set when a model-based estimator was infeasible and the WCL estimate was
  /// substituted.
  bool fallback = false;
  std::optional<PathlossFit> fit;
  std::optional<std::array<double, 5>> confidence;
};

struct FitOptions {
  /// Reference constants assumed known by the fitting model; they match the
  /// generator defaults.
  double pl0_db = 40.0;
  double d0_m = 1.0;
  double ambient_dbm = rf::kAmbientNoiseDbm;
  double jam_threshold_db = 3.0;
  int min_usable_samples = 4;
  int max_outer_iterations = 60;
  int max_solver_iterations = 100;
  double gradient_tolerance = 1e-8;
  double gamma_min = 2.0;
  double gamma_max = 6.0;
};

/// Linear-scale noise-weighted mean of sample positions.
EstimateResult wcl(const std::vector<scenario::MeasurementSample>& samples);

/// Linear least-squares fit of (path loss exponent, transmit power) in
/// log-distance, evaluated at a candidate position (the WCL estimate by
/// default). Throws EstimatorInfeasibleError with fewer than 4 samples above
/// the jam threshold or degenerate geometry.
PathlossFit fit_pathloss(const std::vector<scenario::MeasurementSample>& samples,
                         const FitOptions& opts = {});
PathlossFit fit_pathloss_at(const std::vector<scenario::MeasurementSample>& samples,
                            const Vec3& position, const FitOptions& opts = {});

/// Range-based estimators. Each alternates parameter fitting with a position
/// solve from the WCL initialization; infeasible inputs fall back to WCL with
/// the fallback flag set.
EstimateResult mlat(const std::vector<scenario::MeasurementSample>& samples,
                    const FitOptions& opts = {});
EstimateResult lsq(const std::vector<scenario::MeasurementSample>& samples,
                   const FitOptions& opts = {});
EstimateResult mle(const std::vector<scenario::MeasurementSample>& samples,
                   const FitOptions& opts = {});
EstimateResult pl(const std::vector<scenario::MeasurementSample>& samples,
                  const FitOptions& opts = {});

EstimateResult estimate(EstimatorKind kind, const std::vector<scenario::MeasurementSample>& samples,
                        const FitOptions& opts = {});

}  // namespace jamloc::classical
