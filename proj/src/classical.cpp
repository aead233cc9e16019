#include "jamloc/classical.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include <Eigen/Dense>

#include "jamloc/graph.hpp"

namespace jamloc::classical {

std::string to_string(EstimatorKind k) {
  switch (k) {
    case EstimatorKind::kWcl: return "wcl";
    case EstimatorKind::kMlat: return "mlat";
    case EstimatorKind::kMle: return "mle";
    case EstimatorKind::kLsq: return "lsq";
    case EstimatorKind::kPl: return "pl";
    case EstimatorKind::kModel: return "model";
  }
  throw std::logic_error("unreachable");
}

EstimatorKind estimator_from_string(const std::string& s) {
  if (s == "wcl") return EstimatorKind::kWcl;
  if (s == "mlat") return EstimatorKind::kMlat;
  if (s == "mle") return EstimatorKind::kMle;
  if (s == "lsq") return EstimatorKind::kLsq;
  if (s == "pl") return EstimatorKind::kPl;
  throw std::invalid_argument("unknown estimator: " + s);
}

EstimateResult wcl(const std::vector<scenario::MeasurementSample>& samples) {
  if (samples.empty()) throw std::invalid_argument("wcl: no samples");
  std::vector<Vec3> positions;
  std::vector<double> noise;
  positions.reserve(samples.size());
  noise.reserve(samples.size());
  for (const auto& s : samples) {
    positions.push_back(s.position);
    noise.push_back(s.noise_dbm);
  }
  EstimateResult r;
  r.position_m = graph::weighted_centroid(positions, noise);
  r.estimator = EstimatorKind::kWcl;
  return r;
}

namespace {

int infer_dims(const std::vector<scenario::MeasurementSample>& samples) {
  for (const auto& s : samples) {
    if (s.position.z != 0.0) return 3;
  }
  return 2;
}

std::vector<size_t> usable_indices(const std::vector<scenario::MeasurementSample>& samples,
                                   const FitOptions& opts) {
  std::vector<size_t> idx;
  for (size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].noise_dbm >= opts.ambient_dbm + opts.jam_threshold_db) idx.push_back(i);
  }
  return idx;
}

// Jammer RSSI recovered from the composed noise floor by subtracting the
// ambient level in linear scale.
double recovered_rssi_dbm(double noise_dbm, double ambient_dbm) {
  const double mw = rf::dbm_to_mw(noise_dbm) - rf::dbm_to_mw(ambient_dbm);
  return rf::mw_to_dbm(std::max(mw, 1e-300));
}

struct LmProblem {
  // Residual vector and Jacobian at parameters theta.
  std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&, Eigen::MatrixXd&)> evaluate;
};

struct LmOutcome {
  Eigen::VectorXd theta;
  double objective = 0.0;
  bool converged = false;
};

LmOutcome levenberg_marquardt(const LmProblem& problem, Eigen::VectorXd theta, int max_iterations,
                              double gradient_tolerance,
                              const std::function<void(Eigen::VectorXd&)>& project = {}) {
  Eigen::VectorXd residual;
  Eigen::MatrixXd jacobian;
  problem.evaluate(theta, residual, jacobian);
  double objective = residual.squaredNorm();
  double damping = 1e-4;
  LmOutcome out{theta, objective, false};

  for (int iter = 0; iter < max_iterations; ++iter) {
    const Eigen::VectorXd gradient = 2.0 * jacobian.transpose() * residual;
    if (gradient.norm() < gradient_tolerance) {
      out.converged = true;
      break;
    }
    const Eigen::MatrixXd hessian = jacobian.transpose() * jacobian;
    bool stepped = false;
    for (int trial = 0; trial < 12 && !stepped; ++trial) {
      Eigen::MatrixXd damped = hessian;
      damped.diagonal().array() += damping;
      const Eigen::VectorXd delta = damped.ldlt().solve(-0.5 * gradient);
      Eigen::VectorXd candidate = theta + delta;
      if (project) project(candidate);
      Eigen::VectorXd cand_res;
      Eigen::MatrixXd cand_jac;
      problem.evaluate(candidate, cand_res, cand_jac);
      const double cand_obj = cand_res.squaredNorm();
      if (cand_obj < objective) {
        theta = candidate;
        residual = cand_res;
        jacobian = cand_jac;
        objective = cand_obj;
        damping = std::max(damping * 0.5, 1e-12);
        stepped = true;
      } else {
        damping *= 4.0;
      }
    }
    if (!stepped) break;  // stuck; keep best iterate
  }
  out.theta = theta;
  out.objective = objective;
  return out;
}

Eigen::VectorXd to_vector(const Vec3& p, int dims) {
  Eigen::VectorXd v(dims);
  v[0] = p.x;
  v[1] = p.y;
  if (dims == 3) v[2] = p.z;
  return v;
}

Vec3 to_vec3(const Eigen::VectorXd& v) {
  return {v[0], v[1], v.size() > 2 ? v[2] : 0.0};
}

PathlossFit fit_at_position(const std::vector<scenario::MeasurementSample>& samples,
                            const std::vector<size_t>& usable, const Vec3& position,
                            const FitOptions& opts) {
  if (usable.size() < static_cast<size_t>(opts.min_usable_samples)) {
    throw EstimatorInfeasibleError("fit_pathloss: only " + std::to_string(usable.size()) +
                                   " samples above the jam threshold");
  }
  double mean_t = 0.0;
  double mean_y = 0.0;
  std::vector<double> ts(usable.size());
  std::vector<double> ys(usable.size());
  for (size_t n = 0; n < usable.size(); ++n) {
    const auto& s = samples[usable[n]];
    const double d = std::max(distance(position, s.position), rf::kMinDistanceM);
    ts[n] = std::log10(d / opts.d0_m);
    ys[n] = recovered_rssi_dbm(s.noise_dbm, opts.ambient_dbm);
    mean_t += ts[n];
    mean_y += ys[n];
  }
  mean_t /= static_cast<double>(usable.size());
  mean_y /= static_cast<double>(usable.size());
  double cov = 0.0;
  double var = 0.0;
  for (size_t n = 0; n < usable.size(); ++n) {
    cov += (ts[n] - mean_t) * (ys[n] - mean_y);
    var += (ts[n] - mean_t) * (ts[n] - mean_t);
  }
  if (var < 1e-12) {
    throw EstimatorInfeasibleError("fit_pathloss: degenerate geometry, all samples equidistant");
  }
  const double slope = cov / var;
  const double intercept = mean_y - slope * mean_t;
  PathlossFit fit;
  fit.gamma_hat = -slope / 10.0;
  fit.tx_power_dbm_hat = intercept + opts.pl0_db;
  fit.position = position;
  return fit;
}

std::vector<double> invert_distances(const std::vector<scenario::MeasurementSample>& samples,
                                     const std::vector<size_t>& usable, const PathlossFit& fit,
                                     const FitOptions& opts) {
  const double c = fit.tx_power_dbm_hat - opts.pl0_db;
  const double gamma = std::clamp(fit.gamma_hat, 0.5, 8.0);
  std::vector<double> d(usable.size());
  for (size_t n = 0; n < usable.size(); ++n) {
    const double y = recovered_rssi_dbm(samples[usable[n]].noise_dbm, opts.ambient_dbm);
    d[n] = std::clamp(opts.d0_m * std::pow(10.0, (c - y) / (10.0 * gamma)), rf::kMinDistanceM,
                      1e7);
  }
  return d;
}

// One position update for mlat: damped Gauss-Newton on range residuals.
LmOutcome solve_ranges(const std::vector<scenario::MeasurementSample>& samples,
                       const std::vector<size_t>& usable, const std::vector<double>& ranges,
                       const Eigen::VectorXd& init, int dims, const FitOptions& opts) {
  LmProblem problem;
  problem.evaluate = [&](const Eigen::VectorXd& theta, Eigen::VectorXd& r, Eigen::MatrixXd& J) {
    r.resize(usable.size());
    J.resize(usable.size(), dims);
    for (size_t n = 0; n < usable.size(); ++n) {
      const Eigen::VectorXd anchor = to_vector(samples[usable[n]].position, dims);
      const Eigen::VectorXd diff = theta - anchor;
      const double dist = std::max(diff.norm(), 1e-9);
      r[n] = dist - ranges[n];
      J.row(n) = diff.transpose() / dist;
    }
  };
  return levenberg_marquardt(problem, init, opts.max_solver_iterations, opts.gradient_tolerance);
}

// One position update for lsq: pairwise-difference linearization solved in
// closed form; near-singular systems get ridge damping.
struct LinearSolveResult {
  Eigen::VectorXd position;
  bool ridged = false;
};

LinearSolveResult solve_linearized(const std::vector<scenario::MeasurementSample>& samples,
                                   const std::vector<size_t>& usable,
                                   const std::vector<double>& ranges, int dims) {
  size_t ref = 0;
  for (size_t n = 1; n < usable.size(); ++n) {
    if (samples[usable[n]].noise_dbm > samples[usable[ref]].noise_dbm) ref = n;
  }
  const Eigen::VectorXd xr = to_vector(samples[usable[ref]].position, dims);
  const double dr2 = ranges[ref] * ranges[ref];
  Eigen::MatrixXd A(usable.size() - 1, dims);
  Eigen::VectorXd b(usable.size() - 1);
  int row = 0;
  for (size_t n = 0; n < usable.size(); ++n) {
    if (n == ref) continue;
    const Eigen::VectorXd xi = to_vector(samples[usable[n]].position, dims);
    A.row(row) = 2.0 * (xr - xi).transpose();
    b[row] = ranges[n] * ranges[n] - dr2 - xi.squaredNorm() + xr.squaredNorm();
    ++row;
  }
  const Eigen::MatrixXd normal = A.transpose() * A;
  const Eigen::VectorXd rhs = A.transpose() * b;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(normal);
  LinearSolveResult out;
  if (lu.isInvertible() && lu.rcond() > 1e-10) {
    out.position = lu.solve(rhs);
  } else {
    Eigen::MatrixXd damped = normal;
    damped.diagonal().array() += 1e-8;
    out.position = damped.ldlt().solve(rhs);
    out.ridged = true;
  }
  return out;
}

EstimateResult fallback_to_wcl(const std::vector<scenario::MeasurementSample>& samples,
                               EstimatorKind kind) {
  EstimateResult r = wcl(samples);
  r.estimator = kind;
  r.fallback = true;
  r.converged = false;
  return r;
}

double range_objective(const std::vector<scenario::MeasurementSample>& samples,
                       const std::vector<size_t>& usable, const std::vector<double>& ranges,
                       const Eigen::VectorXd& x, int dims) {
  double acc = 0.0;
  for (size_t n = 0; n < usable.size(); ++n) {
    const double d = (x - to_vector(samples[usable[n]].position, dims)).norm();
    acc += (d - ranges[n]) * (d - ranges[n]);
  }
  return acc;
}

// Alternate (path-loss fit at x) with (position update from inverted ranges)
// until the position settles.
struct AlternationResult {
  Eigen::VectorXd position;
  PathlossFit fit;
  double objective = 0.0;
  bool converged = false;
  bool ridged = false;
};

AlternationResult alternate(const std::vector<scenario::MeasurementSample>& samples,
                            const std::vector<size_t>& usable, Eigen::VectorXd x, int dims,
                            const FitOptions& opts, bool linearized) {
  AlternationResult out;
  out.position = x;
  for (int outer = 0; outer < opts.max_outer_iterations; ++outer) {
    const PathlossFit fit = fit_at_position(samples, usable, to_vec3(x), opts);
    const std::vector<double> ranges = invert_distances(samples, usable, fit, opts);
    Eigen::VectorXd next;
    bool inner_ok = true;
    if (linearized) {
      LinearSolveResult ls = solve_linearized(samples, usable, ranges, dims);
      next = ls.position;
      out.ridged = out.ridged || ls.ridged;
    } else {
      LmOutcome lm = solve_ranges(samples, usable, ranges, x, dims, opts);
      next = lm.theta;
      inner_ok = lm.converged;
    }
    const double shift = (next - x).norm();
    x = next;
    out.position = x;
    out.fit = fit;
    out.objective = range_objective(samples, usable, ranges, x, dims);
    if (shift < 1e-10) {
      out.converged = inner_ok;
      break;
    }
  }
  return out;
}

EstimateResult range_based_estimate(const std::vector<scenario::MeasurementSample>& samples,
                                    EstimatorKind kind, const FitOptions& opts, bool linearized) {
  const std::vector<size_t> usable = usable_indices(samples, opts);
  const int dims = infer_dims(samples);
  if (usable.size() < static_cast<size_t>(std::max(opts.min_usable_samples, dims + 2))) {
    return fallback_to_wcl(samples, kind);
  }

  const EstimateResult prior = wcl(samples);
  std::vector<Eigen::VectorXd> starts;
  starts.push_back(to_vector(prior.position_m, dims));
  size_t strongest = usable[0];
  for (size_t i : usable) {
    if (samples[i].noise_dbm > samples[strongest].noise_dbm) strongest = i;
  }
  starts.push_back(to_vector(samples[strongest].position, dims));

  AlternationResult best;
  bool have_best = false;
  for (const auto& start : starts) {
    try {
      AlternationResult r = alternate(samples, usable, start, dims, opts, linearized);
      if (!have_best || r.objective < best.objective) {
        best = r;
        have_best = true;
      }
    } catch (const EstimatorInfeasibleError&) {
      continue;
    }
  }
  if (!have_best) return fallback_to_wcl(samples, kind);

  EstimateResult result;
  result.position_m = to_vec3(best.position);
  result.estimator = kind;
  result.converged = best.converged && !best.ridged;
  if (best.fit.gamma_hat > 0.0) result.fit = best.fit;
  return result;
}

// Joint damped Gauss-Newton over (position, gamma, emitted power).
EstimateResult model_fit_estimate(const std::vector<scenario::MeasurementSample>& samples,
                                  EstimatorKind kind, const FitOptions& opts,
                                  bool raw_noise_residuals) {
  const std::vector<size_t> usable = usable_indices(samples, opts);
  const int dims = infer_dims(samples);
  if (usable.size() < static_cast<size_t>(std::max(opts.min_usable_samples, dims + 2))) {
    return fallback_to_wcl(samples, kind);
  }
  const EstimateResult prior = wcl(samples);
  PathlossFit init_fit;
  try {
    init_fit = fit_at_position(samples, usable, prior.position_m, opts);
  } catch (const EstimatorInfeasibleError&) {
    return fallback_to_wcl(samples, kind);
  }

  // Residuals over all samples for the raw variant, jammed samples otherwise.
  std::vector<size_t> active = raw_noise_residuals ? [&] {
    std::vector<size_t> all(samples.size());
    for (size_t i = 0; i < samples.size(); ++i) all[i] = i;
    return all;
  }() : usable;

  const double ambient_mw = rf::dbm_to_mw(opts.ambient_dbm);
  const double ln10 = std::log(10.0);

  LmProblem problem;
  problem.evaluate = [&](const Eigen::VectorXd& theta, Eigen::VectorXd& r, Eigen::MatrixXd& J) {
    const double gamma = theta[dims];
    const double emitted = theta[dims + 1];  // tx power + gains - reference loss
    r.resize(active.size());
    J.resize(active.size(), dims + 2);
    for (size_t n = 0; n < active.size(); ++n) {
      const auto& s = samples[active[n]];
      const Eigen::VectorXd anchor = to_vector(s.position, dims);
      Eigen::VectorXd diff = theta.head(dims) - anchor;
      const double dist = std::max(diff.norm(), rf::kMinDistanceM);
      const double t = std::log10(dist / opts.d0_m);
      const double mu = emitted - 10.0 * gamma * t;  // modeled jammer RSSI, dBm
      // d(mu)/d(position) shared by both residual forms
      Eigen::VectorXd dmu_dx = -10.0 * gamma / (ln10 * dist * dist) * diff;
      double scale;
      if (raw_noise_residuals) {
        const double jam_mw = rf::dbm_to_mw(mu);
        const double total = ambient_mw + jam_mw;
        r[n] = s.noise_dbm - rf::mw_to_dbm(total);
        scale = jam_mw / total;
      } else {
        r[n] = recovered_rssi_dbm(s.noise_dbm, opts.ambient_dbm) - mu;
        scale = 1.0;
      }
      J.row(n).head(dims) = -scale * dmu_dx.transpose();
      J(n, dims) = scale * 10.0 * t;
      J(n, dims + 1) = -scale;
    }
  };

  Eigen::VectorXd theta(dims + 2);
  theta.head(dims) = to_vector(prior.position_m, dims);
  theta[dims] = std::clamp(init_fit.gamma_hat, opts.gamma_min, opts.gamma_max);
  theta[dims + 1] = init_fit.tx_power_dbm_hat - opts.pl0_db;

  auto project = [&](Eigen::VectorXd& t) {
    t[dims] = std::clamp(t[dims], opts.gamma_min, opts.gamma_max);
  };
  LmOutcome lm = levenberg_marquardt(problem, theta, opts.max_solver_iterations,
                                     opts.gradient_tolerance, project);

  EstimateResult result;
  result.position_m = to_vec3(lm.theta.head(dims).eval());
  result.estimator = kind;
  result.converged = lm.converged;
  PathlossFit fit;
  fit.gamma_hat = lm.theta[dims];
  fit.tx_power_dbm_hat = lm.theta[dims + 1] + opts.pl0_db;
  fit.position = result.position_m;
  result.fit = fit;
  return result;
}

}  // namespace

PathlossFit fit_pathloss(const std::vector<scenario::MeasurementSample>& samples,
                         const FitOptions& opts) {
  return fit_pathloss_at(samples, wcl(samples).position_m, opts);
}

PathlossFit fit_pathloss_at(const std::vector<scenario::MeasurementSample>& samples,
                            const Vec3& position, const FitOptions& opts) {
  return fit_at_position(samples, usable_indices(samples, opts), position, opts);
}

EstimateResult mlat(const std::vector<scenario::MeasurementSample>& samples,
                    const FitOptions& opts) {
  return range_based_estimate(samples, EstimatorKind::kMlat, opts, /*linearized=*/false);
}

EstimateResult lsq(const std::vector<scenario::MeasurementSample>& samples,
                   const FitOptions& opts) {
  return range_based_estimate(samples, EstimatorKind::kLsq, opts, /*linearized=*/true);
}

EstimateResult mle(const std::vector<scenario::MeasurementSample>& samples,
                   const FitOptions& opts) {
  return model_fit_estimate(samples, EstimatorKind::kMle, opts, /*raw_noise_residuals=*/false);
}

EstimateResult pl(const std::vector<scenario::MeasurementSample>& samples,
                  const FitOptions& opts) {
  return model_fit_estimate(samples, EstimatorKind::kPl, opts, /*raw_noise_residuals=*/true);
}

EstimateResult estimate(EstimatorKind kind, const std::vector<scenario::MeasurementSample>& samples,
                        const FitOptions& opts) {
  switch (kind) {
    case EstimatorKind::kWcl: return wcl(samples);
    case EstimatorKind::kMlat: return mlat(samples, opts);
    case EstimatorKind::kMle: return mle(samples, opts);
    case EstimatorKind::kLsq: return lsq(samples, opts);
    case EstimatorKind::kPl: return pl(samples, opts);
    case EstimatorKind::kModel:
      throw std::invalid_argument("estimate: model estimators are built from checkpoints");
  }
  throw std::logic_error("unreachable");
}

}  // namespace jamloc::classical
