#include "jamloc/scenario.hpp"

#include <algorithm>
#include <cmath>

#include "jamloc/geometry.hpp"

namespace jamloc::scenario {

std::string to_string(Topology t) {
  switch (t) {
    case Topology::kCircle: return "circle";
    case Topology::kTriangle: return "triangle";
    case Topology::kRectangle: return "rectangle";
    case Topology::kRandom: return "random";
    case Topology::kTrajectory: return "trajectory";
  }
  throw std::logic_error("unreachable");
}

std::string to_string(Placement p) {
  switch (p) {
    case Placement::kInsideRegion: return "inside_R";
    case Placement::kOutsideRegion: return "outside_R";
    case Placement::kNotApplicable: return "n/a";
  }
  throw std::logic_error("unreachable");
}

Topology topology_from_string(const std::string& s) {
  if (s == "circle") return Topology::kCircle;
  if (s == "triangle") return Topology::kTriangle;
  if (s == "rectangle") return Topology::kRectangle;
  if (s == "random") return Topology::kRandom;
  if (s == "trajectory") return Topology::kTrajectory;
  throw std::invalid_argument("unknown topology: " + s);
}

Placement placement_from_string(const std::string& s) {
  if (s == "inside_R") return Placement::kInsideRegion;
  if (s == "outside_R") return Placement::kOutsideRegion;
  if (s == "n/a" || s == "na" || s == "any") return Placement::kNotApplicable;
  throw std::invalid_argument("unknown placement: " + s);
}

int max_node_count(const AreaBounds& area, double comm_range_m, int min_nodes) {
  const double cells = (area.width() / comm_range_m) * (area.height() / comm_range_m);
  const int cap = static_cast<int>(std::floor(2.17 * cells));
  return std::max(min_nodes, cap);
}

bool instance_is_valid(const ScenarioInstance& inst, double jam_threshold_db,
                       double detect_threshold_dbm) {
  const double ambient = inst.propagation.ambient_noise_dbm;
  int jammed = 0;
  bool detected = false;
  for (const auto& s : inst.samples) {
    if (!s.position.finite() || !std::isfinite(s.noise_dbm)) return false;
    if (s.noise_dbm >= ambient + jam_threshold_db) ++jammed;
    if (s.noise_dbm >= detect_threshold_dbm) detected = true;
  }
  return jammed >= 3 && detected;
}

namespace {

// Urban vs shadowed-urban exponent bands; static scenarios mix the two,
// trajectories stay urban (matching the narrower exponent spread of the
// dynamic statistics).
double sample_gamma_static(Rng& rng) {
  return rng.bernoulli(0.85) ? rng.uniform(2.7, 3.5) : rng.uniform(3.0, 5.0);
}
double sample_gamma_dynamic(Rng& rng) { return rng.uniform(2.7, 3.5); }

rf::PropagationParams sample_propagation(Rng& rng, bool is_static) {
  rf::PropagationParams p;
  p.gamma = is_static ? sample_gamma_static(rng) : sample_gamma_dynamic(rng);
  p.sigma_db = rng.uniform(2.0, 6.0);
  return p;
}

std::vector<Vec3> place_circle(Rng& rng, const AreaBounds& area, int n) {
  const double r = rng.uniform(0.08, 0.45) * std::min(area.width(), area.height());
  const Vec3 c{rng.uniform(area.min.x + r, area.max.x - r),
               rng.uniform(area.min.y + r, area.max.y - r)};
  std::vector<Vec3> pts(n);
  for (int i = 0; i < n; ++i) {
    const double a = rng.uniform(0.0, 2.0 * M_PI);
    pts[i] = {c.x + r * std::cos(a), c.y + r * std::sin(a)};
  }
  return pts;
}

std::vector<Vec3> place_triangle(Rng& rng, const AreaBounds& area, int n) {
  const double r = rng.uniform(0.08, 0.45) * std::min(area.width(), area.height());
  const Vec3 c{rng.uniform(area.min.x + r, area.max.x - r),
               rng.uniform(area.min.y + r, area.max.y - r)};
  const double phase = rng.uniform(0.0, 2.0 * M_PI);
  Vec3 v[3];
  for (int k = 0; k < 3; ++k) {
    const double a = phase + 2.0 * M_PI * k / 3.0;
    v[k] = {c.x + r * std::cos(a), c.y + r * std::sin(a)};
  }
  std::vector<Vec3> pts(n);
  for (int i = 0; i < n; ++i) {
    const double t = rng.uniform(0.0, 3.0);
    const int side = std::min(2, static_cast<int>(t));
    const double frac = t - side;
    const Vec3& a = v[side];
    const Vec3& b = v[(side + 1) % 3];
    pts[i] = a + (b - a) * frac;
  }
  return pts;
}

std::vector<Vec3> place_rectangle(Rng& rng, const AreaBounds& area, int n) {
  const double w = rng.uniform(0.1, 0.9) * area.width();
  const double h = rng.uniform(0.1, 0.9) * area.height();
  const double x0 = rng.uniform(area.min.x, area.max.x - w);
  const double y0 = rng.uniform(area.min.y, area.max.y - h);
  std::vector<Vec3> pts(n);
  for (int i = 0; i < n; ++i) pts[i] = {x0 + rng.uniform(0.0, w), y0 + rng.uniform(0.0, h)};
  return pts;
}

std::vector<Vec3> place_disk(Rng& rng, const AreaBounds& area, int n) {
  const double r = rng.uniform(0.08, 0.45) * std::min(area.width(), area.height());
  const Vec3 c{rng.uniform(area.min.x + r, area.max.x - r),
               rng.uniform(area.min.y + r, area.max.y - r)};
  std::vector<Vec3> pts(n);
  for (int i = 0; i < n; ++i) {
    const double rad = r * std::sqrt(rng.uniform());
    const double a = rng.uniform(0.0, 2.0 * M_PI);
    pts[i] = {c.x + rad * std::cos(a), c.y + rad * std::sin(a)};
  }
  return pts;
}

std::vector<Vec3> place_nodes(Rng& rng, Topology topo, const AreaBounds& area, int n) {
  switch (topo) {
    case Topology::kCircle: return place_circle(rng, area, n);
    case Topology::kTriangle: return place_triangle(rng, area, n);
    case Topology::kRectangle: return place_rectangle(rng, area, n);
    case Topology::kRandom: return place_disk(rng, area, n);
    default: throw std::invalid_argument("generate_static: not a static topology");
  }
}

bool connectivity_ok(const std::vector<Vec3>& pts, double range) {
  for (size_t i = 0; i < pts.size(); ++i) {
    bool reachable = false;
    for (size_t j = 0; j < pts.size() && !reachable; ++j) {
      if (i != j && distance(pts[i], pts[j]) <= range) reachable = true;
    }
    if (!reachable) return false;
  }
  return true;
}

void measure_noise(ScenarioInstance& inst, const std::vector<Vec3>& positions, Rng& rng) {
  inst.samples.clear();
  inst.samples.reserve(positions.size());
  for (size_t i = 0; i < positions.size(); ++i) {
    const double shadow = rng.normal(0.0, inst.propagation.sigma_db);
    const double rssi = rf::jammer_rssi(positions[i], inst.jammer, inst.propagation, shadow);
    inst.samples.push_back({positions[i], rf::noise_floor(rssi, inst.propagation.ambient_noise_dbm),
                            static_cast<int>(i)});
  }
}

}  // namespace

std::vector<ScenarioInstance> generate_static(Topology topology, Placement placement, int count,
                                              uint64_t seed, const StaticGenConfig& cfg) {
  if (topology == Topology::kTrajectory) {
    throw std::invalid_argument("generate_static: trajectory is a dynamic topology");
  }
  const int n_max = max_node_count(cfg.area, cfg.comm_range_m, cfg.min_nodes);

  std::vector<ScenarioInstance> out;
  out.reserve(count);
  for (int idx = 0; idx < count; ++idx) {
    Rng rng = Rng::for_stream(seed, static_cast<uint64_t>(idx));
    bool done = false;
    for (int attempt = 0; attempt < cfg.max_retries && !done; ++attempt) {
      ScenarioInstance inst;
      inst.topology = topology;
      inst.dimensions = 2;
      inst.seed = seed;
      inst.propagation = sample_propagation(rng, /*is_static=*/true);
      inst.jammer.tx_power_dbm = rng.uniform(20.0, 60.0);

      const int n = cfg.min_nodes +
                    static_cast<int>(std::llround(rng.beta(cfg.beta_a, cfg.beta_b) *
                                                  (n_max - cfg.min_nodes)));
      const std::vector<Vec3> positions = place_nodes(rng, topology, cfg.area, n);
      if (!connectivity_ok(positions, cfg.comm_range_m)) continue;

      inst.jammer.position = {rng.uniform(cfg.area.min.x, cfg.area.max.x),
                              rng.uniform(cfg.area.min.y, cfg.area.max.y)};
      const auto hull = convex_hull_xy(positions);
      const bool inside = point_in_hull_xy(inst.jammer.position, hull);
      inst.placement = inside ? Placement::kInsideRegion : Placement::kOutsideRegion;
      if (placement != Placement::kNotApplicable && inst.placement != placement) continue;

      measure_noise(inst, positions, rng);
      if (!instance_is_valid(inst, cfg.jam_threshold_db, cfg.detect_threshold_dbm)) continue;

      out.push_back(std::move(inst));
      done = true;
    }
    if (!done) {
      throw GenerationError("generate_static: retry budget exhausted for instance " +
                            std::to_string(idx) + " (topology=" + to_string(topology) +
                            ", placement=" + to_string(placement) + ")");
    }
  }
  return out;
}

std::vector<ScenarioInstance> generate_dynamic(int count, uint64_t seed,
                                               const DynamicGenConfig& cfg) {
  std::vector<ScenarioInstance> out;
  out.reserve(count);
  for (int idx = 0; idx < count; ++idx) {
    Rng rng = Rng::for_stream(seed, static_cast<uint64_t>(idx));
    bool done = false;
    for (int attempt = 0; attempt < cfg.max_retries && !done; ++attempt) {
      ScenarioInstance inst;
      inst.topology = Topology::kTrajectory;
      inst.placement = Placement::kNotApplicable;
      inst.dimensions = 3;
      inst.seed = seed;
      inst.propagation = sample_propagation(rng, /*is_static=*/false);
      inst.jammer.tx_power_dbm = rng.uniform(20.0, 60.0);
      inst.jammer.position = {rng.uniform(cfg.area.min.x, cfg.area.max.x),
                              rng.uniform(cfg.area.min.y, cfg.area.max.y),
                              rng.uniform(0.0, std::min(30.0, cfg.area.max.z))};

      const int steps = static_cast<int>(std::llround(
          rng.log_uniform(static_cast<double>(cfg.min_steps), static_cast<double>(cfg.max_steps))));
      const double r0 = rng.uniform(cfg.start_radius_min_m, cfg.start_radius_max_m);
      const double r1 = rng.uniform(cfg.end_radius_min_m, cfg.end_radius_max_m);
      const double revolutions = rng.uniform(cfg.revolutions_min, cfg.revolutions_max);
      const double direction = rng.bernoulli(0.5) ? 1.0 : -1.0;
      const double theta0 = rng.uniform(0.0, 2.0 * M_PI);
      const double jitter = rng.uniform(cfg.jitter_min_m, cfg.jitter_max_m);
      const double z_start = std::clamp(inst.jammer.position.z + rng.uniform(-30.0, 30.0), 0.5,
                                        cfg.area.max.z + 10.0);
      const double z_end =
          std::clamp(inst.jammer.position.z + rng.uniform(-10.0, 10.0), 0.5, cfg.area.max.z);
      const double wobble_amp = rng.uniform(0.0, 5.0);
      const double wobble_cycles = rng.uniform(1.0, 4.0);

      std::vector<Vec3> positions(steps);
      for (int i = 0; i < steps; ++i) {
        const double t = steps > 1 ? static_cast<double>(i) / (steps - 1) : 0.0;
        const double radius = r0 * std::pow(r1 / r0, t);
        const double theta = theta0 + direction * 2.0 * M_PI * revolutions * t;
        const double z = z_start + (z_end - z_start) * t +
                         wobble_amp * std::sin(2.0 * M_PI * wobble_cycles * t);
        positions[i] = {inst.jammer.position.x + radius * std::cos(theta) + rng.normal(0.0, jitter),
                        inst.jammer.position.y + radius * std::sin(theta) + rng.normal(0.0, jitter),
                        std::max(0.5, z + rng.normal(0.0, 0.3 * jitter))};
      }

      measure_noise(inst, positions, rng);
      if (!instance_is_valid(inst, cfg.jam_threshold_db, cfg.detect_threshold_dbm)) continue;
      const double d_start = distance(inst.samples.front().position, inst.jammer.position);
      const double d_end = distance(inst.samples.back().position, inst.jammer.position);
      if (d_end >= d_start) continue;

      out.push_back(std::move(inst));
      done = true;
    }
    if (!done) {
      throw GenerationError("generate_dynamic: retry budget exhausted for instance " +
                            std::to_string(idx));
    }
  }
  return out;
}

}  // namespace jamloc::scenario
