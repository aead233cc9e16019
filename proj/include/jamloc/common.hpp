#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace jamloc {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Vec3() = default;
  Vec3(double x_, double y_, double z_ = 0.0) : x(x_), y(y_), z(z_) {}

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  bool operator==(const Vec3& o) const { return x == o.x && y == o.y && z == o.z; }

  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm() const { return std::sqrt(x * x + y * y + z * z); }
  double norm_xy() const { return std::hypot(x, y); }
  bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

inline double distance(const Vec3& a, const Vec3& b) { return (a - b).norm(); }

/// Euclidean distance restricted to the first `dims` coordinates.
inline double distance(const Vec3& a, const Vec3& b, int dims) {
  return dims >= 3 ? (a - b).norm() : std::hypot(a.x - b.x, a.y - b.y);
}

struct GenerationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DatasetFormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GraphConstructionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EstimatorInfeasibleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TrainingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace jamloc
