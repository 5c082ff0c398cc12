#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

namespace kakeya {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

/// Caller violated a documented precondition.
struct PreconditionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Configuration is (numerically) degenerate for the requested construction.
struct DegeneracyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Request would exceed a configured resource ceiling.
struct ResourceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed argument or input data.
struct InvalidArgument : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr double kPi = 3.14159265358979323846;

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t hash_tag(const std::string& tag) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : tag) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

/// Seeded xoshiro256** stream. Distributions are implemented here so that
/// output does not depend on the standard library version.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : seed_(seed) {
    std::uint64_t s = seed;
    for (auto& w : s_) w = splitmix64(s);
  }

  std::uint64_t seed() const { return seed_; }

  /// Independent child stream derived from this stream's seed and a tag.
  Rng split(const std::string& tag) const {
    std::uint64_t s = seed_ ^ hash_tag(tag);
    return Rng(splitmix64(s));
  }
  Rng split(std::uint64_t index) const {
    std::uint64_t s = seed_ + 0x632be59bd9b4e019ULL * (index + 1);
    return Rng(splitmix64(s));
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : next() % n; }

  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

  Vec3 unit_vector3() {
    for (;;) {
      Vec3 v(normal(), normal(), normal());
      const double n = v.norm();
      if (n > 1e-12) return v / n;
    }
  }

  Vec3 in_ball3(double radius) {
    for (;;) {
      Vec3 v(uniform(-1, 1), uniform(-1, 1), uniform(-1, 1));
      if (v.squaredNorm() <= 1.0) return radius * v;
    }
  }

  Vec2 in_disk(double radius) {
    for (;;) {
      Vec2 v(uniform(-1, 1), uniform(-1, 1));
      if (v.squaredNorm() <= 1.0) return radius * v;
    }
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::uint64_t seed_;
  std::uint64_t s_[4];
};

/// Worker count used by parallel loops; 0 means hardware concurrency.
int default_threads();
void set_default_threads(int n);

/// Runs f(i) for i in [0, n) over contiguous chunks. Callers write results by
/// index, so output does not depend on the thread count.
template <class F>
void parallel_for(std::size_t n, F&& f, int threads = 0) {
  if (threads <= 0) threads = default_threads();
  if (threads <= 1 || n < 64) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  const std::size_t t = std::min<std::size_t>(threads, n);
  std::vector<std::thread> pool;
  for (std::size_t k = 0; k < t; ++k) {
    pool.emplace_back([&, k] {
      const std::size_t lo = n * k / t, hi = n * (k + 1) / t;
      for (std::size_t i = lo; i < hi; ++i) f(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace kakeya
