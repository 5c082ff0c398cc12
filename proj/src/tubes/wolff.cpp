#include "raster.hpp"

namespace kakeya::tubes {

using nlohmann::json;

namespace {

std::vector<double> dyadic_scales(double delta) {
  std::vector<double> out;
  for (double s = delta; s <= 1.0 + 1e-12; s *= 2) out.push_back(s);
  if (out.empty() || out.back() < 1.0 - 1e-12) out.push_back(1.0);
  return out;
}

Vec3 any_perpendicular(const Vec3& u, Rng& rng) {
  for (;;) {
    const Vec3 r = rng.unit_vector3();
    const Vec3 v = r - r.dot(u) * u;
    if (v.norm() > 1e-3) return v.normalized();
  }
}

}  // namespace

int prism_count(const TubeFamily& f, const Vec3& center, const Vec3& u, const Vec3& v, double s, double t) {
  const Vec3 w = u.cross(v);
  int count = 0;
  for (const auto& tube : f.tubes) {
    bool in = true;
    for (const Vec3& e : {tube.axis.base, tube.axis.end()}) {
      const Vec3 r = e - center;
      in = in && std::abs(r.dot(u)) <= 1.0 && std::abs(r.dot(v)) <= s / 2 && std::abs(r.dot(w)) <= t / 2;
    }
    count += in;
  }
  return count;
}

WolffReport check_wolff_axioms(const TubeFamily& f, const WolffOptions& opt) {
  WolffReport rep;
  if (f.tubes.empty()) return rep;
  const double delta = f.delta;
  const auto scales = dyadic_scales(delta);
  const int K = static_cast<int>(scales.size());
  Rng rng(opt.seed);
  std::vector<int> hist(static_cast<std::size_t>(K) * K);
  const std::size_t n = f.tubes.size();

  for (int sample = 0; sample < opt.samples; ++sample) {
    // orientation from a pair of tubes: u along A, v toward B; otherwise random
    const Tube& A = f.tubes[rng.below(n)];
    const Tube& B = f.tubes[rng.below(n)];
    Vec3 u, v, center;
    const int mode = static_cast<int>(rng.below(3));
    if (mode == 2) {
      u = rng.unit_vector3();
      v = any_perpendicular(u, rng);
      center = A.axis.midpoint();
    } else {
      u = A.axis.dir;
      const Vec3 toward = mode == 0 ? Vec3(B.axis.midpoint() - A.axis.midpoint()) : B.axis.dir;
      v = toward - toward.dot(u) * u;
      v = v.norm() > 1e-9 ? Vec3(v.normalized()) : any_perpendicular(u, rng);
      center = 0.5 * (A.axis.midpoint() + B.axis.midpoint());
    }
    const Vec3 w = u.cross(v);

    std::fill(hist.begin(), hist.end(), 0);
    for (const auto& tube : f.tubes) {
      double mu = 0, mv = 0, mw = 0;
      for (const Vec3& e : {tube.axis.base, tube.axis.end()}) {
        const Vec3 r = e - center;
        mu = std::max(mu, std::abs(r.dot(u)));
        mv = std::max(mv, std::abs(r.dot(v)));
        mw = std::max(mw, std::abs(r.dot(w)));
      }
      if (mu > 1.0) continue;
      auto first_fit = [&](double m) {
        return static_cast<int>(std::lower_bound(scales.begin(), scales.end(), 2 * m * (1 - 1e-12)) - scales.begin());
      };
      const int a = first_fit(mv), b = first_fit(mw);
      if (a < K && b < K) ++hist[static_cast<std::size_t>(a) * K + b];
    }
    // 2D prefix sums: count(s_a, t_b) = tubes with fit indices <= (a, b)
    for (int a = 0; a < K; ++a)
      for (int b = 0; b < K; ++b) {
        int& h = hist[static_cast<std::size_t>(a) * K + b];
        if (a > 0) h += hist[static_cast<std::size_t>(a - 1) * K + b];
        if (b > 0) h += hist[static_cast<std::size_t>(a) * K + b - 1];
        if (a > 0 && b > 0) h -= hist[static_cast<std::size_t>(a - 1) * K + b - 1];
      }
    for (int a = 0; a < K; ++a)
      for (int b = 0; b < K; ++b) {
        const int c = hist[static_cast<std::size_t>(a) * K + b];
        if (c == 0) continue;
        const double ratio = c / (scales[a] * scales[b] / (delta * delta));
        if (ratio > 1 + opt.tolerance) ++rep.violations;
        if (ratio > rep.max_ratio) {
          rep.max_ratio = ratio;
          rep.worst = PrismWitness{center, u, v, w, scales[a], scales[b], c, ratio};
        }
      }
    ++rep.samples;
  }
  rep.pass = rep.violations == 0;
  return rep;
}

json WolffReport::to_json() const {
  auto vec = [](const Vec3& x) { return json::array({x.x(), x.y(), x.z()}); };
  return {{"max_ratio", max_ratio},
          {"violations", violations},
          {"samples", samples},
          {"pass", pass},
          {"worst",
           {{"center", vec(worst.center)},
            {"u", vec(worst.u)},
            {"v", vec(worst.v)},
            {"w", vec(worst.w)},
            {"s", worst.s},
            {"t", worst.t},
            {"count", worst.count},
            {"ratio", worst.ratio}}}};
}

}  // namespace kakeya::tubes
