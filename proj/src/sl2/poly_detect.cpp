#include <algorithm>

#include "kakeya/sl2.hpp"

namespace kakeya::sl2 {

using nlohmann::json;

namespace {

std::array<double, 6> scale_by_max(std::array<double, 6> c) {
  double m = 0;
  int im = 0;
  for (int i = 0; i < 6; ++i)
    if (std::abs(c[i]) > m * (1 + 1e-12)) {
      m = std::abs(c[i]);
      im = i;
    }
  if (m == 0) return c;
  const double s = c[im] > 0 ? 1.0 / m : -1.0 / m;
  for (auto& v : c) v *= s;
  return c;
}

}  // namespace

std::string classify_coefficients(const std::array<double, 6>& c) {
  double m = 0;
  for (double v : c) m = std::max(m, std::abs(v));
  if (m == 0) return "degenerate";
  const double A = std::abs(c[0]), B = std::abs(c[1]), F = std::abs(c[5]);
  if (F >= 0.1 * m) return "f-dominant";
  if (A >= B && A >= 0.1 * m) return "a-dominant";
  if (B >= 0.1 * m) return "b-dominant";
  return "degenerate";
}

json PolyFit::to_json() const {
  return {{"coefficients", {{"A", coeffs[0]}, {"B", coeffs[1]}, {"C", coeffs[2]},
                            {"D", coeffs[3]}, {"E", coeffs[4]}, {"F", coeffs[5]}}},
          {"residual", residual},
          {"class", cls},
          {"reduced", reduced}};
}

PolyFit sl2_poly_detect(const std::vector<Vec4>& centers, double tolerance) {
  if (centers.size() < 20) throw PreconditionError("sl2_poly_detect needs at least 20 centers");
  Eigen::MatrixXd X(centers.size(), 6);
  for (std::size_t i = 0; i < centers.size(); ++i) {
    const Vec4& v = centers[i];
    X.row(i) << v[0], v[1], v[2], v[3], 1.0, v[0] * v[3] - v[1] * v[2];
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(X, Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  if (s[4] <= tolerance * s[0]) {
    std::vector<std::string> cand;
    for (int k = 0; k < 6; ++k) {
      if (s[k] > tolerance * s[0]) continue;
      std::array<double, 6> c;
      for (int j = 0; j < 6; ++j) c[j] = svd.matrixV()(j, k);
      cand.push_back(classify_coefficients(c));
    }
    throw AmbiguityError("fit is rank deficient: several polynomials vanish on the centers", cand);
  }
  std::array<double, 6> c;
  for (int j = 0; j < 6; ++j) c[j] = svd.matrixV()(j, 5);

  PolyFit fit;
  fit.cls = classify_coefficients(c);
  if (fit.cls == "f-dominant") {
    for (auto& v : c) v /= c[5] == 0 ? 1.0 : c[5];
    fit.coeffs = c;
  } else {
    fit.coeffs = scale_by_max(c);
  }
  const Eigen::Map<const Eigen::Matrix<double, 6, 1>> cv(fit.coeffs.data());
  fit.residual = std::sqrt((X * cv).squaredNorm() / static_cast<double>(centers.size()));

  const auto& k = fit.coeffs;
  std::array<double, 6> r = k;
  if (fit.cls == "a-dominant") {
    // (x, y, z) -> (x, y, z + y)
    r = {k[0], k[1], k[2], k[3] + k[4], k[4], k[0] + k[5]};
  } else if (fit.cls == "b-dominant") {
    // (x, y, z) -> (x, y, z + x)
    r = {k[0], k[1], k[2] + k[4], k[3], k[4], k[5] - k[1]};
  }
  if (std::abs(r[5]) > 1e-12) {
    const double f = r[5];
    for (auto& v : r) v /= f;
  }
  fit.reduced = r;
  return fit;
}

}  // namespace kakeya::sl2
