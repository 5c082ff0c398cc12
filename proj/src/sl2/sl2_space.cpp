#include <algorithm>
#include <fstream>
#include <sstream>

#include "kakeya/sl2.hpp"

namespace kakeya::sl2 {

using nlohmann::json;

namespace {

// ad - bc = x^T S x
Mat4 form_matrix() {
  Mat4 S = Mat4::Zero();
  S(0, 3) = S(3, 0) = 0.5;
  S(1, 2) = S(2, 1) = -0.5;
  return S;
}

// q(o + x f1 + y f2) - 1 as a conic in (x, y).
incidence::Curve2 restrict_form(const Vec4& o, const Vec4& f1, const Vec4& f2) {
  const Mat4 S = form_matrix();
  return incidence::Curve2({o.dot(S * o) - 1.0, 2 * o.dot(S * f1), 2 * o.dot(S * f2), f1.dot(S * f1),
                            2 * f1.dot(S * f2), f2.dot(S * f2)});
}

json vec_json(const Vec4& v) { return {v[0], v[1], v[2], v[3]}; }

}  // namespace

double sl2_form(const Vec4& x) { return x[0] * x[3] - x[1] * x[2]; }

SL2Point::SL2Point(const Vec4& v, double tol) : p(v) {
  if (!v.allFinite()) throw PreconditionError("SL2 point has non-finite coordinates");
  if (std::abs(sl2_form(v) - 1.0) > tol)
    throw PreconditionError("point is not on SL2: ad - bc - 1 = " + std::to_string(sl2_form(v) - 1.0));
}

SL2Point sl2_from_params(double a, double b, double lambda) {
  const double r2 = a * a + b * b;
  if (!(r2 > 0)) throw PreconditionError("(a, b) must be nonzero");
  return SL2Point(Vec4(a, b, lambda * a - b / r2, lambda * b + a / r2), 1e-9);
}

Vec4 tangent_normal(const SL2Point& p) { return Vec4(p.d(), -p.c(), -p.b(), p.a()); }

ChordTransversality chord_transversality_both(const SL2Point& p1, const SL2Point& p2) {
  const Vec4 q = p1.p - p2.p;
  ChordTransversality r;
  r.determinant = std::abs(q[0] * q[3] - q[1] * q[2]);
  r.normal_dot = std::abs(tangent_normal(p1).dot(q));
  return r;
}

double chord_transversality(const SL2Point& p1, const SL2Point& p2) {
  return chord_transversality_both(p1, p2).determinant;
}

StripDirection strip_direction(const SL2Point& pt, const Vec3& efg) {
  const double a = pt.a(), b = pt.b(), c = pt.c(), d = pt.d();
  const double bh = b + 0.5 * d, ah = a + 0.5 * c;
  StripDirection r;
  r.system << -b, a, 0, 0,
      -bh, ah, -0.5 * bh, 0.5 * ah,
      -(b + d), a + c, -(b + d), a + c,
      d, -c, -b, a;
  r.determinant = r.system.determinant();

  const Eigen::Matrix<double, 3, 4> top = r.system.topRows<3>();
  Eigen::JacobiSVD<Eigen::Matrix<double, 3, 4>> svd(top, Eigen::ComputeFullV);
  Vec4 k = svd.matrixV().col(3);
  const Vec4 n = tangent_normal(pt);
  if (n.dot(k) < 0) k = -k;
  r.direction = k.normalized();
  r.transversality = std::abs(n.dot(r.direction)) / n.norm();
  r.particular = r.system.fullPivLu().solve(Vec4(efg[0], efg[1], efg[2], 0.0));
  return r;
}

Vec4 BetaCurve::lift(double x, double y) const {
  return origin + x * plane.col(0) + y * plane.col(1);
}

std::vector<Vec4> BetaCurve::sample(int n, double extent) const {
  std::vector<Vec4> out;
  if (n <= 0) return out;
  const auto& m = model.c;
  const int half = std::max(1, n / 2);
  auto roots = [](double A, double B, double C, std::vector<double>& r) {
    r.clear();
    if (std::abs(A) < 1e-14) {
      if (std::abs(B) > 1e-14) r.push_back(-C / B);
      return;
    }
    const double disc = B * B - 4 * A * C;
    if (disc < 0) return;
    const double s = std::sqrt(disc);
    const double q = -0.5 * (B + (B >= 0 ? s : -s));
    r.push_back(q / A);
    if (std::abs(q) > 0) r.push_back(C / q);
  };
  std::vector<double> rs;
  for (int i = 0; i < half; ++i) {
    const double t = -extent + 2 * extent * (i + 0.5) / half;
    // fix x = t, solve for y
    roots(m[5], m[2] + m[4] * t, m[0] + m[1] * t + m[3] * t * t, rs);
    for (double y : rs)
      if (std::abs(y) <= extent) out.push_back(lift(t, y));
    // fix y = t, solve for x
    roots(m[3], m[1] + m[4] * t, m[0] + m[2] * t + m[5] * t * t, rs);
    for (double x : rs)
      if (std::abs(x) <= extent) out.push_back(lift(x, t));
  }
  return out;
}

json BetaCurve::sidecar() const {
  static const char* names[] = {"a", "b", "c", "d"};
  json proj = json::array();
  for (int k = 0; k < 2; ++k) proj.push_back(vec_json(projection.col(k)));
  return {{"anchor_t", vec_json(anchor_t.p)},
          {"anchor_b", vec_json(anchor_b.p)},
          {"free_coords", {names[free_coords[0]], names[free_coords[1]]}},
          {"model", model.c},
          {"projection_origin", vec_json(projection_origin)},
          {"projection_basis", proj},
          {"planar", planar.c}};
}

BetaCurve beta_curve(const SL2Point& p_t, const SL2Point& p_b, double threshold) {
  if (chord_transversality(p_t, p_b) <= threshold)
    throw DegeneracyError("anchor lines are not skew (chord transversality below threshold)");
  Eigen::Matrix<double, 2, 4> N;
  N.row(0) = tangent_normal(p_t).transpose();
  N.row(1) = tangent_normal(p_b).transpose();

  BetaCurve bc;
  bc.anchor_t = p_t;
  bc.anchor_b = p_b;

  // Keep the free pair whose complementary 2x2 minor is best conditioned.
  static const int pairs[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
  double best = 0;
  int bi = -1;
  for (int i = 0; i < 6; ++i) {
    int e[2], k = 0;
    for (int j = 0; j < 4; ++j)
      if (j != pairs[i][0] && j != pairs[i][1]) e[k++] = j;
    const double m = std::abs(N(0, e[0]) * N(1, e[1]) - N(0, e[1]) * N(1, e[0]));
    if (m > best * (1 + 1e-12)) {
      best = m;
      bi = i;
    }
  }
  if (bi < 0 || best < 1e-12) throw DegeneracyError("incidence hyperplanes are parallel");
  bc.free_coords = {pairs[bi][0], pairs[bi][1]};
  int e[2], k = 0;
  for (int j = 0; j < 4; ++j)
    if (j != bc.free_coords[0] && j != bc.free_coords[1]) e[k++] = j;
  Eigen::Matrix2d M;
  M << N(0, e[0]), N(0, e[1]), N(1, e[0]), N(1, e[1]);
  const Eigen::Matrix2d Mi = M.inverse();

  auto solve_at = [&](double x, double y) {
    Vec4 v = Vec4::Zero();
    v[bc.free_coords[0]] = x;
    v[bc.free_coords[1]] = y;
    const Eigen::Vector2d rhs = Eigen::Vector2d(2, 2) - N * v;
    const Eigen::Vector2d s = Mi * rhs;
    v[e[0]] = s[0];
    v[e[1]] = s[1];
    return v;
  };
  bc.origin = solve_at(0, 0);
  bc.plane.col(0) = solve_at(1, 0) - bc.origin;
  bc.plane.col(1) = solve_at(0, 1) - bc.origin;
  bc.model = restrict_form(bc.origin, bc.plane.col(0), bc.plane.col(1));

  // Principal-axis frame of sampled points.
  const auto pts = bc.sample(400);
  if (pts.size() >= 3) {
    Vec4 mean = Vec4::Zero();
    for (const auto& q : pts) mean += q;
    mean /= static_cast<double>(pts.size());
    Mat4 cov = Mat4::Zero();
    for (const auto& q : pts) cov += (q - mean) * (q - mean).transpose();
    Eigen::SelfAdjointEigenSolver<Mat4> es(cov);
    bc.projection_origin = mean;
    bc.projection.col(0) = es.eigenvectors().col(3);
    bc.projection.col(1) = es.eigenvectors().col(2);
  } else {
    bc.projection_origin = bc.origin;
    Eigen::HouseholderQR<Eigen::Matrix<double, 4, 2>> qr(bc.plane);
    bc.projection = qr.householderQ() * Eigen::Matrix<double, 4, 2>::Identity();
  }
  bc.planar = restrict_form(bc.projection_origin, bc.projection.col(0), bc.projection.col(1));
  return bc;
}

SL2Point sample_sl2_window(Rng& rng, double r_min, double r_max, double cd_max) {
  if (!(r_min > 0) || r_max < r_min || cd_max * r_min < 1.0)
    throw PreconditionError("empty SL2 window");
  const double r = std::sqrt(rng.uniform(r_min * r_min, r_max * r_max));
  const double th = rng.uniform(0, 2 * kPi);
  const double lmax = std::sqrt(std::max(0.0, cd_max * cd_max - 1.0 / (r * r))) / r;
  return sl2_from_params(r * std::cos(th), r * std::sin(th), rng.uniform(-lmax, lmax));
}

std::vector<Vec4> read_sl2_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path);
  std::vector<Vec4> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    if (lineno == 1 && line.find_first_of("abcd") != std::string::npos) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    Vec4 v;
    if (!(ss >> v[0] >> v[1] >> v[2] >> v[3]))
      throw InvalidArgument(path + ":" + std::to_string(lineno) + ": expected a,b,c,d");
    out.push_back(v);
  }
  return out;
}

void write_sl2_csv(const std::string& path, const std::vector<Vec4>& pts) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write " + path);
  out.precision(17);
  out << "a,b,c,d\n";
  for (const auto& v : pts) out << v[0] << ',' << v[1] << ',' << v[2] << ',' << v[3] << '\n';
}

}  // namespace kakeya::sl2
