#include <algorithm>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "kakeya/incidence.hpp"

namespace kakeya::incidence {

using nlohmann::json;

BivariatePoly::BivariatePoly(int degree) : degree_(degree) {
  if (degree < 0 || degree > 64) throw InvalidArgument("polynomial degree must lie in [0, 64]");
  c_.assign(size_for(degree), 0.0);
}

BivariatePoly::BivariatePoly(int degree, std::vector<double> coeffs) : degree_(degree), c_(std::move(coeffs)) {
  if (degree < 0 || degree > 64) throw InvalidArgument("polynomial degree must lie in [0, 64]");
  if (static_cast<int>(c_.size()) != size_for(degree))
    throw InvalidArgument("coefficient count does not match degree");
}

BivariatePoly BivariatePoly::linear(double c0, double cx, double cy) { return BivariatePoly(1, {c0, cx, cy}); }

double BivariatePoly::coeff(int i, int j) const {
  if (i < 0 || j < 0 || i + j > degree_) return 0.0;
  return c_[index(i, j)];
}

double BivariatePoly::operator()(double x, double y) const {
  double xs[65], ys[65];
  xs[0] = ys[0] = 1.0;
  for (int k = 1; k <= degree_; ++k) {
    xs[k] = xs[k - 1] * x;
    ys[k] = ys[k - 1] * y;
  }
  double s = 0;
  int idx = 0;
  for (int k = 0; k <= degree_; ++k)
    for (int j = 0; j <= k; ++j) s += c_[idx++] * xs[k - j] * ys[j];
  return s;
}

Vec2 BivariatePoly::gradient(const Vec2& p) const {
  double xs[66], ys[66];
  xs[0] = ys[0] = 1.0;
  for (int k = 1; k <= degree_; ++k) {
    xs[k] = xs[k - 1] * p.x();
    ys[k] = ys[k - 1] * p.y();
  }
  Vec2 g(0, 0);
  int idx = 0;
  for (int k = 0; k <= degree_; ++k)
    for (int j = 0; j <= k; ++j, ++idx) {
      const int i = k - j;
      if (i > 0) g.x() += c_[idx] * i * xs[i - 1] * ys[j];
      if (j > 0) g.y() += c_[idx] * j * xs[i] * ys[j - 1];
    }
  return g;
}

BivariatePoly BivariatePoly::operator*(const BivariatePoly& o) const {
  if (degree_ + o.degree_ > 64) throw ResourceError("polynomial degree above 64");
  BivariatePoly r(degree_ + o.degree_);
  for (int k1 = 0; k1 <= degree_; ++k1)
    for (int j1 = 0; j1 <= k1; ++j1) {
      const double a = c_[index(k1 - j1, j1)];
      if (a == 0) continue;
      for (int k2 = 0; k2 <= o.degree_; ++k2)
        for (int j2 = 0; j2 <= k2; ++j2) r.c_[index(k1 - j1 + k2 - j2, j1 + j2)] += a * o.c_[index(k2 - j2, j2)];
    }
  return r;
}

bool BivariatePoly::is_zero() const {
  return std::all_of(c_.begin(), c_.end(), [](double v) { return v == 0.0; });
}

double BivariatePoly::scale() const {
  double s = 0;
  for (double v : c_) s += std::abs(v);
  return s;
}

json BivariatePoly::to_json() const { return {{"degree", degree_}, {"coefficients", c_}}; }

Curve2::Curve2(const std::array<double, 6>& coeffs) : c(coeffs) {}

double Curve2::operator()(const Vec2& p) const {
  const double x = p.x(), y = p.y();
  return c[0] + c[1] * x + c[2] * y + c[3] * x * x + c[4] * x * y + c[5] * y * y;
}

Vec2 Curve2::gradient(const Vec2& p) const {
  const double x = p.x(), y = p.y();
  return Vec2(c[1] + 2 * c[3] * x + c[4] * y, c[2] + c[4] * x + 2 * c[5] * y);
}

bool Curve2::is_zero() const {
  return std::all_of(c.begin(), c.end(), [](double v) { return v == 0.0; });
}

BivariatePoly Curve2::poly() const { return BivariatePoly(2, {c.begin(), c.end()}); }

double Curve2::first_order_distance(const Vec2& p) const {
  const double g = gradient(p).norm();
  const double v = std::abs((*this)(p));
  if (g == 0) return v == 0 ? 0.0 : std::numeric_limits<double>::infinity();
  return v / g;
}

Curve2 Curve2::through_points(const std::array<Vec2, 5>& pts) {
  Eigen::Matrix<double, 5, 6> M;
  for (int i = 0; i < 5; ++i) {
    const double x = pts[i].x(), y = pts[i].y();
    M.row(i) << 1, x, y, x * x, x * y, y * y;
  }
  Eigen::JacobiSVD<Eigen::Matrix<double, 5, 6>> svd(M, Eigen::ComputeFullV);
  if (svd.singularValues()[4] < 1e-10 * svd.singularValues()[0])
    throw DegeneracyError("five points do not determine a unique conic");
  std::array<double, 6> c;
  for (int j = 0; j < 6; ++j) c[j] = svd.matrixV()(j, 5);
  return Curve2(c);
}

namespace {

using Poly = std::vector<double>;  // low to high

Poly padd(const Poly& a, const Poly& b) {
  Poly r(std::max(a.size(), b.size()), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) r[i] += a[i];
  for (std::size_t i = 0; i < b.size(); ++i) r[i] += b[i];
  return r;
}

Poly pmul(const Poly& a, const Poly& b) {
  Poly r(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
  return r;
}

Poly pscale(const Poly& a, double s) {
  Poly r = a;
  for (auto& v : r) v *= s;
  return r;
}

// Real roots via companion-matrix eigenvalues.
std::vector<double> real_roots(Poly p) {
  double m = 0;
  for (double v : p) m = std::max(m, std::abs(v));
  std::vector<double> out;
  if (m == 0) return out;
  while (!p.empty() && std::abs(p.back()) <= 1e-13 * m) p.pop_back();
  const int n = static_cast<int>(p.size()) - 1;
  if (n < 1) return out;
  if (n == 1) {
    out.push_back(-p[0] / p[1]);
    return out;
  }
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) C(i, i - 1) = 1.0;
  for (int i = 0; i < n; ++i) C(i, n - 1) = -p[i] / p[n];
  Eigen::EigenSolver<Eigen::MatrixXd> es(C, false);
  for (int i = 0; i < n; ++i) {
    const auto z = es.eigenvalues()[i];
    if (std::abs(z.imag()) <= 1e-7 * (1 + std::abs(z.real()))) out.push_back(z.real());
  }
  return out;
}

struct ConicParts {
  Eigen::Matrix2d Q;
  Vec2 l;
  double c0;
};

ConicParts parts(const Curve2& g) {
  ConicParts P;
  P.Q << g.c[3], 0.5 * g.c[4], 0.5 * g.c[4], g.c[5];
  P.l = Vec2(g.c[1], g.c[2]);
  P.c0 = g.c[0];
  return P;
}

// Roots of a t^2 + b t + c.
std::vector<double> quad_roots(double a, double b, double c) {
  std::vector<double> r;
  const double m = std::max({std::abs(a), std::abs(b), std::abs(c)});
  if (m == 0) return r;
  if (std::abs(a) <= 1e-14 * m) {
    if (std::abs(b) > 1e-14 * m) r.push_back(-c / b);
    return r;
  }
  const double disc = b * b - 4 * a * c;
  if (disc < -1e-14 * m * m) return r;
  const double s = std::sqrt(std::max(0.0, disc));
  const double q = -0.5 * (b + (b >= 0 ? s : -s));
  r.push_back(q / a);
  if (q != 0) r.push_back(c / q);
  return r;
}

}  // namespace

std::optional<Vec2> conic_foot_point(const Curve2& g, const Vec2& p) {
  if (g.is_zero()) throw InvalidArgument("zero polynomial has no curve");
  const ConicParts P = parts(g);
  double cscale = 0;
  for (double v : g.c) cscale = std::max(cscale, std::abs(v));

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(P.Q);
  const Vec2 ev = es.eigenvalues();
  const double qmax = std::max(std::abs(ev[0]), std::abs(ev[1]));
  const double eps = 1e-12 * cscale;

  std::vector<Vec2> cand;
  auto on_curve = [&](const Vec2& x) {
    const double mag = std::abs(g.c[0]) + std::abs(g.c[1] * x.x()) + std::abs(g.c[2] * x.y()) +
                       std::abs(g.c[3] * x.x() * x.x()) + std::abs(g.c[4] * x.x() * x.y()) +
                       std::abs(g.c[5] * x.y() * x.y());
    return std::abs(g(x)) <= 1e-8 * std::max(mag, cscale);
  };

  // Zero set determined by one linear form n.x: a union of parallel lines.
  int small = 0, big = -1;
  for (int i = 0; i < 2; ++i) {
    if (std::abs(ev[i]) <= eps) ++small;
    else big = i;
  }
  bool one_form = false;
  Vec2 n;
  if (small == 2) {
    if (P.l.norm() <= eps) return std::nullopt;  // nonzero constant
    n = P.l.normalized();
    one_form = true;
  } else if (small == 1) {
    n = es.eigenvectors().col(big);
    const Vec2 perp(-n.y(), n.x());
    if (std::abs(P.l.dot(perp)) <= 1e-12 * std::max(cscale, P.l.norm())) one_form = true;
  }
  if (one_form) {
    // gamma = lam s^2 + beta s + c0 with s = n.x
    const double lam = small == 2 ? 0.0 : ev[big];
    const double beta = P.l.dot(n);
    const double s0 = n.dot(p);
    std::optional<Vec2> best;
    double bd = std::numeric_limits<double>::infinity();
    for (double s : quad_roots(lam, beta, P.c0)) {
      const double d = std::abs(s - s0);
      if (d < bd) {
        bd = d;
        best = p + (s - s0) * n;
      }
    }
    return best;
  }

  // Lagrange condition (I - 2 mu Q) x = p + mu l, cleared of denominators.
  const double q11 = P.Q(0, 0), q12 = P.Q(0, 1), q22 = P.Q(1, 1);
  const Poly r1{p.x(), P.l.x()}, r2{p.y(), P.l.y()};
  const Poly a11{1.0, -2 * q22}, a12{0.0, 2 * q12}, a22{1.0, -2 * q11};
  const Poly y1 = padd(pmul(a11, r1), pmul(a12, r2));
  const Poly y2 = padd(pmul(a12, r1), pmul(a22, r2));
  const Poly D = padd(pmul(Poly{1.0, -2 * q11}, Poly{1.0, -2 * q22}), Poly{0.0, 0.0, -4 * q12 * q12});
  Poly val = padd(padd(pscale(pmul(y1, y1), q11), pscale(pmul(y1, y2), 2 * q12)), pscale(pmul(y2, y2), q22));
  val = padd(val, pmul(D, padd(pscale(y1, P.l.x()), pscale(y2, P.l.y()))));
  val = padd(val, pscale(pmul(D, D), P.c0));

  for (double mu : real_roots(val)) {
    double Dv = 0;
    for (std::size_t i = 0; i < D.size(); ++i) Dv += D[i] * std::pow(mu, static_cast<double>(i));
    if (std::abs(Dv) < 1e-10) continue;  // handled by the singular branch
    Eigen::Matrix2d M = Eigen::Matrix2d::Identity() - 2 * mu * P.Q;
    Vec2 x = M.inverse() * (p + mu * P.l);
    // Newton polish on (x, mu)
    for (int it = 0; it < 4; ++it) {
      const Vec2 gr = 2 * P.Q * x + P.l;
      Eigen::Vector3d F;
      F.head<2>() = x - p - mu * gr;
      F[2] = g(x);
      if (F.norm() < 1e-15) break;
      Eigen::Matrix3d J;
      J.topLeftCorner<2, 2>() = Eigen::Matrix2d::Identity() - 2 * mu * P.Q;
      J.topRightCorner<2, 1>() = -gr;
      J.bottomLeftCorner<1, 2>() = gr.transpose();
      J(2, 2) = 0;
      const Eigen::Vector3d step = J.fullPivLu().solve(F);
      if (!step.allFinite()) break;
      x -= step.head<2>();
      mu -= step[2];
    }
    if (on_curve(x)) cand.push_back(x);
  }

  // Singular multipliers mu = 1/(2 lambda): M is singular and x is not determined by mu.
  for (int i = 0; i < 2; ++i) {
    if (std::abs(ev[i]) <= eps) continue;
    const double mu = 1.0 / (2 * ev[i]);
    const Eigen::Matrix2d M = Eigen::Matrix2d::Identity() - 2 * mu * P.Q;
    const Vec2 rhs = p + mu * P.l;
    if (std::abs(ev[0] - ev[1]) <= 1e-12 * qmax) {
      // M = 0: every point at the right radius is a foot point
      if (rhs.norm() > 1e-9 * (1 + p.norm())) continue;
      const double r2 = -g(p) / ev[i];
      if (r2 < 0) continue;
      cand.push_back(p + std::sqrt(r2) * Vec2(1, 0));
      continue;
    }
    const Vec2 v = es.eigenvectors().col(i);  // null direction of M
    const Vec2 w = es.eigenvectors().col(1 - i);
    const double mw = w.dot(M * w);
    const double xw = w.dot(rhs) / mw;
    if (std::abs(v.dot(rhs)) > 1e-9 * (1 + rhs.norm())) continue;
    const Vec2 x0 = xw * w;
    // gamma(x0 + t v) = lam t^2 + (grad(x0).v) t + gamma(x0)
    for (double t : quad_roots(ev[i], (2 * P.Q * x0 + P.l).dot(v), g(x0))) {
      const Vec2 x = x0 + t * v;
      if (on_curve(x)) cand.push_back(x);
    }
  }

  // Singular points of the curve (crossing lines, isolated points).
  if (std::abs(P.Q.determinant()) > eps * qmax) {
    const Vec2 xs = -0.5 * P.Q.inverse() * P.l;
    if (on_curve(xs)) cand.push_back(xs);
  }

  std::optional<Vec2> best;
  double bd = std::numeric_limits<double>::infinity();
  for (const auto& x : cand) {
    const double d = (x - p).norm();
    if (d < bd) {
      bd = d;
      best = x;
    }
  }
  return best;
}

double point_conic_distance(const Curve2& g, const Vec2& p) {
  const auto f = conic_foot_point(g, p);
  return f ? (*f - p).norm() : std::numeric_limits<double>::infinity();
}

void PlanarPointSet::validate() const {
  if (delta > 0 && static_cast<double>(points.size()) > 1.0 / delta + 1e-9)
    throw PreconditionError("point set has more than 1/delta points");
  for (const auto& q : points)
    if (q.norm() > 1.0 + 1e-12) throw PreconditionError("point outside B(0,1)");
  if (separation <= 0) return;
  // bucket grid at the separation scale
  std::map<std::pair<long long, long long>, std::vector<int>> grid;
  auto key = [&](const Vec2& q) {
    return std::make_pair(static_cast<long long>(std::floor(q.x() / separation)),
                          static_cast<long long>(std::floor(q.y() / separation)));
  };
  for (int i = 0; i < static_cast<int>(points.size()); ++i) {
    const auto k = key(points[i]);
    for (long long dx = -1; dx <= 1; ++dx)
      for (long long dy = -1; dy <= 1; ++dy) {
        auto it = grid.find({k.first + dx, k.second + dy});
        if (it == grid.end()) continue;
        for (int j : it->second)
          if ((points[i] - points[j]).norm() < separation * (1 - 1e-12))
            throw PreconditionError("points " + std::to_string(j) + " and " + std::to_string(i) +
                                    " closer than the declared separation");
      }
    grid[k].push_back(i);
  }
}

std::vector<std::vector<int>> incidence_lists(const std::vector<Vec2>& pts, const std::vector<Curve2>& curves,
                                              double r) {
  if (!(r > 0)) throw PreconditionError("incidence radius must be positive");
  for (const auto& g : curves)
    if (g.is_zero()) throw InvalidArgument("degenerate curve: zero polynomial");
  std::vector<std::vector<int>> out(curves.size());
  parallel_for(curves.size(), [&](std::size_t k) {
    for (int i = 0; i < static_cast<int>(pts.size()); ++i)
      if (point_conic_distance(curves[k], pts[i]) <= r) out[k].push_back(i);
  });
  return out;
}

std::int64_t fuzzy_incidences(const std::vector<Vec2>& pts, const std::vector<Curve2>& curves, double r) {
  std::int64_t n = 0;
  for (const auto& row : incidence_lists(pts, curves, r)) n += static_cast<std::int64_t>(row.size());
  return n;
}

namespace {

std::vector<std::vector<double>> read_numeric_csv(const std::string& path, std::size_t width) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    std::vector<double> row;
    double v;
    while (ss >> v) row.push_back(v);
    if (row.empty() && lineno == 1) continue;  // header
    if (row.size() != width)
      throw InvalidArgument(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(width) +
                            " numbers");
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::vector<Vec2> read_points_csv(const std::string& path) {
  std::vector<Vec2> out;
  for (const auto& r : read_numeric_csv(path, 2)) out.emplace_back(r[0], r[1]);
  return out;
}

std::vector<Curve2> read_curves_csv(const std::string& path) {
  std::vector<Curve2> out;
  for (const auto& r : read_numeric_csv(path, 6)) {
    Curve2 g({r[0], r[1], r[2], r[3], r[4], r[5]});
    if (g.is_zero()) throw InvalidArgument(path + ": zero polynomial in curve list");
    out.push_back(g);
  }
  return out;
}

void write_points_csv(const std::string& path, const std::vector<Vec2>& pts) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write " + path);
  out.precision(17);
  out << "x,y\n";
  for (const auto& p : pts) out << p.x() << ',' << p.y() << '\n';
}

void write_curves_csv(const std::string& path, const std::vector<Curve2>& curves) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write " + path);
  out.precision(17);
  out << "c1,cx,cy,cxx,cxy,cyy\n";
  for (const auto& g : curves)
    out << g.c[0] << ',' << g.c[1] << ',' << g.c[2] << ',' << g.c[3] << ',' << g.c[4] << ',' << g.c[5] << '\n';
}

}  // namespace kakeya::incidence
