#include <algorithm>
#include <deque>
#include <map>

#include "kakeya/incidence.hpp"

namespace kakeya::incidence {

namespace {

// Monomials of degree <= d in graded order (the Veronese lift plus the constant).
Eigen::VectorXd lift(const Vec2& p, int d) {
  Eigen::VectorXd m(BivariatePoly::size_for(d));
  int idx = 0;
  for (int k = 0; k <= d; ++k)
    for (int j = 0; j <= k; ++j) m[idx++] = std::pow(p.x(), k - j) * std::pow(p.y(), j);
  return m;
}

double magnitude_at(const BivariatePoly& P, const Vec2& p) {
  double s = 0;
  int idx = 0;
  for (int k = 0; k <= P.degree(); ++k)
    for (int j = 0; j <= k; ++j)
      s += std::abs(P.coeffs()[idx++]) * std::pow(std::abs(p.x()), k - j) * std::pow(std::abs(p.y()), j);
  return s;
}

bool on_zero_set(const BivariatePoly& P, const Vec2& p, double tol) {
  return std::abs(P(p)) <= tol * std::max(magnitude_at(P, p), 1e-300);
}

// Smallest d whose nonconstant monomial count reaches k.
int degree_for_sets(int k) {
  int d = 1;
  while (BivariatePoly::size_for(d) - 1 < k) ++d;
  return d;
}

struct Bisection {
  Eigen::VectorXd w;
  int excess = 0;
};

// Worst side count minus ceil(n/2) over all sets; <= 0 means every set is bisected.
int excess_of(const Eigen::VectorXd& w, const std::vector<std::vector<int>>& sets,
              const std::vector<Eigen::VectorXd>& lifted, double tol) {
  int worst = -1 << 30;
  for (const auto& s : sets) {
    int pos = 0, neg = 0;
    for (int i : s) {
      const double v = w.dot(lifted[i]);
      const double mag = w.cwiseAbs().dot(lifted[i].cwiseAbs());
      if (std::abs(v) <= tol * std::max(mag, 1e-300)) continue;
      (v > 0 ? pos : neg)++;
    }
    const int half = (static_cast<int>(s.size()) + 1) / 2;
    worst = std::max(worst, std::max(pos, neg) - half);
  }
  return sets.empty() ? 0 : worst;
}

// Piecewise-linear Newton iteration: force w to vanish at the current lower
// median of every set, recompute medians, repeat.
Bisection newton_bisect(Eigen::VectorXd w, const std::vector<std::vector<int>>& sets,
                        const std::vector<Eigen::VectorXd>& lifted, int iterations, double tol) {
  const int M = static_cast<int>(w.size());
  Bisection best{w, excess_of(w, sets, lifted, tol)};
  std::vector<std::pair<double, int>> vals;
  for (int it = 0; it < iterations && best.excess > 0; ++it) {
    Eigen::MatrixXd K(sets.size(), M);
    for (std::size_t s = 0; s < sets.size(); ++s) {
      vals.clear();
      for (int i : sets[s]) vals.emplace_back(w.dot(lifted[i]), i);
      const std::size_t mid = (vals.size() - 1) / 2;
      std::nth_element(vals.begin(), vals.begin() + mid, vals.end());
      K.row(s) = lifted[vals[mid].second].transpose();
    }
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(K);
    Eigen::VectorXd nw = w - cod.solve(K * w);
    const double n = nw.norm();
    if (!(n > 1e-14)) break;
    w = nw / n;
    const int e = excess_of(w, sets, lifted, tol);
    if (e < best.excess) best = {w, e};
  }
  return best;
}

}  // namespace

CellLabeling assign_cells(const BivariatePoly& P, const std::vector<Vec2>& pts, const CellOptions& opt) {
  return assign_cells(std::vector<BivariatePoly>{P}, pts, opt);
}

CellLabeling assign_cells(const std::vector<BivariatePoly>& factors, const std::vector<Vec2>& pts,
                          const CellOptions& opt) {
  if (factors.empty() || factors.size() > 64) throw PreconditionError("assign_cells needs 1 to 64 factors");
  for (const auto& f : factors)
    if (f.is_zero()) throw PreconditionError("assign_cells needs a nonzero polynomial");
  double E = opt.extent;
  for (const auto& p : pts) E = std::max(E, 1.05 * p.cwiseAbs().maxCoeff());

  auto pattern = [&](const Vec2& p) {
    std::uint64_t m = 0;
    for (std::size_t f = 0; f < factors.size(); ++f)
      if (factors[f](p) >= 0) m |= std::uint64_t{1} << f;
    return m;
  };

  CellLabeling out;
  out.labels.assign(pts.size(), -1);
  std::vector<char> boundary(pts.size(), 0);
  std::vector<std::uint64_t> point_pattern(pts.size(), 0);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (const auto& f : factors) boundary[i] = boundary[i] || on_zero_set(f, pts[i], opt.boundary_tol);
    point_pattern[i] = pattern(pts[i]);
  }

  for (int N = opt.initial_grid;; N *= 2) {
    N = std::min(N, opt.max_grid);
    const double h = 2 * E / N;
    std::vector<std::uint64_t> sign(static_cast<std::size_t>(N) * N);
    parallel_for(static_cast<std::size_t>(N), [&](std::size_t i) {
      for (int j = 0; j < N; ++j) sign[i * N + j] = pattern(Vec2(-E + (i + 0.5) * h, -E + (j + 0.5) * h));
    });
    std::vector<int> comp(sign.size(), -1);
    int nc = 0;
    std::deque<std::size_t> q;
    for (std::size_t s = 0; s < sign.size(); ++s) {
      if (comp[s] >= 0) continue;
      comp[s] = nc;
      q.push_back(s);
      while (!q.empty()) {
        const std::size_t c = q.front();
        q.pop_front();
        const int ci = static_cast<int>(c / N), cj = static_cast<int>(c % N);
        const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
        for (int k = 0; k < 4; ++k) {
          const int ni = ci + di[k], nj = cj + dj[k];
          if (ni < 0 || nj < 0 || ni >= N || nj >= N) continue;
          const std::size_t nb = static_cast<std::size_t>(ni) * N + nj;
          if (comp[nb] < 0 && sign[nb] == sign[c]) {
            comp[nb] = nc;
            q.push_back(nb);
          }
        }
      }
      ++nc;
    }

    out.unresolved.clear();
    for (std::size_t k = 0; k < pts.size(); ++k) {
      if (boundary[k]) {
        out.labels[k] = -1;
        continue;
      }
      const Vec2& p = pts[k];
      const std::uint64_t sp = point_pattern[k];
      const int ci = std::clamp(static_cast<int>((p.x() + E) / h), 0, N - 1);
      const int cj = std::clamp(static_cast<int>((p.y() + E) / h), 0, N - 1);
      // accept a cell of the 3x3 neighborhood joined to p by a sign-constant segment
      int label = -1;
      for (int r = 0; r < 9 && label < 0; ++r) {
        const int i = ci + (r % 3 == 0 ? 0 : (r % 3 == 1 ? -1 : 1));
        const int j = cj + (r / 3 == 0 ? 0 : (r / 3 == 1 ? -1 : 1));
        if (i < 0 || j < 0 || i >= N || j >= N) continue;
        const std::size_t s = static_cast<std::size_t>(i) * N + j;
        if (sign[s] != sp) continue;
        const Vec2 c(-E + (i + 0.5) * h, -E + (j + 0.5) * h);
        bool ok = true;
        for (int t = 1; t < 16 && ok; ++t) ok = pattern(p + (c - p) * (t / 16.0)) == sp;
        if (ok) label = comp[s];
      }
      out.labels[k] = label;
      if (label < 0) out.unresolved.push_back(static_cast<int>(k));
    }
    out.n_components = nc;
    out.resolution = N;
    if (out.unresolved.empty() || N >= opt.max_grid) break;
  }
  return out;
}

PartitionResult polynomial_partition(const std::vector<Vec2>& pts, int D, Rng& rng, const PartitionOptions& opt) {
  if (D < 1) throw PreconditionError("partition degree must be >= 1");
  if (pts.empty()) throw PreconditionError("partition needs at least one point");
  if (D > opt.max_degree) throw ResourceError("partition degree exceeds the degree budget");

  PartitionResult res;
  BivariatePoly P(0, {1.0});
  std::vector<BivariatePoly> factors;
  std::vector<std::vector<int>> sets(1);
  for (int i = 0; i < static_cast<int>(pts.size()); ++i) sets[0].push_back(i);

  int used = 0;
  for (int round = 0;; ++round) {
    const int k = static_cast<int>(sets.size());
    const int d = degree_for_sets(k);
    if (used + d > D) break;
    std::vector<std::vector<int>> active;
    for (const auto& s : sets)
      if (s.size() >= 2) active.push_back(s);

    const int M = BivariatePoly::size_for(d);
    std::vector<Eigen::VectorXd> lifted(pts.size());
    for (const auto& s : active)
      for (int i : s) lifted[i] = lift(pts[i], d);

    RoundStats st;
    st.degree = d;
    st.sets = static_cast<int>(active.size());
    Bisection best;
    best.excess = 1 << 30;
    if (active.empty()) {
      best.w = Eigen::VectorXd::Zero(M);
      best.w[1] = 1.0;
      best.excess = 0;
    }
    for (int a = 0; a < opt.tries && best.excess > 0; ++a) {
      Eigen::VectorXd w(M);
      for (int j = 0; j < M; ++j) w[j] = rng.normal();
      ++st.attempts;
      const Bisection b = newton_bisect(w.normalized(), active, lifted, opt.iterations, opt.boundary_tol);
      if (b.excess < best.excess) best = b;
    }
    // deterministic sweep over monomial starting points
    for (int j = 1; j < M && best.excess > 0; ++j) {
      ++st.attempts;
      const Bisection b =
          newton_bisect(Eigen::VectorXd::Unit(M, j), active, lifted, opt.iterations, opt.boundary_tol);
      if (b.excess < best.excess) best = b;
    }
    st.exact = best.excess <= 0;
    st.max_excess = std::max(0, best.excess);

    BivariatePoly B(d, std::vector<double>(best.w.data(), best.w.data() + M));
    std::vector<std::vector<int>> next;
    for (const auto& s : sets) {
      std::vector<int> pos, neg;
      for (int i : s) {
        if (on_zero_set(B, pts[i], opt.boundary_tol)) continue;
        (B(pts[i]) > 0 ? pos : neg).push_back(i);
      }
      next.push_back(std::move(pos));
      next.push_back(std::move(neg));
    }
    sets = std::move(next);
    P = P * B;
    factors.push_back(B);
    used += d;
    res.rounds.push_back(st);
  }
  if (res.rounds.empty()) throw PreconditionError("degree too small for a bisection round");
  res.poly = P;

  CellOptions co;
  co.initial_grid = opt.initial_grid;
  co.max_grid = opt.max_grid;
  co.boundary_tol = opt.boundary_tol;
  const CellLabeling lab = assign_cells(factors, pts, co);
  res.n_components = lab.n_components;
  res.grid_resolution = lab.resolution;
  res.unresolved = lab.unresolved;

  std::map<int, std::vector<int>> by_label;
  for (int i = 0; i < static_cast<int>(pts.size()); ++i) {
    const bool on_z = std::any_of(factors.begin(), factors.end(),
                                  [&](const BivariatePoly& f) { return on_zero_set(f, pts[i], opt.boundary_tol); });
    if (lab.labels[i] == -1 && on_z) {
      res.boundary.push_back(i);
      continue;
    }
    // unresolved points keep a cell of their own so the bookkeeping stays exact
    const int key = lab.labels[i] >= 0 ? lab.labels[i] : lab.n_components + i;
    by_label[key].push_back(i);
  }
  std::size_t max_cell = 0;
  for (auto& [key, v] : by_label) {
    max_cell = std::max(max_cell, v.size());
    res.cells.push_back(std::move(v));
  }
  res.all_on_boundary = res.cells.empty();
  const double DD = static_cast<double>(D) * D;
  res.c1 = res.n_components / DD;
  res.c2 = static_cast<double>(max_cell) / (static_cast<double>(pts.size()) / DD);
  return res;
}

}  // namespace kakeya::incidence
