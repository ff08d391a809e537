#include "attractors/analysis.hpp"
#include "attractors/parallel.hpp"

#include <optional>

namespace attr {

namespace {

std::vector<Vec> factor_seeds(const Manifold& M, int res);

std::vector<Vec> census_seeds(const Manifold& M, int res, std::size_t& count) {
  auto seeds = factor_seeds(M, res);
  count = seeds.size();
  return seeds;
}

// Products are seeded with the Cartesian product of factor seeds.
std::vector<Vec> factor_seeds(const Manifold& M, int res) {
  if (const auto* fs = product_factors(M)) {
    std::vector<Vec> acc{Vec(0)};
    for (const auto& f : *fs) {
      const auto part = factor_seeds(*f, res);
      std::vector<Vec> next;
      next.reserve(acc.size() * part.size());
      for (const auto& a : acc)
        for (const auto& b : part) {
          Vec x(a.size() + b.size());
          x << a, b;
          next.push_back(x);
        }
      acc = std::move(next);
    }
    return acc;
  }
  std::vector<Vec> seeds;
  const int n = M.dim();
  const bool lattice = (M.kind() == PointKind::Torus || M.kind() == PointKind::Quotient) && n <= 3;
  if (lattice) {
    const int total = static_cast<int>(std::pow(res, n));
    for (int idx = 0; idx < total; ++idx) {
      Vec x(M.storage());
      int r = idx;
      for (int k = 0; k < M.storage(); ++k) {
        x(k) = (r % res + 0.5) / res;
        r /= res;
      }
      seeds.push_back(M.canonical(x));
    }
  } else {
    Rng rng(2024);
    const double total = std::min(std::pow(static_cast<double>(res), n), 4096.0);
    for (int i = 0; i < static_cast<int>(total); ++i) seeds.push_back(M.random_point(rng));
  }
  for (const auto& a : M.anchors()) seeds.push_back(a);
  return seeds;
}

Mat period_jacobian(const SystemSpec& sys, Vec x, int p) {
  Mat J = Mat::Identity(sys.dim(), sys.dim());
  for (int i = 0; i < p; ++i) {
    J = tangent_at(sys, x) * J;
    x = sys.forward(x);
  }
  return J;
}

std::optional<Vec> newton(const SystemSpec& sys, Vec x, int p) {
  const auto& M = *sys.manifold;
  for (int it = 0; it < 80; ++it) {
    const Vec y = iterate(sys, x, p);
    if (M.distance(x, y) < 1e-12) return x;
    const Vec r = M.log(x, y);
    if (!r.allFinite()) return std::nullopt;
    if (M.degenerate(x)) return std::nullopt;
    const Mat A = period_jacobian(sys, x, p) - Mat::Identity(sys.dim(), sys.dim());
    Vec v = -A.completeOrthogonalDecomposition().solve(r);
    if (!v.allFinite()) return std::nullopt;
    if (v.norm() > 0.1) v *= 0.1 / v.norm();
    x = M.retract(x, v);
    if (!x.allFinite()) return std::nullopt;
  }
  const Vec y = iterate(sys, x, p);
  if (M.distance(x, y) < 1e-10) return x;
  return std::nullopt;
}

}  // namespace

CensusReport periodic_census(const SystemSpec& sys, int period, int grid_resolution, double merge_radius) {
  if (period < 1 || period > 4) throw ConfigError("census: period must lie in 1..4");
  if (grid_resolution < 1) throw ConfigError("census: grid resolution must be positive");
  CensusReport rep;
  rep.period = period;
  rep.merge_radius = merge_radius;
  const auto seeds = census_seeds(*sys.manifold, grid_resolution, rep.seeds);
  std::vector<std::optional<Vec>> found(seeds.size());
  parallel_for(seeds.size(), [&](size_t i) {
    try {
      found[i] = newton(sys, seeds[i], period);
    } catch (const std::exception&) {
      found[i].reset();
    }
  });
  const auto& M = *sys.manifold;
  for (const auto& f : found) {
    if (!f) continue;
    ++rep.converged;
    bool dup = false;
    for (const auto& q : rep.points) dup = dup || M.distance(q.location, *f) < merge_radius;
    if (dup) continue;
    PeriodicPoint pp;
    pp.location = *f;
    for (int k = 1; k <= period; ++k)
      if (period % k == 0 && M.distance(iterate(sys, *f, k), *f) < 1e-8) {
        pp.minimal_period = k;
        break;
      }
    const auto kind = classify_multipliers(eigen_moduli(period_jacobian(sys, *f, period)), 1e-6);
    pp.hyperbolic = kind.has_value();
    if (kind) pp.kind = *kind;
    rep.points.push_back(pp);
  }
  return rep;
}

}  // namespace attr
