#include "attractors/analysis.hpp"
#include "attractors/parallel.hpp"

#include <algorithm>
#include <limits>

namespace attr {

namespace {

struct PointResult {
  bool excluded = false;
  bool violated = false;
  double expansion = std::numeric_limits<double>::infinity();
};

// coefficient norms of w in the basis [E | F]
std::pair<double, double> split_norms(const Mat& E, const Mat& F, const Vec& w) {
  Mat B(E.rows(), E.cols() + F.cols());
  B << E, F;
  const Vec c = B.partialPivLu().solve(w);
  return {c.head(E.cols()).norm(), c.tail(F.cols()).norm()};
}

}  // namespace

ConeReport cone_check(const SystemSpec& sys, const std::vector<Vec>& sample, double aperture, double lambda_min,
                      int du, ConeReference mode, int reference_iters) {
  const int n = sys.dim();
  if (du < 1 || du >= n) throw ConfigError("cone_check: need 1 <= unstable dimension < manifold dimension");
  ConeReport rep;
  rep.aperture = aperture;
  rep.lambda_min = lambda_min;
  std::vector<PointResult> res(sample.size());
  parallel_for(sample.size(), [&](size_t idx) {
    const Vec& x = sample[idx];
    const Vec fx = sys.forward(x);
    Mat Eu, Es, Fu, Fs;
    if (mode == ConeReference::Fixed) {
      Eu = Fu = Mat::Identity(n, n).leftCols(du);
      Es = Fs = Mat::Identity(n, n).rightCols(n - du);
    } else {
      const auto a = estimate_splitting(sys, x, du, reference_iters);
      const auto b = estimate_splitting(sys, fx, du, reference_iters);
      if (!a.converged || !b.converged) {
        res[idx].excluded = true;
        return;
      }
      Eu = a.unstable;
      Es = a.stable;
      Fu = b.unstable;
      Fs = b.stable;
    }
    const Mat J = tangent_at(sys, x);
    const auto lu = J.partialPivLu();
    PointResult& r = res[idx];
    const double slack = 1.0 + 1e-9;
    // axis and boundary vectors of both cones
    for (int i = 0; i < du; ++i)
      for (int j = -1; j < n - du; ++j)
        for (double sgn : {1.0, -1.0}) {
          if (j < 0 && sgn < 0) continue;
          Vec v = Eu.col(i);
          if (j >= 0) v += sgn * aperture * Es.col(j);
          const auto [wu, ws] = split_norms(Fu, Fs, J * v);
          r.expansion = std::min(r.expansion, wu);
          if (ws > aperture * wu * slack || wu < lambda_min) r.violated = true;
        }
    for (int j = 0; j < n - du; ++j)
      for (int i = -1; i < du; ++i)
        for (double sgn : {1.0, -1.0}) {
          if (i < 0 && sgn < 0) continue;
          Vec v = Fs.col(j);
          if (i >= 0) v += sgn * aperture * Fu.col(i);
          const auto [wu, ws] = split_norms(Eu, Es, lu.solve(v));
          r.expansion = std::min(r.expansion, ws);
          if (wu > aperture * ws * slack || ws < lambda_min) r.violated = true;
        }
  });
  rep.min_expansion = std::numeric_limits<double>::infinity();
  double worst = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < res.size(); ++i) {
    if (res[i].excluded) {
      ++rep.excluded;
      continue;
    }
    ++rep.samples;
    rep.min_expansion = std::min(rep.min_expansion, res[i].expansion);
    if (res[i].violated) ++rep.violations;
    if (res[i].expansion < worst) {
      worst = res[i].expansion;
      rep.worst = sample[i];
    }
  }
  if (rep.samples == 0) rep.min_expansion = 0.0;
  rep.pass = rep.samples > 0 && rep.violations == 0 && rep.min_expansion > lambda_min;
  return rep;
}

}  // namespace attr
