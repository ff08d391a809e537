#include "attractors/analysis.hpp"

#include "attractors/constructors.hpp"
#include "attractors/parallel.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <unordered_set>

namespace attr {

namespace {

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// 64-bit key of an integer cell; collisions are negligible at the sample sizes used.
template <typename F>
std::uint64_t cell_key(Eigen::Index n, F&& cell) {
  std::uint64_t h = 0x51ed270b27f5a3c1ULL;
  for (Eigen::Index i = 0; i < n; ++i) h = mix64(h ^ static_cast<std::uint64_t>(cell(i)));
  return h;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// Orbits

AttractorSample orbit(const SystemSpec& sys, const Vec& x0, long N, long T0, std::uint64_t seed) {
  if (!(N > T0 && T0 >= 0)) throw ConfigError("orbit: need N > T0 >= 0");
  AttractorSample s;
  s.recipe_hash = recipe_hash(sys.recipe);
  s.transient = T0;
  s.steps = N;
  s.seed = seed;
  s.points.reserve(static_cast<size_t>(N - T0));
  Vec x = sys.manifold->canonical(x0);
  for (long i = 0; i < N; ++i) {
    x = sys.forward(x);
    if (!x.allFinite()) throw AnalysisError("orbit diverged at step " + std::to_string(i + 1));
    if (i >= T0) s.points.push_back(x);
  }
  if (sys.trapping) {
    for (size_t i = 0; i < s.points.size(); ++i)
      if (sys.trapping->depth(s.points[i]) < 0.0)
        throw AnalysisError("orbit: stored point " + std::to_string(i) + " lies outside the trapping region");
  }
  return s;
}

Vec seeded_start(const SystemSpec& sys, std::uint64_t seed) {
  Rng rng(seed);
  for (int tries = 0; tries < 100000; ++tries) {
    const Vec x = sys.manifold->random_point(rng);
    if (!sys.trapping || sys.trapping->depth(x) >= 0.0) return x;
  }
  throw AnalysisError("seeded_start: no start point found inside the trapping region");
}

AttractorSample attractor_sample(const SystemSpec& sys, long points, long transient, std::uint64_t seed) {
  return orbit(sys, seeded_start(sys, seed), transient + points, transient, seed);
}

std::vector<Vec> embedded(const SystemSpec& sys, const std::vector<Vec>& points) {
  std::vector<Vec> out(points.size());
  const size_t chunk = 65536;
  parallel_for((points.size() + chunk - 1) / chunk, [&](size_t c) {
    for (size_t i = c * chunk; i < std::min(points.size(), (c + 1) * chunk); ++i)
      out[i] = sys.manifold->embed(points[i]);
  });
  return out;
}

MarginReport verify_trapping(const SystemSpec& sys, const Region& region, int resolution, double delta) {
  return check_region(sys, region, resolution, delta);
}

// ---------------------------------------------------------------------------
// Lyapunov exponents

namespace {

std::vector<double> lyapunov_single(const SystemSpec& sys, const Vec& x0, long N, int renorm, long transient,
                                    std::uint64_t seed) {
  const int n = sys.dim();
  Rng rng(seed);
  std::normal_distribution<double> G(0.0, 1.0);
  Vec v(n);
  for (int i = 0; i < n; ++i) v(i) = G(rng);
  Vec x = sys.manifold->retract(sys.manifold->canonical(x0), Vec(1e-3 * v / v.norm()));
  for (long i = 0; i < transient; ++i) x = sys.forward(x);
  Mat Q(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) Q(i, j) = G(rng);
  Q = Eigen::HouseholderQR<Mat>(Q).householderQ();
  std::vector<double> sums(n, 0.0);
  auto reorthonormalize = [&] {
    Eigen::HouseholderQR<Mat> qr(Q);
    const Mat R = qr.matrixQR().triangularView<Eigen::Upper>();
    Mat Qn = qr.householderQ() * Mat::Identity(n, n);
    for (int i = 0; i < n; ++i) {
      sums[i] += std::log(std::abs(R(i, i)));
      if (R(i, i) < 0.0) Qn.col(i) = -Qn.col(i);
    }
    Q = Qn;
  };
  for (long i = 0; i < N; ++i) {
    Q = tangent_at(sys, x) * Q;
    x = sys.forward(x);
    if (!x.allFinite() || !Q.allFinite()) throw AnalysisError("lyapunov: orbit diverged at step " + std::to_string(i));
    if ((i + 1) % renorm == 0 || i + 1 == N) reorthonormalize();
  }
  for (auto& s : sums) s /= static_cast<double>(N) * sys.time_step;
  std::sort(sums.begin(), sums.end(), std::greater<>());
  return sums;
}

}  // namespace

LyapunovReport lyapunov_spectrum(const SystemSpec& sys, const Vec& x0, long N, int renorm_interval,
                                 const std::vector<std::uint64_t>& seeds, long transient, double spread_tol) {
  if (N <= 0 || renorm_interval <= 0 || seeds.empty()) throw ConfigError("lyapunov: need N > 0, interval > 0, seeds");
  LyapunovReport r;
  r.steps = N;
  r.renorm_interval = renorm_interval;
  r.time_step = sys.time_step;
  r.per_seed.resize(seeds.size());
  parallel_for(seeds.size(), [&](size_t i) {
    r.per_seed[i] = lyapunov_single(sys, x0, N, renorm_interval, transient, seeds[i]);
  });
  const int n = sys.dim();
  r.exponents.assign(n, 0.0);
  r.spread.assign(n, 0.0);
  for (int k = 0; k < n; ++k) {
    double lo = r.per_seed[0][k], hi = lo, sum = 0.0;
    for (const auto& ps : r.per_seed) {
      sum += ps[k];
      lo = std::min(lo, ps[k]);
      hi = std::max(hi, ps[k]);
    }
    r.exponents[k] = sum / static_cast<double>(seeds.size());
    r.spread[k] = hi - lo;
    if (r.spread[k] > 10.0 * spread_tol) r.converged = false;
  }
  return r;
}

UnstableDim unstable_dim(const LyapunovReport& report, bool flow, double tol) {
  UnstableDim u;
  int near = 0;
  for (double e : report.exponents) {
    if (e > tol)
      ++u.value;
    else if (std::abs(e) <= tol)
      ++near;
  }
  if (flow) {
    u.neutral = std::min(near, 1);
    if (near != 1) {
      u.ambiguous = true;
      u.note = "flow needs exactly one neutral exponent, found " + std::to_string(near);
    }
  } else if (near > 0) {
    u.ambiguous = true;
    u.note = std::to_string(near) + " exponent(s) within " + fmt(tol) + " of zero";
  }
  return u;
}

// ---------------------------------------------------------------------------
// Box-counting dimension

DimensionReport box_dimension(const std::vector<Vec>& points, const ScaleRange& range) {
  DimensionReport rep;
  rep.points = points.size();
  if (points.size() < 2) throw AnalysisError("box_dimension: need at least two points");
  const Eigen::Index D = points[0].size();
  Vec lo = points[0], hi = points[0];
  for (const auto& p : points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double extent = (hi - lo).maxCoeff();
  if (!(extent > 1e-12)) {  // collapsed to a point
    rep.scales = {extent};
    rep.counts = {1};
    return rep;
  }
  const double eps_max = range.eps_max > 0.0 ? range.eps_max : 0.25 * extent;
  const size_t saturation = points.size() / 10;
  std::vector<std::uint64_t> keys(points.size());
  const size_t chunk = 65536;
  const size_t nchunks = (points.size() + chunk - 1) / chunk;
  double eps = eps_max;
  for (int s = 0; s < 60; ++s, eps /= range.ratio) {
    if (range.eps_min > 0.0 && eps < range.eps_min * (1.0 - 1e-12)) break;
    parallel_for(nchunks, [&](size_t c) {
      for (size_t i = c * chunk; i < std::min(points.size(), (c + 1) * chunk); ++i) {
        const Vec& p = points[i];
        keys[i] = cell_key(D, [&](Eigen::Index k) { return static_cast<std::int64_t>(std::floor((p(k) - lo(k)) / eps)); });
      }
    });
    std::sort(keys.begin(), keys.end());
    const size_t count = static_cast<size_t>(std::unique(keys.begin(), keys.end()) - keys.begin());
    rep.scales.push_back(eps);
    rep.counts.push_back(count);
    if (range.eps_min <= 0.0 && count > saturation && rep.scales.size() >= 5) break;
  }
  const size_t m = rep.scales.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (size_t i = 0; i < m; ++i) {
    const double x = std::log(1.0 / rep.scales[i]);
    const double y = std::log(static_cast<double>(rep.counts[i]));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
  }
  const double md = static_cast<double>(m);
  const double vx = sxx - sx * sx / md, vy = syy - sy * sy / md, cxy = sxy - sx * sy / md;
  rep.dimension = vx > 0 ? cxy / vx : 0.0;
  rep.intercept = (sy - rep.dimension * sx) / md;
  rep.r2 = (vx > 0 && vy > 0) ? cxy * cxy / (vx * vy) : 0.0;
  bool monotone = true;
  for (size_t i = 1; i < m; ++i) monotone = monotone && rep.counts[i] >= rep.counts[i - 1];
  const bool octaves = m >= 5 && rep.scales.front() / rep.scales.back() >= 4.0 * (1.0 - 1e-12);
  rep.reliable = rep.r2 >= 0.98 && monotone && octaves;
  return rep;
}

// ---------------------------------------------------------------------------
// Transversal probe

ProbeReport transversal_cantor_probe(const std::vector<Vec>& points, const Vec& center, const Mat& frame,
                                     double radius, int bins) {
  ProbeReport rep;
  rep.bins = bins;
  const auto cod = frame.completeOrthogonalDecomposition();
  std::vector<double> tcoord, ucoord;
  for (const auto& p : points) {
    const Vec d = p - center;
    if (d.norm() > 4.0 * radius * std::sqrt(static_cast<double>(frame.cols()))) continue;
    const Vec c = cod.solve(d);
    if (c.cwiseAbs().maxCoeff() > radius) continue;
    if ((d - frame * c).norm() > radius) continue;
    tcoord.push_back(c(frame.cols() - 1));
    ucoord.push_back(c(0));
  }
  const size_t n = tcoord.size();
  rep.local_points = n;
  if (n < 500) {
    rep.verdict = "inconclusive";
    return rep;
  }
  auto histogram = [](const std::vector<double>& v, int nb) {
    const auto [mn, mx] = std::minmax_element(v.begin(), v.end());
    std::vector<std::size_t> h(nb, 0);
    const double span = *mx - *mn;
    for (double t : v) {
      int b = span > 0 ? static_cast<int>((t - *mn) / span * nb) : 0;
      h[std::clamp(b, 0, nb - 1)]++;
    }
    return h;
  };
  const auto h = histogram(tcoord, bins);
  // an empty run must be long enough to be improbable at the average density
  const int min_run = std::max(2, static_cast<int>(std::ceil(12.0 * bins / static_cast<double>(n))));
  for (int i = 0; i < bins;) {
    if (h[i] != 0) {
      ++i;
      continue;
    }
    int j = i;
    while (j < bins && h[j] == 0) ++j;
    if (j - i >= min_run) rep.gap_sizes.push_back(static_cast<double>(j - i) / bins);
    i = j;
  }
  std::sort(rep.gap_sizes.begin(), rep.gap_sizes.end(), std::greater<>());
  rep.gap_count = static_cast<int>(rep.gap_sizes.size());
  std::vector<int> octaves;
  for (double g : rep.gap_sizes) octaves.push_back(static_cast<int>(std::floor(-std::log2(g))));
  octaves.erase(std::unique(octaves.begin(), octaves.end()), octaves.end());
  rep.gap_scales = static_cast<int>(octaves.size());
  const int fill_bins = std::max(4, std::min(bins, static_cast<int>(n / 20)));
  const auto hu = histogram(ucoord, fill_bins);
  rep.fill_density =
      static_cast<double>(std::count_if(hu.begin(), hu.end(), [](std::size_t c) { return c > 0; })) / fill_bins;
  rep.cantor_like = rep.gap_scales >= 2;
  rep.verdict = rep.cantor_like ? "cantor" : rep.gap_count > 0 ? "gapped" : "solid";
  return rep;
}

std::vector<Vec> local_chart(const SystemSpec& sys, const Vec& center, const std::vector<Vec>& points,
                             double radius) {
  std::vector<Vec> out;
  for (const auto& p : points) {
    if (sys.manifold->distance(center, p) > 0.5) continue;
    const Vec v = sys.manifold->log(center, p);
    if (v.allFinite() && v.norm() <= radius) out.push_back(v);
  }
  return out;
}

namespace {

Mat orthonormal(const Mat& A) {
  Eigen::HouseholderQR<Mat> qr(A);
  return qr.householderQ() * Mat::Identity(A.rows(), A.cols());
}

double subspace_gap(const Mat& A, const Mat& B) {
  if (A.cols() == 0) return 0.0;
  return (B - A * (A.transpose() * B)).norm();
}

Mat push_unstable(const SystemSpec& sys, const Vec& x, int du, int k) {
  const int n = sys.dim();
  std::vector<Vec> pre{x};
  for (int i = 0; i < k; ++i) pre.push_back(sys.backward(pre.back()));
  Mat Q = Mat::Identity(n, du);
  for (int i = 0; i < du; ++i) Q.col(i) += 0.1 * Vec::LinSpaced(n, 1.0 + i, 2.0 + i);
  Q = orthonormal(Q);
  for (int i = k; i >= 1; --i) Q = orthonormal(tangent_at(sys, pre[i]) * Q);
  return Q;
}

Mat pull_stable(const SystemSpec& sys, const Vec& x, int ds, int k) {
  const int n = sys.dim();
  std::vector<Vec> img{x};
  for (int i = 0; i < k; ++i) img.push_back(sys.forward(img.back()));
  Mat Q = Mat::Identity(n, n).rightCols(ds);
  for (int i = 0; i < ds; ++i) Q.col(i) += 0.1 * Vec::LinSpaced(n, 2.0 + i, 1.0 + i);
  Q = orthonormal(Q);
  for (int i = k - 1; i >= 0; --i) Q = orthonormal(tangent_at(sys, img[i]).lu().solve(Q));
  return Q;
}

}  // namespace

Splitting estimate_splitting(const SystemSpec& sys, const Vec& x, int du, int k, double tol) {
  const int n = sys.dim();
  Splitting s;
  s.unstable = du > 0 ? push_unstable(sys, x, du, k) : Mat(n, 0);
  s.stable = du < n ? pull_stable(sys, x, n - du, k) : Mat(n, 0);
  const Mat u2 = du > 0 ? push_unstable(sys, x, du, k + 5) : Mat(n, 0);
  const Mat s2 = du < n ? pull_stable(sys, x, n - du, k + 5) : Mat(n, 0);
  s.converged = subspace_gap(s.unstable, u2) < tol && subspace_gap(s.stable, s2) < tol && s.unstable.allFinite() &&
                s.stable.allFinite();
  return s;
}

ProbeReport attractor_probe(const SystemSpec& sys, const AttractorSample& sample, int du, double radius, int bins) {
  if (sample.points.empty()) throw AnalysisError("probe: empty sample");
  if (du < 1 || du >= sys.dim()) {
    ProbeReport r;
    r.verdict = "inconclusive";
    return r;
  }
  // candidate centers along the sample; keep the window with the most gap scales
  ProbeReport best;
  best.verdict = "inconclusive";
  const size_t stride = std::max<size_t>(1, sample.points.size() / 8);
  for (size_t i = 0; i < sample.points.size(); i += stride) {
    const Vec& c = sample.points[i];
    const auto split = estimate_splitting(sys, c, du);
    if (!split.unstable.allFinite() || !split.stable.allFinite()) continue;
    Mat F(sys.dim(), du + 1);
    F << split.unstable, split.stable.col(0);
    // widen the window until it holds enough points
    ProbeReport rep;
    for (double r = radius; r <= 8.0 * radius; r *= 2.0) {
      const auto local = local_chart(sys, c, sample.points, 2.0 * r * std::sqrt(static_cast<double>(sys.dim())));
      rep = transversal_cantor_probe(local, Vec::Zero(sys.dim()), F, r, bins);
      if (rep.local_points >= 500) break;
    }
    if (rep.local_points < 500) continue;
    if (best.verdict == "inconclusive" || rep.gap_scales > best.gap_scales ||
        (rep.gap_scales == best.gap_scales && rep.local_points > best.local_points))
      best = rep;
  }
  return best;
}

// ---------------------------------------------------------------------------
// Mixing

MixingReport mixing_probe(const SystemSpec& sys, const Vec& x0, long N, int grid, const std::vector<Vec>& reference,
                          const Vec& lo, const Vec& hi) {
  if (grid < 1 || N < 1) throw ConfigError("mixing: need grid >= 1 and N >= 1");
  MixingReport rep;
  rep.grid = grid;
  const Eigen::Index D = lo.size();
  auto key = [&](const Vec& e) {
    return cell_key(D, [&](Eigen::Index k) {
      const double t = (e(k) - lo(k)) / (hi(k) - lo(k));
      return static_cast<std::int64_t>(std::clamp(static_cast<int>(std::floor(t * grid)), 0, grid - 1));
    });
  };
  std::unordered_set<std::uint64_t> occupied;
  const bool all = reference.empty();
  if (all)
    rep.occupied = static_cast<size_t>(std::pow(static_cast<double>(grid), static_cast<double>(D)));
  else {
    for (const auto& e : reference) occupied.insert(key(e));
    rep.occupied = occupied.size();
  }
  std::unordered_set<std::uint64_t> visited;
  size_t hits = 0;
  long next_cp = std::min<long>(1000, N);
  Vec x = sys.manifold->canonical(x0);
  for (long i = 1; i <= N; ++i) {
    x = sys.forward(x);
    const auto k = key(sys.manifold->embed(x));
    if (visited.insert(k).second && (all || occupied.count(k))) ++hits;
    if (i == next_cp) {
      rep.checkpoints.push_back(i);
      rep.coverage.push_back(static_cast<double>(hits) / static_cast<double>(rep.occupied));
      rep.visited.push_back(visited.size());
      next_cp = i == N ? N + 1 : std::min<long>(next_cp * 10, N);
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Verdict

std::string ExpandingVerdict::summary() const {
  for (const auto& c : checks)
    if (!c.pass) return "FAIL(" + c.name + ")";
  return "PASS";
}

ExpandingVerdict expanding_attractor_check(const SystemSpec& sys, const MarginReport& trapping,
                                           const LyapunovReport& lyap, const DimensionReport& dim,
                                           const ProbeReport& probe) {
  ExpandingVerdict v;
  v.checks.push_back({"trapping", trapping.pass && trapping.proper,
                      "margin=" + fmt(trapping.margin) + (trapping.proper ? "" : " (not a proper attractor neighbourhood)")});
  const auto ud = unstable_dim(lyap, sys.is_flow);
  std::string d_detail = "unstable_dim=" + std::to_string(ud.value);
  bool d_ok = !ud.ambiguous && ud.value >= 1;
  if (sys.declared_dim) {
    d_detail += " declared=" + std::to_string(*sys.declared_dim);
    d_ok = d_ok && ud.value == *sys.declared_dim;
  }
  if (ud.ambiguous) d_detail += " (" + ud.note + ")";
  v.checks.push_back({"unstable_dim", d_ok, d_detail});
  const int top = ud.value + (sys.is_flow ? 1 : 0);
  const bool box_ok = dim.dimension >= top && dim.dimension < top + 1;
  v.checks.push_back({"box_dimension", box_ok,
                      "box=" + fmt(dim.dimension) + " band=[" + std::to_string(top) + ".." + std::to_string(top + 1) +
                          ") r2=" + fmt(dim.r2)});
  v.checks.push_back({"transversal", probe.cantor_like,
                      probe.verdict + " gaps=" + std::to_string(probe.gap_count) +
                          " scales=" + std::to_string(probe.gap_scales) + " local=" + std::to_string(probe.local_points)});
  v.pass = true;
  for (const auto& c : v.checks) v.pass = v.pass && c.pass;
  return v;
}

}  // namespace attr
