#include <doctest.h>

#include "attractors/analysis.hpp"
#include "attractors/constructors.hpp"
#include "attractors/parallel.hpp"

#include <cstdlib>

using namespace attr;

namespace {
SystemPtr da() {
  const auto a = toral_automorphism(cat_matrix());
  return da_surgery(*a, default_surgery_params(*a));
}

double cantor_coord(Rng& rng, int digits = 18) {
  double x = 0, w = 1.0 / 3;
  for (int k = 0; k < digits; ++k, w /= 3) x += (rng() & 1) ? 2 * w : 0.0;
  return x;
}

std::vector<Vec> cantor_strip(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<Vec> pts;
  for (std::size_t i = 0; i < n; ++i) pts.push_back(Eigen::Vector2d(U(rng), cantor_coord(rng)));
  return pts;
}

std::vector<Vec> uniform_square(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<Vec> pts;
  for (std::size_t i = 0; i < n; ++i) pts.push_back(Eigen::Vector2d(U(rng), U(rng)));
  return pts;
}

struct ThreadsEnv {
  explicit ThreadsEnv(const char* n) { setenv("ATTRACTOR_THREADS", n, 1); }
  ~ThreadsEnv() { unsetenv("ATTRACTOR_THREADS"); }
};
}  // namespace

TEST_CASE("box dimension of reference sets") {
  const auto sq = box_dimension(uniform_square(200000, 1));
  CHECK(sq.dimension == doctest::Approx(2.0).epsilon(0.025));
  CHECK(sq.reliable);
  const double ct = 1 + std::log(2.0) / std::log(3.0);
  CHECK(box_dimension(cantor_strip(200000, 2)).dimension == doctest::Approx(ct).epsilon(0.03));
  std::vector<Vec> seg;
  for (int i = 0; i < 100000; ++i) seg.push_back(Eigen::Vector2d(i / 1e5, 0.3 * i / 1e5));
  CHECK(box_dimension(seg).dimension == doctest::Approx(1.0).epsilon(0.03));
  const auto pt = box_dimension(std::vector<Vec>(1000, Eigen::Vector2d(0.5, 0.5)));
  CHECK(pt.dimension == 0.0);
}

TEST_CASE("box counts are monotone in the scale") {
  const auto r = box_dimension(cantor_strip(50000, 3));
  REQUIRE(r.scales.size() >= 5);
  for (size_t i = 1; i < r.scales.size(); ++i) {
    CHECK(r.scales[i] < r.scales[i - 1]);
    CHECK(r.counts[i] >= r.counts[i - 1]);
  }
}

TEST_CASE("transversal probe separates solid from Cantor") {
  const Mat frame = Mat::Identity(2, 2);  // along x, transverse y
  const Vec c = Eigen::Vector2d(0.5, 0.5);
  const auto solid = transversal_cantor_probe(uniform_square(100000, 4), c, frame, 0.45, 729);
  CHECK(solid.verdict == "solid");
  CHECK(!solid.cantor_like);
  const auto cantor = transversal_cantor_probe(cantor_strip(100000, 5), c, frame, 0.45, 729);
  CHECK(cantor.verdict == "cantor");
  CHECK(cantor.cantor_like);
  CHECK(cantor.gap_scales >= 2);
  REQUIRE(!cantor.gap_sizes.empty());
  CHECK(cantor.gap_sizes.front() == doctest::Approx(1.0 / 3).epsilon(0.05));
  const auto few = transversal_cantor_probe(uniform_square(100, 6), c, frame, 0.45, 729);
  CHECK(few.verdict == "inconclusive");
}

TEST_CASE("cat map Lyapunov exponents") {
  const auto cat = toral_automorphism(cat_matrix());
  const double l = std::log((3 + std::sqrt(5.0)) / 2);
  const auto r = lyapunov_spectrum(*cat, seeded_start(*cat, 1), 20000, 5, {1, 2});
  REQUIRE(r.exponents.size() == 2);
  CHECK(r.exponents[0] == doctest::Approx(l).epsilon(1e-3));
  CHECK(r.exponents[1] == doctest::Approx(-l).epsilon(1e-3));
  CHECK(r.converged);
  CHECK(unstable_dim(r).value == 1);
}

TEST_CASE("unstable dimension adds over products") {
  const auto cat = toral_automorphism(cat_matrix());
  const auto p = product({cat, cat});
  const auto r = lyapunov_spectrum(*p, seeded_start(*p, 1), 20000, 5, {1});
  CHECK(unstable_dim(r).value == 2);
  const auto q = product({cat, north_south_sphere(2)});
  CHECK(unstable_dim(lyapunov_spectrum(*q, seeded_start(*q, 1), 20000, 5, {1})).value == 1);
  const auto rot = planar_rotation();
  CHECK(unstable_dim(lyapunov_spectrum(*rot, seeded_start(*rot, 1), 5000, 5, {1})).ambiguous);
}

TEST_CASE("periodic census of the cat map") {
  // |det(A^p - I)| = |tr A^p - 2|: 1, 5, 16
  const auto cat = toral_automorphism(cat_matrix());
  CHECK(periodic_census(*cat, 1, 16).count() == 1);
  CHECK(periodic_census(*cat, 2, 16).count() == 5);
  const auto c3 = periodic_census(*cat, 3, 24);
  CHECK(c3.count() == 16);
  int minimal3 = 0;
  for (const auto& p : c3.points) minimal3 += p.minimal_period == 3;
  CHECK(minimal3 == 15);
}

TEST_CASE("DA census finds the source and the two saddles") {
  const auto s = da();
  const auto c = periodic_census(*s, 1, 16);
  REQUIRE(c.count() == 3);
  int src = 0, sad = 0;
  for (const auto& p : c.points) {
    src += p.kind == FixedKind::Source;
    sad += p.kind == FixedKind::Saddle;
  }
  CHECK(src == 1);
  CHECK(sad == 2);
}

TEST_CASE("cone fields") {
  const auto cat = toral_automorphism(cat_matrix());
  const auto smp = attractor_sample(*cat, 2000, 100, 1);
  const auto ok = cone_check(*cat, smp.points, 0.3, 1.5, 1);
  CHECK(ok.pass);
  CHECK(ok.violations == 0);
  CHECK(ok.min_expansion > 2.5);
  const auto rot = planar_rotation();
  const auto bad = cone_check(*rot, attractor_sample(*rot, 500, 10, 1).points, 0.3, 1.01, 1, ConeReference::Fixed);
  CHECK(!bad.pass);
}

TEST_CASE("trapping regions") {
  const auto s = da();
  const auto m = verify_trapping(*s, *s->trapping, 64);
  CHECK(m.pass);
  CHECK(m.proper);
  CHECK(m.margin > 0);
  const auto cat = toral_automorphism(cat_matrix());
  CHECK(!verify_trapping(*cat, *whole_region(cat->manifold), 16).proper);
}

TEST_CASE("orbits report escapes") {
  auto s = std::make_shared<SystemSpec>(*toral_automorphism(cat_matrix()));
  s->forward = [](const Vec& x) { return Vec(x * std::nan("")); };
  CHECK_THROWS_AS(orbit(*s, Eigen::Vector2d(0.1, 0.2), 10, 0), AnalysisError);
}

TEST_CASE("mixing coverage grows") {
  const auto cat = toral_automorphism(cat_matrix());
  const auto r = mixing_probe(*cat, seeded_start(*cat, 1), 100000, 32, {}, Vec::Zero(2), Vec::Ones(2));
  REQUIRE(!r.coverage.empty());
  for (size_t i = 1; i < r.coverage.size(); ++i) CHECK(r.coverage[i] >= r.coverage[i - 1]);
  CHECK(r.coverage.back() > 0.99);
  CHECK(r.checkpoints.back() == 100000);
}

TEST_CASE("expanding verdicts") {
  const auto s = da();
  const auto smp = attractor_sample(*s, 200000, 1000, 1);
  const auto tr = verify_trapping(*s, *s->trapping, 64);
  const auto ly = lyapunov_spectrum(*s, seeded_start(*s, 1), 20000, 5, {1});
  const auto v = expanding_attractor_check(*s, tr, ly, box_dimension(embedded(*s, smp.points)),
                                           attractor_probe(*s, smp, 1));
  CHECK(v.summary() == "PASS");
  CHECK(v.checks.size() == 4);
  const auto cat = toral_automorphism(cat_matrix());
  const auto cs = attractor_sample(*cat, 50000, 100, 1);
  MarginReport none;
  none.proper = false;
  const auto w = expanding_attractor_check(*cat, none, lyapunov_spectrum(*cat, seeded_start(*cat, 1), 5000, 5, {1}),
                                           box_dimension(embedded(*cat, cs.points)), attractor_probe(*cat, cs, 1));
  CHECK(w.summary() == "FAIL(trapping)");
}

TEST_CASE("results do not depend on the thread count") {
  const auto s = da();
  auto run = [&] {
    const auto l = lyapunov_spectrum(*s, seeded_start(*s, 1), 5000, 5, {1, 2, 3, 4});
    const auto c = periodic_census(*s, 2, 12);
    const auto b = box_dimension(embedded(*s, attractor_sample(*s, 50000, 100, 3).points));
    std::vector<double> out = l.exponents;
    for (const auto& p : c.points) out.insert(out.end(), p.location.data(), p.location.data() + p.location.size());
    out.push_back(b.dimension);
    return out;
  };
  std::vector<double> one, many;
  {
    ThreadsEnv e("1");
    one = run();
  }
  {
    ThreadsEnv e("7");
    many = run();
  }
  CHECK(one == many);
}

TEST_CASE("parallel_for visits every index and rethrows") {
  ThreadsEnv e("4");
  CHECK(thread_count() == 4);
  std::vector<int> hit(1000, 0);
  parallel_for(hit.size(), [&](std::size_t i) { hit[i] += 1; });
  CHECK(std::count(hit.begin(), hit.end(), 1) == 1000);
  CHECK_THROWS_AS(parallel_for(10, [](std::size_t i) {
                    if (i == 3) throw std::runtime_error("boom");
                  }),
                  std::runtime_error);
}
