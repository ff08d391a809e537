#include <doctest.h>

#include "attractors/base_systems.hpp"

#include <numbers>

using namespace attr;

namespace {
SystemPtr da() {
  const auto a = toral_automorphism(cat_matrix());
  return da_surgery(*a, default_surgery_params(*a));
}

void check_round_trip(const SystemSpec& s, int n = 200, double tol = 1e-9) {
  Rng rng(17);
  for (int i = 0; i < n; ++i) {
    const Vec x = s.manifold->random_point(rng);
    CHECK(s.manifold->distance(s.backward(s.forward(x)), x) < tol);
    CHECK(s.manifold->distance(s.forward(s.backward(x)), x) < tol);
  }
}
}  // namespace

TEST_CASE("bump profile") {
  BumpProfile th;
  CHECK(th(0.0) == 0.0);
  CHECK(th(1.0) == doctest::Approx(1.0));
  CHECK(th(3.0) == 1.0);
  CHECK(th(0.4) == doctest::Approx(th(-0.4)));
  for (double x = 0.0; x < 1.0; x += 0.05) CHECK(th(x + 0.05) >= th(x));
}

TEST_CASE("surgery profiles") {
  for (const auto& p : {SurgeryProfile::plateau(0.5), SurgeryProfile::exponential()}) {
    CAPTURE(p.describe());
    CHECK(p.psi(0.0) == doctest::Approx(1.0));
    CHECK(p.psi(1.0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(p.psi(1.5) == 0.0);
    // phi = d/du (u psi)
    for (double u = 0.05; u < 1.0; u += 0.1) {
      const double h = 1e-6;
      const double fd = ((u + h) * p.psi(u + h) - (u - h) * p.psi(u - h)) / (2 * h);
      CHECK(p.phi(u) == doctest::Approx(fd).epsilon(1e-5));
    }
  }
  CHECK(SurgeryProfile::plateau(0.5).min_phi() == doctest::Approx(-0.5));
}

TEST_CASE("cat map is hyperbolic with one fixed point") {
  const auto cat = toral_automorphism(cat_matrix());
  REQUIRE(cat->fixed_points.size() == 1);
  const double lu = (3 + std::sqrt(5.0)) / 2;
  const auto m = cat->fixed_points.front().multipliers;
  CHECK(std::max(m[0], m[1]) == doctest::Approx(lu));
  CHECK(std::min(m[0], m[1]) == doctest::Approx(1 / lu));
  check_round_trip(*cat);
}

TEST_CASE("codimension-one anosov matrices") {
  for (int n = 2; n <= 6; ++n) {
    CAPTURE(n);
    const Eigen::MatrixXi A = codimension_one_anosov(n);
    CHECK(std::abs(A.cast<double>().determinant()) == doctest::Approx(1.0));
    const auto mods = eigen_moduli(A.cast<double>());
    int contracting = 0;
    for (double m : mods) {
      CHECK(std::abs(m - 1) > 1e-3);
      contracting += m < 1;
    }
    CHECK(contracting == 1);
  }
}

TEST_CASE("DA surgery turns the fixed point into a source") {
  const auto s = da();
  check_round_trip(*s);
  REQUIRE(s->fixed_points.size() == 3);
  CHECK(s->fixed_points[0].kind == FixedKind::Source);
  CHECK(s->fixed_points[1].kind == FixedKind::Saddle);
  CHECK(s->fixed_points[2].kind == FixedKind::Saddle);
  for (const auto& fp : s->fixed_points) {
    CHECK(s->manifold->distance(s->forward(fp.location), fp.location) < 1e-10);
    const auto num = eigen_moduli(numeric_jacobian(*s, fp.location).J);
    auto rec = fp.multipliers;
    std::sort(rec.begin(), rec.end(), std::greater<>());
    for (size_t i = 0; i < num.size(); ++i) CHECK(num[i] == doctest::Approx(rec[i]).epsilon(1e-5));
  }
  // outside the surgery ball the map agrees with the automorphism
  const auto cat = toral_automorphism(cat_matrix());
  Rng rng(4);
  const Vec p = s->fixed_points[0].location;
  for (int i = 0; i < 100; ++i) {
    const Vec x = s->manifold->random_point(rng);
    if (s->manifold->distance(x, p) > 0.5) CHECK(s->manifold->distance(s->forward(x), cat->forward(x)) < 1e-12);
  }
}

TEST_CASE("analytic tangent matches finite differences") {
  for (const auto& s : {da(), plykin_system(), north_south_sphere(3), torus_gradient_ms(2)}) {
    CAPTURE(s->name);
    Rng rng(8);
    for (int i = 0; i < 30; ++i) {
      const Vec x = s->manifold->random_point(rng);
      const auto J = numeric_jacobian(*s, x);
      if (J.near_chart_boundary) continue;
      CHECK((tangent_at(*s, x) - J.J).norm() < 1e-5 * std::max(1.0, J.J.norm()));
    }
  }
}

TEST_CASE("Plykin map on the pillow sphere") {
  const auto p = plykin_system();
  CHECK(p->manifold->kind() == PointKind::Quotient);
  CHECK(p->declared_dim == 1);
  check_round_trip(*p);
  int sources = 0;
  for (const auto& fp : p->fixed_points) sources += fp.kind == FixedKind::Source;
  CHECK(sources == 1);
  // the isotopy runs from f (a = 0) to the identity (a = 1)
  const auto dt = make_diffeotopy(*p);
  Rng rng(9);
  for (int i = 0; i < 50; ++i) {
    const Vec x = p->manifold->random_point(rng);
    CHECK(p->manifold->distance(dt->forward(0.0, x), p->forward(x)) < 1e-12);
    CHECK(p->manifold->distance(dt->forward(1.0, x), x) < 1e-12);
    for (double a : {0.25, 0.5, 0.9}) CHECK(p->manifold->distance(dt->backward(a, dt->forward(a, x)), x) < 1e-8);
  }
}

TEST_CASE("north-south and gradient systems") {
  const auto ns = north_south_sphere(3, 0.5);
  check_round_trip(*ns);
  REQUIRE(ns->fixed_points.size() == 2);
  CHECK(ns->fixed_points[0].kind != ns->fixed_points[1].kind);
  for (const auto& fp : ns->fixed_points) CHECK(fp.kind != FixedKind::Saddle);
  CHECK(ns->manifold->distance(*ns->designated_source, ns->fixed_points[0].location) > 1.9);
  const auto g = torus_gradient_ms(2);
  check_round_trip(*g);
  CHECK(g->fixed_points.size() == 4);
  CHECK_THROWS_AS(make_diffeotopy(*g), ConstructionError);
}

TEST_CASE("radial logistic flow") {
  const double e = std::numbers::e;
  CHECK(radial_flow_derivative(0.0, 1.0) == doctest::Approx(e));
  CHECK(radial_flow_derivative(1.0, 1.0) == doctest::Approx(1 / e));
  CHECK(radial_flow(1.0, 3.0) == doctest::Approx(1.0));
  CHECK(radial_flow(2.0 - 0.3, 1.0) == doctest::Approx(2.0 - radial_flow(0.3, 1.0)));
  CHECK(radial_flow(radial_flow(0.2, 0.4), 0.6) == doctest::Approx(radial_flow(0.2, 1.0)));
  CHECK(radial_flow(radial_flow(0.2, 1.0), -1.0) == doctest::Approx(0.2));
}

TEST_CASE("rotation has a neutral fixed point") {
  const auto r = planar_rotation();
  check_round_trip(*r);
  const auto m = eigen_moduli(numeric_jacobian(*r, r->manifold->random_point(*std::make_unique<Rng>(1))).J);
  for (double v : m) CHECK(v == doctest::Approx(1.0));
}
