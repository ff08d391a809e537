#include <doctest.h>

#include "attractors/geometry.hpp"

using namespace attr;

TEST_CASE("wrap_torus lands in [0,1)") {
  Vec v(4);
  v << -0.25, 1.0, 3.75, -1e-18;
  const Vec w = wrap_torus(v);
  CHECK(w(0) == doctest::Approx(0.75));
  CHECK(w(1) == 0.0);
  CHECK(w(2) == doctest::Approx(0.75));
  CHECK(w(3) >= 0.0);
  CHECK(w(3) < 1.0);
  Vec bad(1);
  bad << std::nan("");
  CHECK_THROWS_AS(wrap_torus(bad), std::invalid_argument);
}

TEST_CASE("wrapped difference is the short representative") {
  Vec d(2);
  d << 0.9, -0.6;
  const Vec w = wrapped_difference(d);
  CHECK(w(0) == doctest::Approx(-0.1));
  CHECK(w(1) == doctest::Approx(0.4));
}

TEST_CASE("stereographic projection inverts") {
  Vec P = Vec::Zero(3);
  P(2) = 1;
  const Mat F = householder_frame(P);
  CHECK((F.transpose() * P).norm() < 1e-14);
  CHECK((F.transpose() * F - Mat::Identity(2, 2)).norm() < 1e-14);
  Vec u(3);
  u << 0.3, -0.5, 0.2;
  u.normalize();
  const Vec y = stereographic(u, P, F);
  CHECK((inverse_stereographic(y, P, F) - u).norm() < 1e-13);
}

TEST_CASE("pillow embedding respects the involution") {
  const Eigen::Vector2d x(0.2, 0.35);
  const Eigen::Vector2d mx = Eigen::Vector2d(1 - 0.2, 1 - 0.35);
  CHECK((pillow_embed(x) - pillow_embed(mx)).norm() < 1e-12);
  CHECK(std::abs(pillow_embed(x).norm() - 1) < 1e-12);
  const Eigen::Vector2d back = quotient_canonical(pillow_inverse(pillow_embed(x)));
  CHECK((back - quotient_canonical(x)).norm() < 1e-9);
}

TEST_CASE("join coordinates round trip") {
  JoinCoords j;
  j.u = Vec::Unit(3, 1);
  j.v = Vec::Unit(2, 0);
  j.t = 0.7;
  const Vec p = join_compose(j);
  CHECK(std::abs(p.norm() - 1) < 1e-14);
  const JoinCoords k = join_decompose(p, 2, 1);
  CHECK(k.t == doctest::Approx(0.7));
  CHECK((k.u - j.u).norm() < 1e-12);
  CHECK((k.v - j.v).norm() < 1e-12);
}

TEST_CASE("retract and log invert each other") {
  Rng rng(3);
  std::vector<ManifoldPtr> ms = {make_torus(2), make_torus(5), make_sphere(2), make_sphere(4),
                                 make_quotient_sphere(), make_interval(0, 2),
                                 make_product({make_torus(2), make_sphere(2)})};
  for (const auto& m : ms) {
    CAPTURE(m->name());
    for (int i = 0; i < 50; ++i) {
      const Vec x = m->random_point(rng);
      Vec v = Vec::Random(m->dim()) * 0.05;
      if (m->kind() == PointKind::Interval) v *= std::min(x(0), 2 - x(0)) * 10;
      const Vec y = m->retract(x, v);
      CHECK((m->log(x, y) - v).norm() < 1e-8);
      // quotient distance is the chord of the round pillow, not the chart norm
      if (m->kind() != PointKind::Quotient) CHECK(m->distance(x, y) <= v.norm() * (1 + 1e-6) + 1e-12);
      CHECK(m->distance(x, x) < 1e-12);
    }
  }
}

TEST_CASE("points serialize through the tagged representation") {
  Rng rng(11);
  std::vector<ManifoldPtr> ms = {make_torus(3), make_sphere(3), make_quotient_sphere(),
                                 make_product({make_sphere(2), make_torus(1)})};
  for (const auto& m : ms) {
    CAPTURE(m->name());
    for (int i = 0; i < 20; ++i) {
      const Vec x = m->random_point(rng);
      const Point p = m->to_point(x);
      CHECK(p.kind == m->kind());
      CHECK(m->distance(m->from_point(p), x) < 1e-12);
    }
  }
  CHECK(point_kind_from_string(to_string(PointKind::Capped)) == PointKind::Capped);
  CHECK_THROWS(point_kind_from_string("klein"));
}

TEST_CASE("punctured chart sends the puncture to infinity") {
  const auto s = make_sphere(2);
  Vec p = Vec::Zero(3);
  p(0) = 1;
  const PuncturedChart c(s, p);
  CHECK(c.at_puncture(p));
  CHECK(!std::isfinite(c.to_plane(p).norm()));
  Rng rng(2);
  for (int i = 0; i < 20; ++i) {
    const Vec x = s->random_point(rng);
    CHECK(s->distance(c.from_plane(c.to_plane(x)), x) < 1e-10);
  }
}

TEST_CASE("product factor offsets") {
  const auto m = make_product({make_torus(2), make_sphere(3), make_interval(0, 1)});
  REQUIRE(product_factors(*m) != nullptr);
  CHECK(product_factors(*m)->size() == 3);
  CHECK(product_offsets(*m) == std::vector<int>{0, 2, 6, 7});
  CHECK(m->dim() == 6);
  CHECK(product_factors(*make_torus(2)) == nullptr);
}
