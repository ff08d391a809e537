#include <doctest.h>

#include "attractors/constructors.hpp"

using namespace attr;

namespace {
SystemPtr da() {
  const auto a = toral_automorphism(cat_matrix());
  return da_surgery(*a, default_surgery_params(*a));
}

double round_trip_error(const SystemSpec& s, int n, std::uint64_t seed = 5) {
  Rng rng(seed);
  double e = 0;
  for (int i = 0; i < n; ++i) {
    const Vec x = s.manifold->random_point(rng);
    e = std::max({e, s.manifold->distance(s.backward(s.forward(x)), x),
                  s.manifold->distance(s.forward(s.backward(x)), x)});
  }
  return e;
}
}  // namespace

TEST_CASE("product is componentwise") {
  const auto a = da();
  const auto b = north_south_sphere(2);
  const auto p = product({a, b});
  CHECK(p->dim() == 4);
  CHECK(p->fixed_points.size() == a->fixed_points.size() * b->fixed_points.size());
  Rng rng(1);
  const int na = a->manifold->storage();
  for (int i = 0; i < 20; ++i) {
    const Vec x = p->manifold->random_point(rng);
    const Vec y = p->forward(x);
    CHECK((y.head(na) - a->forward(x.head(na))).norm() < 1e-15);
    CHECK((y.tail(3) - b->forward(x.tail(3))).norm() < 1e-15);
  }
  CHECK_THROWS(product({a}));
}

TEST_CASE("with_sink needs a sink") {
  CHECK_THROWS_AS(with_sink(da(), toral_automorphism(cat_matrix())), ConstructionError);
  const auto w = with_sink(da(), torus_gradient_ms(1));
  CHECK(w->dim() == 3);
  CHECK(w->declared_dim == 1);
}

TEST_CASE("tube spin-up keeps the equator and adds polar sources") {
  const auto ply = plykin_system();
  const auto t = tube_spinup(ply);
  CHECK(t->dim() == 3);
  CHECK(t->declared_dim == ply->declared_dim);
  const int nb = ply->manifold->storage();
  Rng rng(2);
  for (int i = 0; i < 200; ++i) {
    Vec x(nb + 1);
    x << ply->manifold->random_point(rng), 1.0;
    const Vec y = t->forward(x);
    CHECK(y(nb) == 1.0);
    CHECK((y.head(nb) - ply->forward(x.head(nb))).norm() < 1e-15);
  }
  CHECK(round_trip_error(*t, 300) < 1e-8);
  int sources = 0;
  for (const auto& fp : t->fixed_points) {
    if (fp.kind != FixedKind::Source) continue;
    ++sources;
    bool at_anchor = false;
    for (const auto& a : t->manifold->anchors()) at_anchor = at_anchor || t->manifold->distance(fp.location, a) < 1e-9;
    CHECK(at_anchor);
  }
  CHECK(sources == 2);
}

TEST_CASE("invariant disk of the Plykin map") {
  const auto d = invariant_disk(plykin_system(), 64);
  CHECK(d.margin > 0);
  REQUIRE(d.region);
  CHECK(d.region->depth(*d.owner->designated_source) < 0);
}

TEST_CASE("capped product has a hyperbolic source at infinity") {
  const auto ply = plykin_system();
  const auto c = capped_product(ply, ply);
  CHECK(c->dim() == 4);
  CHECK(c->declared_dim == 2);
  CHECK(round_trip_error(*c, 300) < 1e-8);
  const double lu = (3 + std::sqrt(5.0)) / 2;
  bool found = false;
  for (const auto& fp : c->fixed_points) {
    if (fp.kind != FixedKind::Source || !c->manifold->degenerate(fp.location)) continue;
    found = true;
    CHECK(c->manifold->distance(c->forward(fp.location), fp.location) == 0.0);
    for (double m : fp.multipliers) CHECK(m == doctest::Approx(lu * lu).epsilon(1e-4));
  }
  CHECK(found);
}

TEST_CASE("connected sum is a diffeomorphism across the neck") {
  const auto base = torus_gradient_ms(2);
  const auto ply = plykin_system();
  const auto neck = auto_neck(*base, *ply);
  CHECK(neck.sink_radius > 0);
  CHECK(neck.source_radius > 0);
  CHECK(neck.exponent > 0);
  const auto s = connected_sum(base, ply, neck);
  REQUIRE(neck_of(*s) != nullptr);
  CHECK(s->dim() == 2);
  CHECK(s->declared_dim == 1);
  CHECK(round_trip_error(*s, 2000) < 1e-8);
  CHECK(neck_of(*ply) == nullptr);
}

TEST_CASE("suspension flow") {
  const auto s = suspension(da());
  CHECK(s->is_flow);
  CHECK(s->dim() == 3);
  CHECK(s->time_step == doctest::Approx(kSuspensionTau));
  Rng rng(4);
  for (int i = 0; i < 100; ++i) {
    const Vec x = s->manifold->random_point(rng);
    CHECK(s->manifold->distance(s->flow(s->flow(x, 0.7), 1.6), s->flow(x, 2.3)) < 1e-9);
    CHECK(s->manifold->distance(s->flow(x, kSuspensionTau), s->forward(x)) < 1e-12);
    CHECK(s->manifold->distance(s->flow(s->flow(x, 1.3), -1.3), x) < 1e-9);
  }
}

TEST_CASE("torus and sphere families") {
  for (int n = 2; n <= 4; ++n)
    for (int d = 1; d <= n - 1; ++d) {
      CAPTURE(n);
      CAPTURE(d);
      const auto s = build_torus_attractor(n, d);
      CHECK(s->dim() == n);
      CHECK(s->declared_dim == d);
      CHECK(s->manifold->kind() != PointKind::Sphere);
    }
  CHECK_THROWS_AS(build_torus_attractor(3, 3), ConfigError);
  CHECK_THROWS_AS(build_torus_attractor(1, 1), ConfigError);
  for (int n = 2; n <= 5; ++n)
    for (int d = 1; d <= n / 2; ++d) {
      CAPTURE(n);
      CAPTURE(d);
      const auto s = build_sphere_attractor(n, d);
      CHECK(s->dim() == n);
      CHECK(s->declared_dim == d);
    }
  CHECK_THROWS_AS(build_sphere_attractor(3, 2), ConfigError);
  CHECK_THROWS_AS(build_sphere_attractor(5, 3), ConfigError);
}

TEST_CASE("recipes round trip and hash deterministically") {
  for (const auto& s : {da(), build_sphere_attractor(4, 2), build_torus_attractor(3, 1), suspension(da()),
                        build_any_manifold(torus_gradient_ms(2), 1)}) {
    CAPTURE(s->name);
    const std::string text = serialize_recipe(s->recipe);
    const RecipeNode back = parse_recipe(text);
    CHECK(serialize_recipe(back) == text);
    CHECK(recipe_hash(back) == recipe_hash(s->recipe));
    CHECK(recipe_hash(s->recipe).size() == 16);
    const auto r = build_from_recipe(back);
    CHECK(r->dim() == s->dim());
    Rng rng(6);
    for (int i = 0; i < 20; ++i) {
      const Vec x = s->manifold->random_point(rng);
      CHECK(s->manifold->distance(r->forward(x), s->forward(x)) < 1e-14);
    }
  }
  CHECK(recipe_hash(da()->recipe) != recipe_hash(plykin_system()->recipe));
}

TEST_CASE("malformed recipes are rejected") {
  CHECK_THROWS_AS(parse_recipe("[node0]\nop = plykin\n[other]\nx = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_recipe("[node1]\nop = plykin\n"), ConfigError);
  CHECK_THROWS_AS(build_from_recipe(parse_recipe("[node0]\nop = mobius\n")), ConfigError);
  CHECK_THROWS_AS(build_from_recipe(parse_recipe("[node0]\nop = plykin\ncolour = red\n")), ConfigError);
  CHECK_THROWS_AS(build_from_recipe(parse_recipe("[node0]\nop = tube\n")), ConfigError);
}
