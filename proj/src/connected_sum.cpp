#include "attractors/constructors.hpp"

#include <limits>

namespace attr {

namespace {

struct Neck {
  NeckParams p;
  LinearChart V, Z;  // base sink chart, sphere source chart

  // |V| = K |Z|^-p with direction kept
  Vec V_to_Z(const Vec& v) const {
    const double r = v.norm();
    const double rz = std::pow(p.K / r, 1.0 / p.exponent);
    return v * (rz / r);
  }
  Vec Z_to_V(const Vec& z) const {
    const double r = z.norm();
    const double rv = p.K * std::pow(r, -p.exponent);
    return z * (rv / r);
  }
  bool in_sink_ball(const Vec& xm) const { return V.to(xm).norm() < p.sink_radius; }
  bool in_source_ball(const Vec& xs) const { return Z.to(xs).norm() < p.source_radius; }
};

class SumManifold final : public Manifold {
 public:
  SumManifold(ManifoldPtr m, ManifoldPtr s, std::shared_ptr<const Neck> neck)
      : m_(std::move(m)), s_(std::move(s)), neck_(std::move(neck)), sm_(m_->storage()), ss_(s_->storage()) {
    Rng rng(0);
    filler_m_ = m_->random_point(rng);
    filler_s_ = s_->random_point(rng);
  }
  std::string name() const override { return m_->name() + " # " + s_->name(); }
  PointKind kind() const override { return PointKind::Sum; }
  int dim() const override { return m_->dim(); }
  int storage() const override { return 1 + sm_ + ss_; }

  bool side_s(const Vec& x) const { return x(0) != 0.0; }
  Vec xm(const Vec& x) const { return x.segment(1, sm_); }
  Vec xs(const Vec& x) const { return x.segment(1 + sm_, ss_); }
  Vec make_m(const Vec& p) const {
    Vec x(storage());
    x << 0.0, p, filler_s_;
    return x;
  }
  Vec make_s(const Vec& p) const {
    Vec x(storage());
    x << 1.0, filler_m_, p;
    return x;
  }
  // Coordinates of a base-side point seen from the sphere side through the neck, and back.
  Vec m_as_s(const Vec& p) const { return neck_->Z.from(neck_->V_to_Z(neck_->V.to(p))); }
  Vec s_as_m(const Vec& p) const { return neck_->V.from(neck_->Z_to_V(neck_->Z.to(p))); }

  Vec canonical(const Vec& x) const override {
    if (side_s(x)) return make_s(s_->canonical(xs(x)));
    const Vec p = m_->canonical(xm(x));
    if (neck_->in_sink_ball(p)) return make_s(s_->canonical(m_as_s(p)));
    return make_m(p);
  }
  // Representation of y in the chart of x's side.
  Vec same_side(const Vec& x, const Vec& y) const {
    if (side_s(x) == side_s(y)) return side_s(x) ? xs(y) : xm(y);
    return side_s(x) ? m_as_s(xm(y)) : s_as_m(xs(y));
  }
  Vec retract(const Vec& x, const Vec& v) const override {
    if (side_s(x)) {
      const Vec p = s_->retract(xs(x), v);
      if (neck_->in_source_ball(p)) return make_m(m_->canonical(s_as_m(p)));
      return make_s(p);
    }
    return canonical(make_m(m_->retract(xm(x), v)));
  }
  Vec log(const Vec& x, const Vec& y) const override {
    return side_s(x) ? s_->log(xs(x), same_side(x, y)) : m_->log(xm(x), same_side(x, y));
  }
  double distance(const Vec& x, const Vec& y) const override {
    if (side_s(x) == side_s(y)) return side_s(x) ? s_->distance(xs(x), xs(y)) : m_->distance(xm(x), xm(y));
    const Vec& a = side_s(x) ? y : x;  // base-side point
    const Vec& b = side_s(x) ? x : y;
    const Vec v = neck_->V.to(xm(a));
    const double r = v.norm();
    if (!(r > 0.0) || !std::isfinite(r)) return std::numeric_limits<double>::infinity();
    // through the neck point radially outward from omega
    const Vec edge_v = v * (neck_->p.sink_radius / r);
    const Vec edge_m = neck_->V.from(edge_v);
    const Vec edge_s = neck_->Z.from(neck_->V_to_Z(edge_v));
    return m_->distance(xm(a), edge_m) + s_->distance(edge_s, xs(b));
  }
  Vec embed(const Vec& x) const override {
    Vec e = Vec::Zero(embed_dim());
    e(0) = side_s(x) ? 1.0 : 0.0;
    if (side_s(x))
      e.tail(s_->embed_dim()) = s_->embed(xs(x));
    else
      e.segment(1, m_->embed_dim()) = m_->embed(xm(x));
    return e;
  }
  int embed_dim() const override { return 1 + m_->embed_dim() + s_->embed_dim(); }
  Vec random_point(Rng& rng) const override {
    std::bernoulli_distribution side(0.5);
    for (int tries = 0; tries < 10000; ++tries) {
      if (side(rng)) {
        const Vec p = s_->random_point(rng);
        if (!neck_->in_source_ball(p)) return make_s(p);
      } else {
        const Vec p = m_->random_point(rng);
        if (!neck_->in_sink_ball(p)) return make_m(p);
      }
    }
    throw std::logic_error("connected sum: rejection sampling failed");
  }
  bool near_chart_boundary(const Vec& x, double h) const override {
    return side_s(x) ? s_->near_chart_boundary(xs(x), h) : m_->near_chart_boundary(xm(x), h);
  }
  Point to_point(const Vec& x) const override {
    Point p;
    p.kind = PointKind::Sum;
    p.side = side_s(x) ? 1 : 0;
    p.parts.push_back(side_s(x) ? s_->to_point(xs(x)) : m_->to_point(xm(x)));
    return p;
  }
  Vec from_point(const Point& p) const override {
    if (p.kind != PointKind::Sum || p.parts.size() != 1) throw std::invalid_argument("expected connected-sum point");
    return canonical(p.side ? make_s(s_->from_point(p.parts[0])) : make_m(m_->from_point(p.parts[0])));
  }

  int sm() const { return sm_; }
  int ss() const { return ss_; }

 private:
  ManifoldPtr m_, s_;
  std::shared_ptr<const Neck> neck_;
  int sm_, ss_;
  Vec filler_m_, filler_s_;
};

double sampled_ball_margin(const LinearChart& ch, const std::function<Vec(const Vec&)>& map, double radius,
                           int dim, Rng& rng) {
  // min over |V| <= radius of radius - |V(map(x))|
  std::normal_distribution<double> N(0.0, 1.0);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  double margin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 2000; ++i) {
    Vec v(dim);
    for (int k = 0; k < dim; ++k) v(k) = N(rng);
    v *= radius * (i % 4 == 0 ? 1.0 : std::pow(U(rng), 1.0 / dim)) / v.norm();
    if (v.norm() == 0.0) continue;
    margin = std::min(margin, radius - ch.to(map(ch.from(v))).norm());
  }
  return margin;
}

}  // namespace

NeckParams auto_neck(const SystemSpec& base, const SystemSpec& sphere) {
  if (!base.sink_chart)
    throw ConstructionError("connected_sum: " + base.name + " has no linearising sink chart");
  if (!sphere.source_chart)
    throw ConstructionError("connected_sum: " + sphere.name +
                            " has no linearising source chart (capped sphere systems are not supported)");
  const auto& V = *base.sink_chart;
  const auto& Z = *sphere.source_chart;
  NeckParams n;
  n.sink_center = V.point;
  n.source_center = Z.point;
  n.exponent = std::log(1.0 / V.rate) / std::log(Z.rate);
  // images of base points leaving {|V| >= v_g} land in |Z| <= kappa r_g, inside the linear domain
  n.source_radius = std::isfinite(Z.radius) ? 0.5 * Z.radius / Z.rate : 0.5;
  n.sink_radius = std::isfinite(V.radius) ? 0.5 * V.radius * V.rate : 0.5;
  n.K = n.sink_radius * std::pow(n.source_radius, n.exponent);
  n.collar_width = n.source_radius * (Z.rate - 1.0);
  return n;
}

SystemPtr connected_sum(const SystemPtr& base, const SystemPtr& sphere, const NeckParams& prm) {
  if (base->dim() != sphere->dim())
    throw ConstructionError("connected_sum: dimensions differ (" + std::to_string(base->dim()) + " vs " +
                            std::to_string(sphere->dim()) + ")");
  if (!base->sink_chart || !sphere->source_chart) (void)auto_neck(*base, *sphere);
  auto neck = std::make_shared<Neck>();
  neck->p = prm;
  neck->V = *base->sink_chart;
  neck->Z = *sphere->source_chart;
  const int n = base->dim();

  Rng rng(99);
  neck->p.sink_margin = sampled_ball_margin(neck->V, base->forward, prm.sink_radius, n, rng);
  neck->p.source_margin = sampled_ball_margin(neck->Z, sphere->backward, prm.source_radius, n, rng);
  if (!(neck->p.sink_margin > 0.0) || !(neck->p.source_margin > 0.0))
    throw ConstructionError("connected_sum: neck balls not invariant (sink margin " +
                            format_real(neck->p.sink_margin) + ", source margin " +
                            format_real(neck->p.source_margin) + "); shrink the neck radii");

  auto M = std::make_shared<SumManifold>(base->manifold, sphere->manifold, neck);
  const int sm = M->sm(), ss = M->ss();

  auto sys = std::make_shared<SystemSpec>();
  sys->name = "connected_sum(" + base->name + ", " + sphere->name + ")";
  sys->manifold = M;
  sys->forward = [=](const Vec& x) {
    if (M->side_s(x)) return M->make_s(sphere->forward(M->xs(x)));
    const Vec y = base->forward(M->xm(x));
    if (neck->in_sink_ball(y)) return M->make_s(M->m_as_s(y));
    return M->make_m(y);
  };
  sys->backward = [=](const Vec& x) {
    if (!M->side_s(x)) return M->make_m(base->backward(M->xm(x)));
    const Vec y = sphere->backward(M->xs(x));
    if (neck->in_source_ball(y)) return M->make_m(base->backward(M->s_as_m(M->xs(x))));
    return M->make_s(y);
  };
  const SystemSpec* self = sys.get();
  sys->tangent = [=](const Vec& x) {
    const Vec y = self->forward(x);
    if (M->side_s(x) && M->side_s(y)) return tangent_at(*sphere, M->xs(x));
    if (!M->side_s(x) && !M->side_s(y)) return tangent_at(*base, M->xm(x));
    return numeric_jacobian(*self, x).J;
  };
  sys->declared_dim = sphere->declared_dim;
  sys->declared_orientable = sphere->declared_orientable;
  sys->recipe.op = "connected_sum";
  sys->recipe.children = {base->recipe, sphere->recipe};
  sys->factors = {base, sphere};

  for (const auto& fp : base->fixed_points) {
    if (base->manifold->distance(fp.location, prm.sink_center) < 1e-9) continue;
    sys->fixed_points.push_back({M->make_m(fp.location), fp.kind, fp.multipliers});
  }
  for (const auto& fp : sphere->fixed_points) {
    if (sphere->manifold->distance(fp.location, prm.source_center) < 1e-9) continue;
    sys->fixed_points.push_back({M->make_s(fp.location), fp.kind, fp.multipliers});
  }
  if (sphere->trapping) sys->trapping = sliced_region(M, 1 + sm, ss, sphere->trapping, 0, 1.0);
  sys->neck = std::make_shared<NeckParams>(neck->p);
  validate_system(*sys, {.probes = 1000, .roundtrip_tol = 1e-8});
  return sys;
}

const NeckParams* neck_of(const SystemSpec& sum) { return sum.neck.get(); }

}  // namespace attr
