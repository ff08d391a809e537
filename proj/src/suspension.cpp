#include "attractors/constructors.hpp"

#include <limits>

namespace attr {

namespace {

class MappingTorusManifold final : public Manifold {
 public:
  explicit MappingTorusManifold(SystemPtr f) : f_(std::move(f)), b_(f_->manifold), nb_(b_->storage()) {}
  std::string name() const override { return "mapping torus of " + f_->name; }
  PointKind kind() const override { return PointKind::MappingTorus; }
  int dim() const override { return b_->dim() + 1; }
  int storage() const override { return nb_ + 1; }

  // (x, s) with s reduced to [0, 1) through (x, s + 1) ~ (f(x), s)
  Vec canonical(const Vec& x) const override {
    const double s = x(nb_);
    if (!std::isfinite(s)) throw std::invalid_argument("mapping torus: non-finite height");
    double k = std::floor(s);
    double r = s - k;
    if (r >= 1.0) {
      r = 0.0;
      k += 1.0;
    }
    Vec p = x.head(nb_);
    for (long i = 0; i < static_cast<long>(k); ++i) p = f_->forward(p);
    for (long i = 0; i < static_cast<long>(-k); ++i) p = f_->backward(p);
    Vec y(storage());
    y << b_->canonical(p), r;
    return y;
  }
  Vec retract(const Vec& x, const Vec& v) const override {
    Vec y(storage());
    y << b_->retract(x.head(nb_), v.head(b_->dim())), x(nb_) + v(b_->dim());
    return canonical(y);
  }
  Vec log(const Vec& x, const Vec& y) const override {
    Vec best;
    double bn = std::numeric_limits<double>::infinity();
    for (const auto& [p, t] : lifts(y)) {
      Vec v(dim());
      v << b_->log(x.head(nb_), p), t - x(nb_);
      if (v.norm() < bn) {
        bn = v.norm();
        best = v;
      }
    }
    return best;
  }
  double distance(const Vec& x, const Vec& y) const override {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [p, t] : lifts(y)) {
      const double db = b_->distance(x.head(nb_), p), dt = t - x(nb_);
      best = std::min(best, std::sqrt(db * db + dt * dt));
    }
    return best;
  }
  Vec embed(const Vec& x) const override {
    Vec e(embed_dim());
    e << b_->embed(x.head(nb_)), x(nb_);
    return e;
  }
  int embed_dim() const override { return b_->embed_dim() + 1; }
  Vec random_point(Rng& rng) const override {
    std::uniform_real_distribution<double> U(0.0, 1.0);
    Vec y(storage());
    y << b_->random_point(rng), U(rng);
    return y;
  }
  bool near_chart_boundary(const Vec& x, double h) const override { return b_->near_chart_boundary(x.head(nb_), h); }
  Point to_point(const Vec& x) const override {
    Point p;
    p.kind = PointKind::MappingTorus;
    p.parts.push_back(b_->to_point(x.head(nb_)));
    p.scalar = x(nb_);
    return p;
  }
  Vec from_point(const Point& p) const override {
    if (p.kind != PointKind::MappingTorus || p.parts.size() != 1)
      throw std::invalid_argument("expected mapping-torus point");
    Vec y(storage());
    y << b_->from_point(p.parts[0]), p.scalar;
    return canonical(y);
  }

 private:
  std::vector<std::pair<Vec, double>> lifts(const Vec& y) const {
    const Vec p = y.head(nb_);
    const double t = y(nb_);
    return {{p, t}, {f_->backward(p), t + 1.0}, {f_->forward(p), t - 1.0}};
  }

  SystemPtr f_;
  ManifoldPtr b_;
  int nb_;
};

}  // namespace

SystemPtr suspension(const SystemPtr& f, double tau) {
  if (!f->backward) throw ConstructionError("suspension: system must be invertible");
  if (!(tau > 0.0 && tau < 1.0)) throw std::invalid_argument("suspension: time step must lie in (0,1)");
  auto M = std::make_shared<MappingTorusManifold>(f);
  const int nb = f->manifold->storage();
  const int d = f->dim();

  auto sys = std::make_shared<SystemSpec>();
  sys->name = "suspension(" + f->name + ")";
  sys->manifold = M;
  sys->is_flow = true;
  sys->time_step = tau;
  sys->flow = [M, nb](const Vec& x, double t) {
    Vec y = x;
    y(nb) += t;
    return M->canonical(y);
  };
  sys->forward = [M, nb, tau](const Vec& x) {
    Vec y = x;
    y(nb) += tau;
    return M->canonical(y);
  };
  sys->backward = [M, nb, tau](const Vec& x) {
    Vec y = x;
    y(nb) -= tau;
    return M->canonical(y);
  };
  sys->tangent = [f, nb, d, tau](const Vec& x) {
    Mat J = Mat::Identity(d + 1, d + 1);
    if (x(nb) + tau >= 1.0) J.topLeftCorner(d, d) = tangent_at(*f, x.head(nb));
    return J;
  };
  sys->declared_dim = f->declared_dim;
  sys->declared_orientable = f->declared_orientable;
  sys->recipe.op = "suspension";
  sys->recipe.params["tau"] = format_real(tau);
  sys->recipe.children.push_back(f->recipe);
  sys->factors = {f};
  if (f->trapping) sys->trapping = sliced_region(M, 0, nb, f->trapping);
  validate_system(*sys);
  return sys;
}

}  // namespace attr
