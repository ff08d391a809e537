#include "attractors/constructors.hpp"

#include <limits>

namespace attr {

namespace {

constexpr double kCapChartSwitch = 100.0;  // |Y| beyond which the chart at infinity is used

class CappedManifold final : public Manifold {
 public:
  CappedManifold(ManifoldPtr a, const Vec& alpha_a, ManifoldPtr b, const Vec& alpha_b)
      : a_(a), b_(b), pa_(a, alpha_a), pb_(b, alpha_b), sa_(a->storage()), sb_(b->storage()) {}

  std::string name() const override {
    return "S^" + std::to_string(dim()) + "[cap of " + a_->name() + " x " + b_->name() + "]";
  }
  PointKind kind() const override { return PointKind::Capped; }
  int dim() const override { return a_->dim() + b_->dim(); }
  int storage() const override { return 1 + sa_ + sb_; }

  Vec infinity() const {
    Vec x(storage());
    x << 1.0, pa_.puncture(), pb_.puncture();
    return x;
  }
  bool is_inf(const Vec& x) const { return x(0) != 0.0; }

  Vec canonical(const Vec& x) const override {
    if (is_inf(x)) return infinity();
    Vec y(storage());
    y(0) = 0.0;
    y.segment(1, sa_) = a_->canonical(x.segment(1, sa_));
    y.segment(1 + sa_, sb_) = b_->canonical(x.segment(1 + sa_, sb_));
    if (!Y(y).allFinite()) return infinity();
    return y;
  }
  // Y = (Phi_a, Phi_b); +inf entries at the cap point.
  Vec Y(const Vec& x) const {
    Vec y(dim());
    if (is_inf(x)) return Vec::Constant(dim(), std::numeric_limits<double>::infinity());
    y.head(a_->dim()) = pa_.to_plane(x.segment(1, sa_));
    y.tail(b_->dim()) = pb_.to_plane(x.segment(1 + sa_, sb_));
    return y;
  }
  Vec from_Y(const Vec& y) const {
    if (!y.allFinite()) return infinity();
    Vec x(storage());
    x(0) = 0.0;
    x.segment(1, sa_) = pa_.from_plane(y.head(a_->dim()));
    x.segment(1 + sa_, sb_) = pb_.from_plane(y.tail(b_->dim()));
    return canonical(x);
  }
  Vec w(const Vec& x) const {
    const Vec y = Y(x);
    if (!y.allFinite()) return Vec::Zero(dim());
    return y / y.squaredNorm();
  }
  Vec from_w(const Vec& w) const {
    const double n2 = w.squaredNorm();
    if (n2 == 0.0) return infinity();
    return from_Y(Vec(w / n2));
  }
  bool cap_chart(const Vec& x) const {
    if (is_inf(x)) return true;
    const Vec y = Y(x);
    return !y.allFinite() || y.norm() > kCapChartSwitch;
  }

  Vec retract(const Vec& x, const Vec& v) const override {
    if (cap_chart(x)) return from_w(Vec(w(x) + v));
    Vec y(storage());
    y(0) = 0.0;
    y.segment(1, sa_) = a_->retract(x.segment(1, sa_), v.head(a_->dim()));
    y.segment(1 + sa_, sb_) = b_->retract(x.segment(1 + sa_, sb_), v.tail(b_->dim()));
    return canonical(y);
  }
  Vec log(const Vec& x, const Vec& y) const override {
    if (cap_chart(x)) return w(y) - w(x);
    Vec v(dim());
    const Vec yy = is_inf(y) ? infinity() : y;
    v.head(a_->dim()) = a_->log(x.segment(1, sa_), yy.segment(1, sa_));
    v.tail(b_->dim()) = b_->log(x.segment(1 + sa_, sb_), yy.segment(1 + sa_, sb_));
    return v;
  }
  double distance(const Vec& x, const Vec& y) const override { return (round(x) - round(y)).norm(); }
  Vec embed(const Vec& x) const override {
    const Vec c = canonical(x);
    Vec e(embed_dim());
    e << a_->embed(c.segment(1, sa_)), b_->embed(c.segment(1 + sa_, sb_));
    return e;
  }
  int embed_dim() const override { return a_->embed_dim() + b_->embed_dim(); }
  Vec random_point(Rng& rng) const override {
    Vec x(storage());
    x << 0.0, a_->random_point(rng), b_->random_point(rng);
    return canonical(x);
  }
  std::vector<Vec> anchors() const override { return {infinity()}; }
  bool degenerate(const Vec& x) const override { return is_inf(x); }
  bool near_chart_boundary(const Vec& x, double h) const override {
    if (cap_chart(x)) return false;
    return a_->near_chart_boundary(x.segment(1, sa_), h) || b_->near_chart_boundary(x.segment(1 + sa_, sb_), h);
  }
  bool sphere_like() const override { return true; }
  // inverse stereographic image of Y from the last axis
  Vec round(const Vec& x) const override {
    const Vec ww = w(x);
    const double r2 = ww.squaredNorm();
    Vec u(dim() + 1);
    u.head(dim()) = 2.0 * ww / (1.0 + r2);
    u(dim()) = (1.0 - r2) / (1.0 + r2);
    return u;
  }
  Vec unround(const Vec& u_in) const override {
    const Vec u = u_in / u_in.norm();
    const double den = 1.0 + u(dim());
    if (den < 1e-300) return from_Y(Vec::Zero(dim()));
    return from_w(Vec(u.head(dim()) / den));
  }
  Point to_point(const Vec& x) const override {
    Point p;
    p.kind = PointKind::Capped;
    p.degenerate = is_inf(x);
    p.parts.push_back(a_->to_point(x.segment(1, sa_)));
    p.parts.push_back(b_->to_point(x.segment(1 + sa_, sb_)));
    return p;
  }
  Vec from_point(const Point& p) const override {
    if (p.kind != PointKind::Capped || p.parts.size() != 2) throw std::invalid_argument("expected capped point");
    if (p.degenerate) return infinity();
    Vec x(storage());
    x << 0.0, a_->from_point(p.parts[0]), b_->from_point(p.parts[1]);
    return canonical(x);
  }

  int sa() const { return sa_; }
  int sb() const { return sb_; }

 private:
  ManifoldPtr a_, b_;
  PuncturedChart pa_, pb_;
  int sa_, sb_;
};

}  // namespace

InvariantDisk invariant_disk(const SystemPtr& sys, int resolution) {
  if (!sys->trapping) throw ConstructionError(sys->name + ": no trapping region to serve as invariant disk");
  if (!sys->designated_source) throw ConstructionError(sys->name + ": no designated source");
  const auto rep = check_region(*sys, *sys->trapping, resolution);
  if (!rep.pass || !rep.proper) {
    std::string where;
    if (rep.worst.size()) where = " at (" + format_vec(rep.worst) + ")";
    throw ConstructionError(sys->name + ": invariant disk check failed, margin " + format_real(rep.margin) + where);
  }
  if (sys->trapping->depth(*sys->designated_source) >= 0.0)
    throw ConstructionError(sys->name + ": designated source lies inside the invariant disk");
  return {sys, sys->trapping, rep.margin};
}

SystemPtr capped_product(const SystemPtr& left, const SystemPtr& right) {
  if (!left->manifold->sphere_like() || !right->manifold->sphere_like())
    throw ConstructionError("capped_product: both factors must live on spheres");
  const auto da = invariant_disk(left);
  const auto db = invariant_disk(right);
  auto M = std::make_shared<CappedManifold>(left->manifold, *left->designated_source, right->manifold,
                                            *right->designated_source);
  const int sa = M->sa(), sb = M->sb();
  const int a = left->dim(), b = right->dim();

  auto sys = std::make_shared<SystemSpec>();
  sys->name = "capped_product(" + left->name + ", " + right->name + ")";
  sys->manifold = M;
  auto step = [M, sa, sb](const SystemSpec& L, const SystemSpec& R, const Vec& x, bool fwd) {
    if (M->is_inf(x)) return M->infinity();
    Vec y(x.size());
    y(0) = 0.0;
    y.segment(1, sa) = fwd ? L.forward(x.segment(1, sa)) : L.backward(x.segment(1, sa));
    y.segment(1 + sa, sb) = fwd ? R.forward(x.segment(1 + sa, sb)) : R.backward(x.segment(1 + sa, sb));
    return y;
  };
  sys->forward = [=](const Vec& x) { return step(*left, *right, x, true); };
  sys->backward = [=](const Vec& x) { return step(*left, *right, x, false); };
  const SystemSpec* self = sys.get();
  sys->tangent = [=](const Vec& x) {
    if (M->cap_chart(x) || M->cap_chart(self->forward(x))) return numeric_jacobian(*self, x).J;
    Mat J = Mat::Zero(a + b, a + b);
    J.topLeftCorner(a, a) = tangent_at(*left, x.segment(1, sa));
    J.bottomRightCorner(b, b) = tangent_at(*right, x.segment(1 + sa, sb));
    return J;
  };
  if (left->declared_dim && right->declared_dim) sys->declared_dim = *left->declared_dim + *right->declared_dim;
  sys->declared_orientable = false;
  sys->recipe.op = "capped_product";
  sys->recipe.children = {left->recipe, right->recipe};
  sys->designated_source = M->infinity();
  sys->factors = {left, right};

  auto designated = [](const SystemSpec& s, const FixedPointRecord& fp) {
    return s.manifold->distance(fp.location, *s.designated_source) < 1e-9;
  };
  for (const auto& fa : left->fixed_points) {
    if (designated(*left, fa)) continue;
    for (const auto& fb : right->fixed_points) {
      if (designated(*right, fb)) continue;
      FixedPointRecord r;
      r.location = Vec(1 + sa + sb);
      r.location << 0.0, fa.location, fb.location;
      r.multipliers = fa.multipliers;
      r.multipliers.insert(r.multipliers.end(), fb.multipliers.begin(), fb.multipliers.end());
      std::sort(r.multipliers.begin(), r.multipliers.end(), std::greater<>());
      r.kind = *classify_multipliers(r.multipliers);
      sys->fixed_points.push_back(r);
    }
  }
  sys->fixed_points.push_back(make_fixed_point(*sys, M->infinity()));
  if (sys->fixed_points.back().kind != FixedKind::Source)
    throw ConstructionError("capped_product: cap point is not a source");

  auto inner = make_product({left->manifold, right->manifold});
  sys->trapping = sliced_region(M, 1, sa + sb, product_region(inner, {da.region, db.region}), 0, 0.0);

  if (left->diffeotopy && right->diffeotopy) {
    auto dl = left->diffeotopy, dr = right->diffeotopy;
    auto dt = std::make_shared<Diffeotopy>();
    auto apply = [M, sa, sb](const Diffeotopy& L, const Diffeotopy& R, double al, const Vec& x, bool fwd) {
      if (M->is_inf(x)) return M->infinity();
      Vec y(x.size());
      y(0) = 0.0;
      y.segment(1, sa) = fwd ? L.forward(al, x.segment(1, sa)) : L.backward(al, x.segment(1, sa));
      y.segment(1 + sa, sb) = fwd ? R.forward(al, x.segment(1 + sa, sb)) : R.backward(al, x.segment(1 + sa, sb));
      return y;
    };
    dt->forward = [=](double al, const Vec& x) { return apply(*dl, *dr, al, x, true); };
    dt->backward = [=](double al, const Vec& x) { return apply(*dl, *dr, al, x, false); };
    dt->approximate = dl->approximate || dr->approximate;
    sys->diffeotopy = dt;
  }
  validate_system(*sys);
  return sys;
}

}  // namespace attr
