#include "attractors/constructors.hpp"

#include <numbers>

namespace attr {

namespace {

constexpr double kPoleZone = 0.3;  // pole charts for rho < 0.3 or rho > 1.7

class TubeManifold final : public Manifold {
 public:
  explicit TubeManifold(ManifoldPtr base) : b_(std::move(base)) {
    if (!b_->sphere_like()) throw std::invalid_argument("tube spin-up needs a sphere-like base");
    nb_ = b_->storage();
    Rng rng(0);
    pole_base_ = b_->random_point(rng);
  }
  std::string name() const override { return "S^" + std::to_string(dim()) + "[tube over " + b_->name() + "]"; }
  PointKind kind() const override { return PointKind::Tube; }
  int dim() const override { return b_->dim() + 1; }
  int storage() const override { return nb_ + 1; }

  Vec canonical(const Vec& x) const override {
    Vec y(storage());
    const double rho = std::clamp(x(nb_), 0.0, 2.0);
    y.head(nb_) = (rho == 0.0 || rho == 2.0) ? pole_base_ : b_->canonical(x.head(nb_));
    y(nb_) = rho;
    return y;
  }
  Vec retract(const Vec& x, const Vec& v) const override {
    const int pole = pole_of(x);
    if (pole != 0) return from_pole(pole, Vec(to_pole(pole, x) + v));
    Vec y(storage());
    y.head(nb_) = b_->retract(x.head(nb_), v.head(b_->dim()));
    y(nb_) = x(nb_) + v(b_->dim());
    return canonical(y);
  }
  Vec log(const Vec& x, const Vec& y) const override {
    const int pole = pole_of(x);
    if (pole != 0) return to_pole(pole, y) - to_pole(pole, x);
    Vec v(dim());
    v.head(b_->dim()) = b_->log(x.head(nb_), y.head(nb_));
    v(b_->dim()) = y(nb_) - x(nb_);
    return v;
  }
  double distance(const Vec& x, const Vec& y) const override { return (round(x) - round(y)).norm(); }
  Vec embed(const Vec& x) const override { return round(x); }
  int embed_dim() const override { return b_->embed_dim() + 1; }
  Vec random_point(Rng& rng) const override {
    std::uniform_real_distribution<double> U(0.0, 2.0);
    Vec y(storage());
    y.head(nb_) = b_->random_point(rng);
    y(nb_) = U(rng);
    return y;
  }
  std::vector<Vec> anchors() const override {
    Vec n(storage()), s(storage());
    n << pole_base_, 0.0;
    s << pole_base_, 2.0;
    return {n, s};
  }
  bool degenerate(const Vec& x) const override { return x(nb_) == 0.0 || x(nb_) == 2.0; }
  bool near_chart_boundary(const Vec& x, double h) const override {
    return pole_of(x) == 0 && b_->near_chart_boundary(x.head(nb_), h);
  }
  bool sphere_like() const override { return true; }
  Vec round(const Vec& x) const override {
    const double rho = x(nb_);
    const Vec rb = b_->round(x.head(nb_));
    Vec u(rb.size() + 1);
    u.head(rb.size()) = std::sin(std::numbers::pi * rho / 2) * rb;
    u(rb.size()) = std::cos(std::numbers::pi * rho / 2);
    return u;
  }
  Vec unround(const Vec& u) const override {
    const Eigen::Index k = u.size() - 1;
    const double h = u.head(k).norm();
    Vec y(storage());
    y(nb_) = 2.0 / std::numbers::pi * std::atan2(h, u(k));
    y.head(nb_) = h > 1e-300 ? b_->unround(u.head(k) / h) : pole_base_;
    return canonical(y);
  }
  Point to_point(const Vec& x) const override {
    Point p;
    p.kind = PointKind::Tube;
    p.parts.push_back(b_->to_point(x.head(nb_)));
    p.scalar = x(nb_);
    p.degenerate = degenerate(x);
    return p;
  }
  Vec from_point(const Point& p) const override {
    if (p.kind != PointKind::Tube || p.parts.size() != 1) throw std::invalid_argument("expected tube point");
    if (!(p.scalar >= 0.0 && p.scalar <= 2.0)) throw std::invalid_argument("tube rho must lie in [0,2]");
    Vec y(storage());
    y.head(nb_) = b_->from_point(p.parts[0]);
    y(nb_) = p.scalar;
    return canonical(y);
  }

  // Pole chart Z = xi(rho) round_base(x), xi = rho/(1-rho) near rho = 0 and (2-rho)/(rho-1) near rho = 2.
  Vec to_pole(int pole, const Vec& x) const {
    const double rho = x(nb_);
    const double xi = pole < 0 ? rho / (1.0 - rho) : (2.0 - rho) / (rho - 1.0);
    return xi * b_->round(x.head(nb_));
  }
  Vec from_pole(int pole, const Vec& Z) const {
    const double xi = Z.norm();
    Vec y(storage());
    const double r = xi / (1.0 + xi);
    y(nb_) = pole < 0 ? r : 2.0 - r;
    y.head(nb_) = xi > 0.0 ? b_->unround(Z / xi) : pole_base_;
    return canonical(y);
  }
  int pole_of(const Vec& x) const {
    if (x(nb_) < kPoleZone) return -1;
    if (x(nb_) > 2.0 - kPoleZone) return 1;
    return 0;
  }
  const ManifoldPtr& base() const { return b_; }
  int base_storage() const { return nb_; }

 private:
  ManifoldPtr b_;
  int nb_;
  Vec pole_base_;
};

}  // namespace

SystemPtr tube_spinup(const SystemPtr& base, std::shared_ptr<const Diffeotopy> dtp, BumpProfile theta) {
  if (!dtp) {
    if (!base->diffeotopy)
      throw ConstructionError("tube_spinup: " + base->name + " has no diffeotopy; obtain one with make_diffeotopy");
    dtp = base->diffeotopy;
  }
  if (!base->manifold->sphere_like()) throw ConstructionError("tube_spinup: base manifold is not a sphere");
  auto M = std::make_shared<TubeManifold>(base->manifold);
  const int nb = M->base_storage();
  const int db = base->dim();
  const double w = kTubeHalfWidth;

  auto sys = std::make_shared<SystemSpec>();
  sys->name = "tube_spinup(" + base->name + ")";
  sys->manifold = M;
  sys->forward = [dtp, theta, nb, w](const Vec& x) {
    const double rho = x(nb);
    const double beta = (rho - 1.0) / w;
    Vec y(x.size());
    y.head(nb) = std::abs(beta) < 1.0 ? dtp->forward(theta(beta), x.head(nb)) : Vec(x.head(nb));
    y(nb) = radial_flow(rho, 1.0);
    return y;
  };
  sys->backward = [dtp, theta, nb, w](const Vec& x) {
    const double rho = radial_flow(x(nb), -1.0);
    const double beta = (rho - 1.0) / w;
    Vec y(x.size());
    y.head(nb) = std::abs(beta) < 1.0 ? dtp->backward(theta(beta), x.head(nb)) : Vec(x.head(nb));
    y(nb) = rho;
    return y;
  };
  const SystemSpec* self = sys.get();
  sys->tangent = [self, base, nb, db](const Vec& x) {
    if (x(nb) != 1.0) return numeric_jacobian(*self, x).J;
    Mat J = Mat::Zero(db + 1, db + 1);
    J.topLeftCorner(db, db) = tangent_at(*base, x.head(nb));
    J(db, db) = radial_flow_derivative(1.0, 1.0);
    return J;
  };
  sys->declared_dim = base->declared_dim;
  sys->declared_orientable = base->declared_orientable;
  sys->recipe.op = "tube_spinup";
  sys->recipe.children.push_back(base->recipe);

  for (const auto& fp : base->fixed_points) {
    Vec p(nb + 1);
    p << fp.location, 1.0;
    FixedPointRecord r;
    r.location = p;
    r.multipliers = fp.multipliers;
    r.multipliers.push_back(radial_flow_derivative(1.0, 1.0));
    std::sort(r.multipliers.begin(), r.multipliers.end(), std::greater<>());
    r.kind = *classify_multipliers(r.multipliers);
    sys->fixed_points.push_back(r);
  }
  for (const auto& pole : M->anchors()) sys->fixed_points.push_back({pole, FixedKind::Source, std::vector<double>(db + 1, std::exp(1.0))});
  const Vec north = M->anchors().front();
  sys->designated_source = north;

  if (base->trapping) sys->trapping = collar_region(M, base->trapping, 0.02);

  LinearChart sc;
  sc.point = north;
  sc.rate = std::exp(1.0);
  sc.radius = 1.0;  // rho <= 1/2: outside the tube, base coordinate frozen
  sc.to = [M, nb](const Vec& x) {
    if (x(nb) >= 1.0) return Vec(Vec::Constant(M->dim(), std::numeric_limits<double>::infinity()));
    return M->to_pole(-1, x);
  };
  sc.from = [M](const Vec& Z) { return M->from_pole(-1, Z); };
  sys->source_chart = sc;

  auto dt = std::make_shared<Diffeotopy>();
  dt->forward = [dtp, theta, nb, w](double a, const Vec& x) {
    if (a >= 1.0) return x;
    const double rho = x(nb);
    const double beta = (rho - 1.0) / w;
    Vec y(x.size());
    y.head(nb) = std::abs(beta) < 1.0 ? dtp->forward(a + (1.0 - a) * theta(beta), x.head(nb)) : Vec(x.head(nb));
    y(nb) = radial_flow(rho, 1.0 - a);
    return y;
  };
  dt->backward = [dtp, theta, nb, w](double a, const Vec& x) {
    if (a >= 1.0) return x;
    const double rho = radial_flow(x(nb), a - 1.0);
    const double beta = (rho - 1.0) / w;
    Vec y(x.size());
    y.head(nb) = std::abs(beta) < 1.0 ? dtp->backward(a + (1.0 - a) * theta(beta), x.head(nb)) : Vec(x.head(nb));
    y(nb) = rho;
    return y;
  };
  sys->diffeotopy = dt;
  validate_system(*sys);
  return sys;
}

}  // namespace attr
