#include "attractors/geometry.hpp"

#include <algorithm>
#include <limits>
#include <numbers>

namespace attr {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

Eigen::Vector2d quotient_canonical(const Eigen::Vector2d& x) {
  const Eigen::Vector2d a = wrap_torus(x);
  const Eigen::Vector2d b = wrap_torus(Eigen::Vector2d(-a));
  if (b(0) < a(0) || (b(0) == a(0) && b(1) < a(1))) return b;
  return a;
}

Eigen::Vector3d pillow_embed(const Eigen::Vector2d& x) {
  const double cx = std::cos(kTwoPi * x(0)), cy = std::cos(kTwoPi * x(1));
  const double sx = std::sin(kTwoPi * x(0)), sy = std::sin(kTwoPi * x(1));
  Eigen::Vector3d psi(cx, cy, sx * sy);
  return psi / psi.norm();
}

// Psi = T u with Psi3^2 = (1 - Psi1^2)(1 - Psi2^2) gives T^2 = 2 / (1 + sqrt(1 - 4 a^2 b^2)).
Eigen::Vector2d pillow_inverse(const Eigen::Vector3d& u_in) {
  const Eigen::Vector3d u = u_in / u_in.norm();
  const double a = u(0), b = u(1), c = u(2);
  const double disc = std::max(0.0, 1.0 - 4.0 * a * a * b * b);
  const double T = std::sqrt(2.0 / (1.0 + std::sqrt(disc)));
  const double ca = std::clamp(T * a, -1.0, 1.0);
  const double cb = std::clamp(T * b, -1.0, 1.0);
  const double prod = T * c;  // sin(2 pi x) sin(2 pi y)
  double sx = std::sqrt(std::max(0.0, 1.0 - ca * ca));
  double sy = std::sqrt(std::max(0.0, 1.0 - cb * cb));
  // Pick x in [0, 1/2] (sx >= 0); sy takes the sign of the product. The smaller
  // sine is recovered from the product where that is better conditioned.
  if (sx >= sy) {
    sy = sx > 0.0 ? prod / sx : 0.0;
  } else {
    sy = std::copysign(sy, prod);
    sx = sy != 0.0 ? prod / sy : 0.0;
  }
  const double x0 = std::atan2(sx, ca) / kTwoPi;
  const double y0 = std::atan2(sy, cb) / kTwoPi;
  return quotient_canonical(Eigen::Vector2d(x0, y0));
}

Vec join_compose(const JoinCoords& j) {
  Vec out(j.u.size() + j.v.size());
  out << std::cos(j.t) * j.u, std::sin(j.t) * j.v;
  return out;
}

JoinCoords join_decompose(const Vec& p, int a, int b) {
  if (p.size() != a + b + 2) throw std::invalid_argument("join_decompose: ambient dimension must equal a+b+2");
  JoinCoords j;
  const Vec head = p.head(a + 1);
  const Vec tail = p.tail(b + 1);
  const double ca = head.norm(), sb = tail.norm();
  j.t = std::atan2(sb, ca);
  constexpr double tiny = 1e-14;
  j.u = ca > tiny ? Vec(head / ca) : Vec(Vec::Unit(a + 1, 0));
  j.v = sb > tiny ? Vec(tail / sb) : Vec(Vec::Unit(b + 1, 0));
  j.degenerate = ca <= tiny || sb <= tiny;
  return j;
}

std::string to_string(PointKind k) {
  switch (k) {
    case PointKind::Torus: return "torus";
    case PointKind::Sphere: return "sphere";
    case PointKind::Quotient: return "quotient";
    case PointKind::Product: return "product";
    case PointKind::Tube: return "tube";
    case PointKind::MappingTorus: return "mapping_torus";
    case PointKind::Interval: return "interval";
    case PointKind::Capped: return "capped";
    case PointKind::Sum: return "sum";
  }
  return "unknown";
}

PointKind point_kind_from_string(const std::string& s) {
  for (int i = 0; i <= static_cast<int>(PointKind::Sum); ++i) {
    const auto k = static_cast<PointKind>(i);
    if (to_string(k) == s) return k;
  }
  throw std::invalid_argument("unknown point variant '" + s + "'");
}

Vec Manifold::round(const Vec&) const { throw std::logic_error(name() + " has no round model"); }
Vec Manifold::unround(const Vec&) const { throw std::logic_error(name() + " has no round model"); }

TangentFrame Manifold::frame(const Vec& x) const {
  const double h = 1e-6;
  Mat J(storage(), dim());
  for (int j = 0; j < dim(); ++j) {
    const Vec e = Vec::Unit(dim(), j) * h;
    J.col(j) = (retract(x, e) - retract(x, -e)) / (2 * h);
  }
  Eigen::HouseholderQR<Mat> qr(J);
  Mat Q = qr.householderQ() * Mat::Identity(storage(), dim());
  return {x, Q};
}

namespace {

class TorusManifold final : public Manifold {
 public:
  explicit TorusManifold(int k) : k_(k) {
    if (k < 1) throw std::invalid_argument("torus dimension must be >= 1");
  }
  std::string name() const override { return "T^" + std::to_string(k_); }
  PointKind kind() const override { return PointKind::Torus; }
  int dim() const override { return k_; }
  int storage() const override { return k_; }
  Vec canonical(const Vec& x) const override { return wrap_torus(x); }
  Vec retract(const Vec& x, const Vec& v) const override { return wrap_torus(x + v); }
  Vec log(const Vec& x, const Vec& y) const override { return wrapped_difference(y - x); }
  double distance(const Vec& x, const Vec& y) const override { return wrapped_difference(y - x).norm(); }
  Vec embed(const Vec& x) const override { return x; }
  int embed_dim() const override { return k_; }
  Vec random_point(Rng& rng) const override {
    std::uniform_real_distribution<double> U(0.0, 1.0);
    Vec x(k_);
    for (int i = 0; i < k_; ++i) x(i) = U(rng);
    return x;
  }
  TangentFrame frame(const Vec& x) const override { return {x, Mat::Identity(k_, k_)}; }
  Point to_point(const Vec& x) const override {
    Point p;
    p.kind = PointKind::Torus;
    p.coords = x;
    return p;
  }
  Vec from_point(const Point& p) const override {
    if (p.kind != PointKind::Torus || p.coords.size() != k_) throw std::invalid_argument("expected torus point");
    return wrap_torus(p.coords);
  }

 private:
  int k_;
};

class SphereManifold final : public Manifold {
 public:
  explicit SphereManifold(int k) : k_(k) {
    if (k < 1) throw std::invalid_argument("sphere dimension must be >= 1");
  }
  std::string name() const override { return "S^" + std::to_string(k_); }
  PointKind kind() const override { return PointKind::Sphere; }
  int dim() const override { return k_; }
  int storage() const override { return k_ + 1; }
  Vec canonical(const Vec& x) const override { return sphere_normalize(x); }
  Vec retract(const Vec& x, const Vec& v) const override {
    const Mat F = householder_frame(x);
    const Vec w = F * v;
    const double th = w.norm();
    if (th == 0.0) return x;
    return sphere_normalize(Vec(std::cos(th) * x + (std::sin(th) / th) * w));
  }
  Vec log(const Vec& x, const Vec& y) const override {
    const Mat F = householder_frame(x);
    const Vec t = F.transpose() * y;
    const double s = t.norm();
    const double c = x.dot(y);
    if (s == 0.0) return Vec::Zero(k_);
    return t * (std::atan2(s, c) / s);
  }
  double distance(const Vec& x, const Vec& y) const override {
    return 2.0 * std::asin(std::min(1.0, (x - y).norm() / 2.0));
  }
  Vec embed(const Vec& x) const override { return x; }
  int embed_dim() const override { return k_ + 1; }
  Vec random_point(Rng& rng) const override {
    std::normal_distribution<double> N(0.0, 1.0);
    Vec x(k_ + 1);
    do {
      for (int i = 0; i <= k_; ++i) x(i) = N(rng);
    } while (x.norm() < 1e-6);
    return x / x.norm();
  }
  bool sphere_like() const override { return true; }
  Vec round(const Vec& x) const override { return x; }
  Vec unround(const Vec& u) const override { return sphere_normalize(u); }
  TangentFrame frame(const Vec& x) const override { return {x, householder_frame(x)}; }
  Point to_point(const Vec& x) const override {
    Point p;
    p.kind = PointKind::Sphere;
    p.coords = x;
    return p;
  }
  Vec from_point(const Point& p) const override {
    if (p.kind != PointKind::Sphere || p.coords.size() != k_ + 1) throw std::invalid_argument("expected sphere point");
    return sphere_normalize(p.coords);
  }

 private:
  int k_;
};

class QuotientManifold final : public Manifold {
 public:
  std::string name() const override { return "T^2/+-"; }
  PointKind kind() const override { return PointKind::Quotient; }
  int dim() const override { return 2; }
  int storage() const override { return 2; }
  Vec canonical(const Vec& x) const override { return quotient_canonical(Eigen::Vector2d(x)); }
  Vec retract(const Vec& x, const Vec& v) const override { return canonical(x + v); }
  Vec log(const Vec& x, const Vec& y) const override {
    const Vec a = wrapped_difference(y - x);
    const Vec b = wrapped_difference(-y - x);
    return a.squaredNorm() <= b.squaredNorm() ? a : b;
  }
  double distance(const Vec& x, const Vec& y) const override {
    return (pillow_embed(Eigen::Vector2d(x)) - pillow_embed(Eigen::Vector2d(y))).norm();
  }
  Vec embed(const Vec& x) const override { return pillow_embed(Eigen::Vector2d(x)); }
  int embed_dim() const override { return 3; }
  Vec random_point(Rng& rng) const override {
    std::uniform_real_distribution<double> U(0.0, 1.0);
    return canonical(Eigen::Vector2d(U(rng), U(rng)));
  }
  bool near_chart_boundary(const Vec& x, double h) const override {
    // the representative chart folds at the four classes fixed by x -> -x
    for (double a : {0.0, 0.5})
      for (double b : {0.0, 0.5})
        if (wrapped_difference(Vec(x - Eigen::Vector2d(a, b))).norm() < 4 * h) return true;
    return false;
  }
  bool sphere_like() const override { return true; }
  Vec round(const Vec& x) const override { return pillow_embed(Eigen::Vector2d(x)); }
  Vec unround(const Vec& u) const override { return pillow_inverse(Eigen::Vector3d(u)); }
  TangentFrame frame(const Vec& x) const override { return {x, Mat::Identity(2, 2)}; }
  Point to_point(const Vec& x) const override {
    Point p;
    p.kind = PointKind::Quotient;
    p.coords = x;
    return p;
  }
  Vec from_point(const Point& p) const override {
    if (p.kind != PointKind::Quotient || p.coords.size() != 2) throw std::invalid_argument("expected quotient point");
    return canonical(p.coords);
  }
};

class IntervalManifold final : public Manifold {
 public:
  IntervalManifold(double lo, double hi) : lo_(lo), hi_(hi) {
    if (!(hi > lo)) throw std::invalid_argument("interval must have hi > lo");
  }
  std::string name() const override { return "I[" + std::to_string(lo_) + "," + std::to_string(hi_) + "]"; }
  PointKind kind() const override { return PointKind::Interval; }
  int dim() const override { return 1; }
  int storage() const override { return 1; }
  Vec canonical(const Vec& x) const override { return Vec::Constant(1, std::clamp(x(0), lo_, hi_)); }
  // unclamped so difference quotients can straddle an endpoint
  Vec retract(const Vec& x, const Vec& v) const override { return x + v; }
  Vec log(const Vec& x, const Vec& y) const override { return y - x; }
  double distance(const Vec& x, const Vec& y) const override { return std::abs(y(0) - x(0)); }
  Vec embed(const Vec& x) const override { return x; }
  int embed_dim() const override { return 1; }
  Vec random_point(Rng& rng) const override {
    std::uniform_real_distribution<double> U(lo_, hi_);
    return Vec::Constant(1, U(rng));
  }
  std::vector<Vec> anchors() const override { return {Vec::Constant(1, lo_), Vec::Constant(1, hi_)}; }
  bool near_chart_boundary(const Vec& x, double h) const override {
    return x(0) - lo_ < 2 * h || hi_ - x(0) < 2 * h;
  }
  Point to_point(const Vec& x) const override {
    Point p;
    p.kind = PointKind::Interval;
    p.coords = x;
    return p;
  }
  Vec from_point(const Point& p) const override {
    if (p.kind != PointKind::Interval || p.coords.size() != 1) throw std::invalid_argument("expected interval point");
    return canonical(p.coords);
  }

 private:
  double lo_, hi_;
};

class ProductManifold final : public Manifold {
 public:
  explicit ProductManifold(std::vector<ManifoldPtr> f) : f_(std::move(f)) {
    if (f_.size() < 2) throw std::invalid_argument("product needs at least two factors");
    int s = 0, d = 0, e = 0;
    for (const auto& m : f_) {
      so_.push_back(s);
      do_.push_back(d);
      eo_.push_back(e);
      s += m->storage();
      d += m->dim();
      e += m->embed_dim();
    }
    so_.push_back(s);
    do_.push_back(d);
    eo_.push_back(e);
  }
  std::string name() const override {
    std::string s;
    for (size_t i = 0; i < f_.size(); ++i) s += (i ? " x " : "") + f_[i]->name();
    return s;
  }
  PointKind kind() const override { return PointKind::Product; }
  int dim() const override { return do_.back(); }
  int storage() const override { return so_.back(); }
  Vec canonical(const Vec& x) const override {
    Vec out(storage());
    for (size_t i = 0; i < f_.size(); ++i) out.segment(so_[i], ssz(i)) = f_[i]->canonical(xs(x, i));
    return out;
  }
  Vec retract(const Vec& x, const Vec& v) const override {
    Vec out(storage());
    for (size_t i = 0; i < f_.size(); ++i)
      out.segment(so_[i], ssz(i)) = f_[i]->retract(xs(x, i), v.segment(do_[i], dsz(i)));
    return out;
  }
  Vec log(const Vec& x, const Vec& y) const override {
    Vec out(dim());
    for (size_t i = 0; i < f_.size(); ++i) out.segment(do_[i], dsz(i)) = f_[i]->log(xs(x, i), xs(y, i));
    return out;
  }
  double distance(const Vec& x, const Vec& y) const override {
    double s = 0;
    for (size_t i = 0; i < f_.size(); ++i) {
      const double d = f_[i]->distance(xs(x, i), xs(y, i));
      s += d * d;
    }
    return std::sqrt(s);
  }
  Vec embed(const Vec& x) const override {
    Vec out(embed_dim());
    for (size_t i = 0; i < f_.size(); ++i) out.segment(eo_[i], eo_[i + 1] - eo_[i]) = f_[i]->embed(xs(x, i));
    return out;
  }
  int embed_dim() const override { return eo_.back(); }
  Vec random_point(Rng& rng) const override {
    Vec out(storage());
    for (size_t i = 0; i < f_.size(); ++i) out.segment(so_[i], ssz(i)) = f_[i]->random_point(rng);
    return out;
  }
  bool degenerate(const Vec& x) const override {
    for (size_t i = 0; i < f_.size(); ++i)
      if (f_[i]->degenerate(xs(x, i))) return true;
    return false;
  }
  bool near_chart_boundary(const Vec& x, double h) const override {
    for (size_t i = 0; i < f_.size(); ++i)
      if (f_[i]->near_chart_boundary(xs(x, i), h)) return true;
    return false;
  }
  TangentFrame frame(const Vec& x) const override {
    Mat B = Mat::Zero(storage(), dim());
    for (size_t i = 0; i < f_.size(); ++i)
      B.block(so_[i], do_[i], ssz(i), dsz(i)) = f_[i]->frame(xs(x, i)).basis;
    return {x, B};
  }
  Point to_point(const Vec& x) const override {
    Point p;
    p.kind = PointKind::Product;
    for (size_t i = 0; i < f_.size(); ++i) p.parts.push_back(f_[i]->to_point(xs(x, i)));
    return p;
  }
  Vec from_point(const Point& p) const override {
    if (p.kind != PointKind::Product || p.parts.size() != f_.size()) throw std::invalid_argument("expected product point");
    Vec out(storage());
    for (size_t i = 0; i < f_.size(); ++i) out.segment(so_[i], ssz(i)) = f_[i]->from_point(p.parts[i]);
    return out;
  }

  const std::vector<ManifoldPtr>& factors() const { return f_; }
  const std::vector<int>& storage_offsets() const { return so_; }

 private:
  Vec xs(const Vec& x, size_t i) const { return x.segment(so_[i], ssz(i)); }
  int ssz(size_t i) const { return so_[i + 1] - so_[i]; }
  int dsz(size_t i) const { return do_[i + 1] - do_[i]; }

  std::vector<ManifoldPtr> f_;
  std::vector<int> so_, do_, eo_;
};

}  // namespace

ManifoldPtr make_torus(int k) { return std::make_shared<TorusManifold>(k); }
ManifoldPtr make_sphere(int k) { return std::make_shared<SphereManifold>(k); }
ManifoldPtr make_quotient_sphere() { return std::make_shared<QuotientManifold>(); }
ManifoldPtr make_interval(double lo, double hi) { return std::make_shared<IntervalManifold>(lo, hi); }
ManifoldPtr make_product(std::vector<ManifoldPtr> factors) {
  return std::make_shared<ProductManifold>(std::move(factors));
}

const std::vector<ManifoldPtr>* product_factors(const Manifold& m) {
  const auto* p = dynamic_cast<const ProductManifold*>(&m);
  return p ? &p->factors() : nullptr;
}

std::vector<int> product_offsets(const Manifold& m) {
  const auto* p = dynamic_cast<const ProductManifold*>(&m);
  if (!p) return {0, m.storage()};
  return p->storage_offsets();
}

PuncturedChart::PuncturedChart(ManifoldPtr m, const Vec& puncture) : m_(std::move(m)), puncture_(puncture) {
  if (!m_->sphere_like()) throw std::invalid_argument("punctured chart requires a sphere-like manifold");
  pole_ = m_->round(puncture_);
  frame_ = householder_frame(pole_);
}

int PuncturedChart::dim() const { return m_->dim(); }

bool PuncturedChart::at_puncture(const Vec& x) const { return (m_->round(x) - pole_).squaredNorm() < 1e-28; }

Vec PuncturedChart::to_plane(const Vec& x) const {
  const Vec u = m_->round(x);
  const double denom = 0.5 * (u - pole_).squaredNorm();  // 1 - u.P for unit vectors
  if (denom < 1e-30) return Vec::Constant(m_->dim(), std::numeric_limits<double>::infinity());
  return (frame_.transpose() * u) / denom;
}

Vec PuncturedChart::from_plane(const Vec& y) const {
  if (!y.allFinite()) return puncture_;
  return m_->unround(inverse_stereographic(y, pole_, frame_));
}

}  // namespace attr
