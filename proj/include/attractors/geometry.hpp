#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <memory>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace attr {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Rng = std::mt19937_64;

template <typename Derived>
using PlainVec = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1>;

// ---------------------------------------------------------------------------
// Scalar-generic free functions

template <typename Derived>
PlainVec<Derived> wrap_torus(const Eigen::MatrixBase<Derived>& v) {
  using S = typename Derived::Scalar;
  PlainVec<Derived> out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const S c = v(i);
    if (!std::isfinite(static_cast<double>(c)))
      throw std::invalid_argument("wrap_torus: non-finite coordinate");
    S r = c - std::floor(c);
    if (r >= S(1)) r = S(0);
    out(i) = r;
  }
  return out;
}

// Componentwise representative of d mod 1 in [-1/2, 1/2].
template <typename Derived>
PlainVec<Derived> wrapped_difference(const Eigen::MatrixBase<Derived>& d) {
  PlainVec<Derived> out(d.size());
  for (Eigen::Index i = 0; i < d.size(); ++i) out(i) = d(i) - std::round(d(i));
  return out;
}

template <typename Derived>
PlainVec<Derived> sphere_normalize(const Eigen::MatrixBase<Derived>& v) {
  const auto n = v.norm();
  if (!(n > 1e-9)) throw std::invalid_argument("sphere_normalize: vector norm below 1e-9");
  return v / n;
}

// Columns span the orthogonal complement of the unit vector x (Householder).
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>
householder_frame(const Eigen::MatrixBase<Derived>& x) {
  using S = typename Derived::Scalar;
  const Eigen::Index n = x.size();
  PlainVec<Derived> w = x;
  const S sgn = x(n - 1) >= S(0) ? S(1) : S(-1);
  w(n - 1) += sgn;
  Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic> H =
      Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>::Identity(n, n) - (S(2) / w.squaredNorm()) * w * w.transpose();
  return H.leftCols(n - 1);
}

// Stereographic projection from the unit pole P with tangent frame F (columns orthonormal, orthogonal to P).
template <typename Derived, typename DP, typename DF>
PlainVec<Derived> stereographic(const Eigen::MatrixBase<Derived>& u, const Eigen::MatrixBase<DP>& P,
                                const Eigen::MatrixBase<DF>& F) {
  const auto denom = 1 - u.dot(P);
  return (F.transpose() * u) / denom;
}

template <typename Derived, typename DP, typename DF>
PlainVec<DP> inverse_stereographic(const Eigen::MatrixBase<Derived>& y, const Eigen::MatrixBase<DP>& P,
                                   const Eigen::MatrixBase<DF>& F) {
  const auto r2 = y.squaredNorm();
  PlainVec<DP> u = (2 * (F * y) + (r2 - 1) * P) / (r2 + 1);
  return u / u.norm();
}

// ---------------------------------------------------------------------------
// Torus / quotient / pillow helpers (2-torus)

Eigen::Vector2d quotient_canonical(const Eigen::Vector2d& x);

// Round embedding of T^2/{x ~ -x} onto S^2.
Eigen::Vector3d pillow_embed(const Eigen::Vector2d& x);
Eigen::Vector2d pillow_inverse(const Eigen::Vector3d& u);

// ---------------------------------------------------------------------------
// Join coordinates: (cos t u, sin t v) on S^{a+b+1}.

struct JoinCoords {
  Vec u;
  Vec v;
  double t = 0.0;
  bool degenerate = false;
};

Vec join_compose(const JoinCoords& j);
JoinCoords join_decompose(const Vec& p, int a, int b);

// ---------------------------------------------------------------------------
// Point: tagged representation used at API and file boundaries.

enum class PointKind : unsigned char {
  Torus = 0,
  Sphere = 1,
  Quotient = 2,
  Product = 3,
  Tube = 4,
  MappingTorus = 5,
  Interval = 6,
  Capped = 7,
  Sum = 8,
};

std::string to_string(PointKind k);
PointKind point_kind_from_string(const std::string& s);

struct Point {
  PointKind kind = PointKind::Torus;
  Vec coords;                  // torus coords, unit vector, quotient rep, interval value
  std::vector<Point> parts;    // product factors, tube base, mapping-torus base, capped factors, sum side point
  double scalar = 0.0;         // tube rho, mapping-torus height
  int side = 0;                // connected-sum side
  bool degenerate = false;     // tube poles, point at infinity of a cap
};

struct TangentFrame {
  Vec base;
  Mat basis;  // storage x dim, orthonormal columns
};

// ---------------------------------------------------------------------------
// Manifold: state vectors are Eigen vectors of length storage(); charts are the
// tangent coordinates used by retract/log at a base point.

class Manifold {
 public:
  virtual ~Manifold() = default;

  virtual std::string name() const = 0;
  virtual PointKind kind() const = 0;
  virtual int dim() const = 0;
  virtual int storage() const = 0;

  virtual Vec canonical(const Vec& x) const = 0;
  virtual Vec retract(const Vec& x, const Vec& v) const = 0;
  virtual Vec log(const Vec& x, const Vec& y) const = 0;
  virtual double distance(const Vec& x, const Vec& y) const = 0;

  virtual Vec embed(const Vec& x) const = 0;
  virtual int embed_dim() const = 0;

  virtual Vec random_point(Rng& rng) const = 0;
  virtual std::vector<Vec> anchors() const { return {}; }
  virtual bool degenerate(const Vec&) const { return false; }
  virtual bool near_chart_boundary(const Vec&, double) const { return false; }

  virtual bool sphere_like() const { return false; }
  virtual Vec round(const Vec& x) const;
  virtual Vec unround(const Vec& u) const;

  virtual TangentFrame frame(const Vec& x) const;

  virtual Point to_point(const Vec& x) const = 0;
  virtual Vec from_point(const Point& p) const = 0;
};

using ManifoldPtr = std::shared_ptr<const Manifold>;

ManifoldPtr make_torus(int k);
ManifoldPtr make_sphere(int k);
ManifoldPtr make_quotient_sphere();
ManifoldPtr make_interval(double lo, double hi);
ManifoldPtr make_product(std::vector<ManifoldPtr> factors);

// Factor access for product manifolds (nullptr if m is not a product).
const std::vector<ManifoldPtr>* product_factors(const Manifold& m);
std::vector<int> product_offsets(const Manifold& m);

// Stereographic chart that sends a chosen point of a sphere-like manifold to infinity.
class PuncturedChart {
 public:
  PuncturedChart() = default;
  PuncturedChart(ManifoldPtr m, const Vec& puncture);
  Vec to_plane(const Vec& x) const;  // +inf norm at the puncture
  Vec from_plane(const Vec& y) const;
  const Vec& puncture() const { return puncture_; }
  bool at_puncture(const Vec& x) const;
  int dim() const;

 private:
  ManifoldPtr m_;
  Vec puncture_;
  Vec pole_;
  Mat frame_;
};

}  // namespace attr
