#include "attractors/base_systems.hpp"

#include <algorithm>
#include <complex>
#include <limits>
#include <numbers>

namespace attr {

// ---------------------------------------------------------------------------
// Profiles

double BumpProfile::operator()(double x) const {
  const double a = std::abs(x);
  if (a >= 1.0) return 1.0;
  if (a == 0.0) return 0.0;
  return 1.0 - std::exp(1.0 - 1.0 / (1.0 - a * a));
}

namespace {
double step5(double t) { return t * t * t * (10.0 + t * (-15.0 + 6.0 * t)); }
double step5_integral(double t) { return t * t * t * t * (2.5 + t * (-3.0 + t)); }
}  // namespace

SurgeryProfile SurgeryProfile::plateau(double depth, double flat_end) {
  if (!(depth > 0.0) || !(flat_end > 0.0 && flat_end < 1.0))
    throw std::invalid_argument("plateau profile needs depth > 0 and flat_end in (0,1)");
  SurgeryProfile p;
  p.kind_ = Kind::Plateau;
  p.m_ = depth;
  p.u2_ = flat_end;
  // G(1) = 0 fixes the midpoint of the first step.
  const double c = depth * (1.0 + flat_end) / (2.0 * (1.0 + depth));
  p.w1_ = std::min(0.1, c);
  p.u1_ = c - p.w1_ / 2;
  if (p.u1_ + p.w1_ >= p.u2_) throw std::invalid_argument("plateau profile: steps overlap");
  p.finish();
  return p;
}

SurgeryProfile SurgeryProfile::exponential() {
  SurgeryProfile p;
  p.kind_ = Kind::Exponential;
  p.finish();
  return p;
}

void SurgeryProfile::finish() {
  min_phi_ = std::numeric_limits<double>::infinity();
  max_G_ = 0.0;
  const int N = 20000;
  for (int i = 0; i <= N; ++i) {
    const double u = static_cast<double>(i) / N;
    min_phi_ = std::min(min_phi_, phi(u));
    max_G_ = std::max(max_G_, std::abs(u * psi(u)));
  }
  if (kind_ == Kind::Plateau) min_phi_ = std::min(min_phi_, -m_);
}

double SurgeryProfile::G(double u) const {
  const double g2 = u1_ + w1_ * (1.0 - (1.0 + m_) / 2.0);
  const double g3 = g2 - m_ * (u2_ - u1_ - w1_);
  if (u <= u1_) return u;
  if (u < u1_ + w1_) return u - (1.0 + m_) * w1_ * step5_integral((u - u1_) / w1_);
  if (u <= u2_) return g2 - m_ * (u - u1_ - w1_);
  if (u < 1.0) return g3 - m_ * (u - u2_) + m_ * (1.0 - u2_) * step5_integral((u - u2_) / (1.0 - u2_));
  return 0.0;
}

double SurgeryProfile::psi(double u) const {
  u = std::abs(u);
  if (u >= 1.0) return 0.0;
  if (kind_ == Kind::Exponential) return std::exp(1.0 - 1.0 / (1.0 - u * u));
  if (u <= u1_) return 1.0;
  return G(u) / u;
}

double SurgeryProfile::dpsi(double u) const {
  u = std::abs(u);
  if (u >= 1.0) return 0.0;
  if (kind_ == Kind::Exponential) {
    const double q = 1.0 - u * u;
    return psi(u) * (-2.0 * u / (q * q));
  }
  if (u <= u1_) return 0.0;
  return (phi(u) - psi(u)) / u;
}

double SurgeryProfile::phi(double u) const {
  u = std::abs(u);
  if (u >= 1.0) return 0.0;
  if (kind_ == Kind::Exponential) return psi(u) + u * dpsi(u);
  if (u <= u1_) return 1.0;
  if (u < u1_ + w1_) return 1.0 - (1.0 + m_) * step5((u - u1_) / w1_);
  if (u <= u2_) return -m_;
  return -m_ + m_ * step5((u - u2_) / (1.0 - u2_));
}

std::string SurgeryProfile::describe() const { return kind_ == Kind::Plateau ? "plateau" : "exponential"; }

// ---------------------------------------------------------------------------
// Toral automorphisms

Eigen::MatrixXi cat_matrix() {
  Eigen::MatrixXi A(2, 2);
  A << 2, 1, 1, 1;
  return A;
}

Eigen::MatrixXi codimension_one_anosov(int n) {
  if (n == 2) return cat_matrix();
  if (n < 2 || n > 8) throw std::invalid_argument("codimension-one Anosov family available for 2 <= n <= 8");
  // Symmetric tridiagonal, unit off-diagonal, diagonal in 1..4, first hit in lexicographic order.
  std::vector<int> diag(n, 1);
  while (true) {
    Mat A = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      A(i, i) = diag[i];
      if (i + 1 < n) A(i, i + 1) = A(i + 1, i) = 1.0;
    }
    if (std::abs(A.determinant() - 1.0) < 1e-9) {
      Eigen::SelfAdjointEigenSolver<Mat> es(A, Eigen::EigenvaluesOnly);
      const Vec ev = es.eigenvalues();
      int contracting = 0;
      bool ok = true;
      for (int i = 0; i < n; ++i) {
        if (ev(i) <= 0.0 || std::abs(ev(i) - 1.0) < 0.05) ok = false;
        if (ev(i) < 1.0) ++contracting;
      }
      if (ok && contracting == 1) {
        Eigen::MatrixXi out = A.cast<int>();
        return out;
      }
    }
    int k = n - 1;
    while (k >= 0 && diag[k] == 4) diag[k--] = 1;
    if (k < 0) break;
    ++diag[k];
  }
  throw std::logic_error("no codimension-one Anosov matrix found");
}

namespace {

Vec linear_step(const Mat& A, const Vec& x) {
  const Vec Ax = A * x;
  return wrap_torus(Ax);
}

Eigen::MatrixXi integer_inverse(const Eigen::MatrixXi& A) {
  const Mat inv = A.cast<double>().inverse();
  Eigen::MatrixXi out = inv.array().round().cast<int>();
  if ((A * out - Eigen::MatrixXi::Identity(A.rows(), A.cols())).cwiseAbs().maxCoeff() != 0)
    throw std::invalid_argument("matrix is not invertible over the integers");
  return out;
}

long long integer_det(const Eigen::MatrixXi& A) { return std::llround(A.cast<double>().determinant()); }

// Points x in [0,1)^n with (A - I) x integral, enumerated on the (1/N) lattice.
std::vector<Vec> toral_fixed_points(const Eigen::MatrixXi& A) {
  const int n = static_cast<int>(A.rows());
  const Eigen::MatrixXi B = A - Eigen::MatrixXi::Identity(n, n);
  const long long N = std::llabs(integer_det(B));
  if (N == 1) return {Vec::Zero(n)};
  double total = std::pow(static_cast<double>(N), n);
  if (total > 4e6) return {Vec::Zero(n)};
  std::vector<Vec> out;
  std::vector<long long> k(n, 0);
  while (true) {
    bool ok = true;
    for (int i = 0; i < n && ok; ++i) {
      long long s = 0;
      for (int j = 0; j < n; ++j) s += static_cast<long long>(B(i, j)) * k[j];
      ok = (s % N) == 0;
    }
    if (ok) {
      Vec x(n);
      for (int i = 0; i < n; ++i) x(i) = static_cast<double>(k[i]) / N;
      out.push_back(x);
    }
    int i = n - 1;
    while (i >= 0 && k[i] == N - 1) k[i--] = 0;
    if (i < 0) break;
    ++k[i];
  }
  return out;
}

RecipeNode toral_recipe(const Eigen::MatrixXi& A) {
  RecipeNode r;
  r.op = "toral_automorphism";
  r.params["matrix"] = format_int_matrix(A);
  return r;
}

}  // namespace

SystemPtr toral_automorphism(const Eigen::MatrixXi& A) {
  const int n = static_cast<int>(A.rows());
  if (n < 1 || A.cols() != n) throw std::invalid_argument("toral automorphism needs a square matrix");
  const long long det = integer_det(A);
  if (std::llabs(det) != 1)
    throw std::invalid_argument("toral automorphism must be unimodular, det = " + std::to_string(det));
  const Mat Ad = A.cast<double>();
  Eigen::EigenSolver<Mat> es(Ad, false);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto ev = es.eigenvalues()(i);
    if (std::abs(std::abs(ev) - 1.0) < 1e-9) {
      throw std::invalid_argument("toral automorphism not hyperbolic: eigenvalue (" + format_real(ev.real()) + "," +
                                  format_real(ev.imag()) + ") has modulus 1");
    }
  }
  const Mat Ainv = integer_inverse(A).cast<double>();
  auto sys = std::make_shared<SystemSpec>();
  sys->name = "toral_automorphism[" + format_int_matrix(A) + "]";
  sys->manifold = make_torus(n);
  sys->forward = [Ad](const Vec& x) { return linear_step(Ad, x); };
  sys->backward = [Ainv](const Vec& x) { return linear_step(Ainv, x); };
  sys->tangent = [Ad](const Vec&) { return Ad; };
  sys->toral_matrix = A;
  sys->recipe = toral_recipe(A);
  std::vector<double> mods = eigen_moduli(Ad);
  for (const auto& p : toral_fixed_points(A)) {
    FixedPointRecord r;
    r.location = p;
    r.multipliers = mods;
    r.kind = *classify_multipliers(mods);
    sys->fixed_points.push_back(r);
  }
  sys->trapping = whole_region(sys->manifold);
  validate_system(*sys, {.probes = 200});
  return sys;
}

// ---------------------------------------------------------------------------
// DA surgery

namespace {

struct StableData {
  double ls = 0;         // contracting eigenvalue
  double weakest_u = 0;  // smallest expanding eigenvalue
  Vec es;
};

StableData stable_data(const Eigen::MatrixXi& A) {
  const int n = static_cast<int>(A.rows());
  const Mat Ad = A.cast<double>();
  Eigen::EigenSolver<Mat> es(Ad);
  StableData d;
  int count = 0;
  d.weakest_u = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const auto ev = es.eigenvalues()(i);
    if (std::abs(ev) < 1.0) {
      ++count;
      if (std::abs(ev.imag()) > 1e-12 || ev.real() <= 0.0)
        throw std::invalid_argument("da_surgery needs a positive real contracting eigenvalue");
      d.ls = ev.real();
      d.es = es.eigenvectors().col(i).real();
      d.es /= d.es.norm();
    } else {
      d.weakest_u = std::min(d.weakest_u, std::abs(ev));
    }
  }
  if (count != 1)
    throw std::invalid_argument("da_surgery needs exactly one contracting eigenvalue (codimension-one Anosov)");
  // deterministic orientation
  Eigen::Index imax;
  d.es.cwiseAbs().maxCoeff(&imax);
  if (d.es(imax) < 0) d.es = -d.es;
  return d;
}

struct DAData {
  Mat A, Ainv;
  Vec es, p;
  double ls, s, r0;
  SurgeryProfile prof;

  Vec forward(const Vec& x) const {
    const Vec Ax = A * x;
    const Vec d = wrapped_difference(x - p);
    const double u = d.norm() / r0;
    if (u >= 1.0) return wrap_torus(Ax);
    const double c = d.dot(es);
    return wrap_torus(Ax + (s * prof.psi(u) * c) * es);
  }

  Mat tangent(const Vec& x) const {
    const Vec d = wrapped_difference(x - p);
    const double rho = d.norm();
    const double u = rho / r0;
    if (u >= 1.0) return A;
    Mat J = A + (s * prof.psi(u)) * es * es.transpose();
    if (rho > 0.0) J += (s * d.dot(es) * prof.dpsi(u) / (r0 * rho)) * es * d.transpose();
    return J;
  }

  // Solve F(z + t es) = y along the stable line; the 1-D residual is strictly increasing.
  Vec backward(const Vec& y) const {
    const Vec Aiy = Ainv * y;
    const Vec z = wrap_torus(Aiy);
    const Vec dz = wrapped_difference(z - p);
    auto h = [&](double t, double* dh) {
      const Vec d = wrapped_difference(Vec(dz + t * es));
      const double rho = d.norm();
      const double u = rho / r0;
      if (u >= 1.0) {
        if (dh) *dh = ls;
        return ls * t;
      }
      const double tau = d.dot(es);
      const double ps = prof.psi(u);
      if (dh) {
        const double w = rho > 0.0 ? (tau * tau) / (rho * rho) : 1.0;
        *dh = ls + s * (ps * (1.0 - w) + w * prof.phi(u));
      }
      return ls * t + s * ps * tau;
    };
    if (h(0.0, nullptr) == 0.0) return z;
    const double B = s * r0 * prof.max_G() / ls * 1.01 + 1e-12;
    double lo = -B, hi = B, t = 0.0;
    for (int it = 0; it < 200; ++it) {
      double dh = 0.0;
      const double v = h(t, &dh);
      if (v == 0.0) break;
      (v > 0.0 ? hi : lo) = t;
      double tn = t - v / dh;
      if (!(tn > lo && tn < hi)) tn = 0.5 * (lo + hi);
      const double step = std::abs(tn - t);
      t = tn;
      if (step < 1e-16 || hi - lo < 1e-16) break;
    }
    return wrap_torus(Vec(z + t * es));
  }
};

double solve_saddle_radius(const SurgeryProfile& prof, double target) {
  double lo = 0.0, hi = 1.0;  // psi decreasing from 1 to 0
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (prof.psi(mid) > target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

RecipeNode surgery_recipe(const SystemSpec& anosov, const SurgeryParams& prm) {
  RecipeNode r;
  r.op = "da_surgery";
  r.params["center"] = format_vec(prm.center);
  r.params["radius"] = format_real(prm.radius);
  r.params["strength"] = format_real(prm.strength);
  r.params["profile"] = prm.profile.describe();
  if (prm.profile.kind() == SurgeryProfile::Kind::Plateau) {
    r.params["depth"] = format_real(prm.profile.depth());
    r.params["flat_end"] = format_real(prm.profile.flat_end());
  }
  r.children.push_back(anosov.recipe);
  return r;
}

}  // namespace

double minimal_source_strength(const SystemSpec& anosov, const SurgeryProfile& profile) {
  if (!anosov.toral_matrix) throw std::invalid_argument("surgery requires a toral automorphism");
  const auto sd = stable_data(*anosov.toral_matrix);
  return (1.0 - sd.ls) / profile.phi(0.0);
}

SurgeryParams default_surgery_params(const SystemSpec& anosov) {
  if (!anosov.toral_matrix) throw std::invalid_argument("surgery requires a toral automorphism");
  const auto& A = *anosov.toral_matrix;
  const auto sd = stable_data(A);
  SurgeryParams p;
  const int n = static_cast<int>(A.rows());
  p.center = Vec::Zero(n);
  p.strength = sd.weakest_u - sd.ls;
  p.profile = SurgeryProfile::plateau(0.9 * sd.ls / p.strength, 0.9);
  double dmin = 1.0;
  for (const auto& q : toral_fixed_points(A)) {
    const double d = wrapped_difference(Vec(q - p.center)).norm();
    if (d > 1e-12) dmin = std::min(dmin, d);
  }
  p.radius = std::min(0.49, 0.95 * dmin);
  return p;
}

SystemPtr da_surgery(const SystemSpec& anosov, const SurgeryParams& prm) {
  if (!anosov.toral_matrix) throw std::invalid_argument("da_surgery requires a toral automorphism");
  const auto& Ai = *anosov.toral_matrix;
  const int n = static_cast<int>(Ai.rows());
  const auto sd = stable_data(Ai);
  if (prm.center.size() != n) throw std::invalid_argument("surgery center has wrong dimension");
  if (!(prm.radius > 0.0 && prm.radius < 0.5)) throw std::invalid_argument("surgery radius must lie in (0, 1/2)");
  const Mat Ad = Ai.cast<double>();
  if (wrapped_difference(Vec(Ad * prm.center - prm.center)).norm() > 1e-12)
    throw std::invalid_argument("surgery center is not a fixed point of the Anosov map");
  const double smin = (1.0 - sd.ls) / prm.profile.phi(0.0);
  if (!(prm.strength > smin))
    throw std::invalid_argument("surgery strength " + format_real(prm.strength) +
                                " too weak to create a source; minimal strength " + format_real(smin));
  const double mind = sd.ls + prm.strength * prm.profile.min_phi();
  if (!(mind > 0.0))
    throw std::invalid_argument("surgery breaks invertibility: stable derivative reaches " + format_real(mind) +
                                " (needs lambda_s + s min phi > 0)");
  for (const auto& q : toral_fixed_points(Ai)) {
    const double d = wrapped_difference(Vec(q - prm.center)).norm();
    if (d > 1e-12 && d < prm.radius)
      throw std::invalid_argument("surgery ball contains another fixed point of the Anosov map");
  }

  auto D = std::make_shared<DAData>();
  D->A = Ad;
  D->Ainv = integer_inverse(Ai).cast<double>();
  D->es = sd.es;
  D->p = wrap_torus(prm.center);
  D->ls = sd.ls;
  D->s = prm.strength;
  D->r0 = prm.radius;
  D->prof = prm.profile;

  auto sys = std::make_shared<SystemSpec>();
  sys->name = "da_surgery[" + format_int_matrix(Ai) + "]";
  sys->manifold = make_torus(n);
  sys->forward = [D](const Vec& x) { return D->forward(x); };
  sys->backward = [D](const Vec& y) { return D->backward(y); };
  sys->tangent = [D](const Vec& x) { return D->tangent(x); };
  sys->toral_matrix = Ai;
  sys->declared_dim = n - 1;
  sys->declared_orientable = true;
  sys->recipe = surgery_recipe(anosov, prm);
  sys->designated_source = D->p;

  sys->fixed_points.push_back(make_fixed_point(*sys, D->p));
  const double ustar = solve_saddle_radius(prm.profile, (1.0 - sd.ls) / prm.strength);
  for (double sg : {1.0, -1.0})
    sys->fixed_points.push_back(make_fixed_point(*sys, wrap_torus(Vec(D->p + sg * ustar * prm.radius * D->es))));
  for (const auto& q : toral_fixed_points(Ai))
    if (wrapped_difference(Vec(q - D->p)).norm() > 1e-12) sys->fixed_points.push_back(make_fixed_point(*sys, q));

  const double core = prm.profile.core();
  const double r_trap = core > 0.0 ? 0.8 * core * prm.radius : 0.1 * prm.radius;
  sys->trapping = ball_complement_region(sys->manifold, D->p, r_trap);
  validate_system(*sys);
  return sys;
}

// ---------------------------------------------------------------------------
// Plykin model on T^2 / {x ~ -x}

namespace {

RecipeNode atomic(const std::string& op) {
  RecipeNode r;
  r.op = op;
  return r;
}

// Newton for F(x) = -x upstairs, started from the corresponding points of the linear map.
Vec solve_antifixed(const SystemSpec& up, Vec x) {
  for (int it = 0; it < 100; ++it) {
    const Vec r = wrapped_difference(Vec(up.forward(x) + x));
    if (r.norm() < 1e-15) break;
    const Mat J = up.tangent(x) + Mat::Identity(2, 2);
    x = wrap_torus(Vec(x - J.lu().solve(r)));
  }
  return x;
}

class PlykinIsotopy {
 public:
  PlykinIsotopy(SystemPtr sys, const Vec& saddle) : sys_(std::move(sys)), pc_(sys_->manifold, Vec::Zero(2)) {
    S_ = pc_.to_plane(saddle);
    const double h = 1e-5 * std::max(1.0, S_.norm());
    auto diff = [&](double hh) {
      Mat D(2, 2);
      for (int j = 0; j < 2; ++j) {
        const Vec e = Vec::Unit(2, j) * hh;
        D.col(j) = (chart_forward(S_ + e) - chart_forward(S_ - e)) / (2 * hh);
      }
      return D;
    };
    const Mat DF = (4 * diff(h / 2) - diff(h)) / 3;
    Eigen::EigenSolver<Mat> es(DF);
    for (int i = 0; i < 2; ++i)
      if (std::abs(es.eigenvalues()(i).imag()) > 1e-9 || es.eigenvalues()(i).real() <= 0.0)
        throw ConstructionError("plykin isotopy: saddle multipliers are not positive reals");
    V_ = es.eigenvectors().real();
    Vinv_ = V_.inverse();
    mu_ = es.eigenvalues().real();
  }

  Vec forward(double a, const Vec& x) const { return apply(a, x, false); }
  Vec backward(double a, const Vec& x) const { return apply(a, x, true); }

 private:
  Vec chart_forward(const Vec& Y) const { return pc_.to_plane(sys_->forward(pc_.from_plane(Y))); }
  Vec chart_backward(const Vec& Y) const { return pc_.to_plane(sys_->backward(pc_.from_plane(Y))); }

  Vec apply(double a, const Vec& x, bool inverse) const {
    if (a <= 0.0) return inverse ? sys_->backward(x) : sys_->forward(x);
    if (a >= 1.0) return x;
    const Vec Y = pc_.to_plane(x);
    if (!Y.allFinite()) return x;
    Vec Yn;
    if (a < 0.5) {
      // conjugate by the dilation about the saddle that shrinks to it as a -> 1/2
      const double t = 1.0 - 2.0 * a;
      const Vec Z = S_ + t * (Y - S_);
      const Vec W = inverse ? chart_backward(Z) : chart_forward(Z);
      Yn = S_ + (W - S_) / t;
    } else {
      const double tau = 2.0 * a - 1.0;
      Vec p(2);
      for (int i = 0; i < 2; ++i) p(i) = std::pow(mu_(i), (inverse ? -1.0 : 1.0) * (1.0 - tau));
      Yn = S_ + V_ * p.asDiagonal() * Vinv_ * (Y - S_);
    }
    if (!Yn.allFinite()) return pc_.puncture();
    return pc_.from_plane(Yn);
  }

  SystemPtr sys_;
  PuncturedChart pc_;
  Vec S_;
  Mat V_, Vinv_;
  Vec mu_;
};

}  // namespace

SystemPtr plykin_system() {
  const auto cat = toral_automorphism(cat_matrix());
  const auto prm = default_surgery_params(*cat);
  const auto up = da_surgery(*cat, prm);
  const auto Q = make_quotient_sphere();

  auto sys = std::make_shared<SystemSpec>();
  sys->name = "plykin";
  sys->manifold = Q;
  sys->forward = [up, Q](const Vec& x) { return Q->canonical(up->forward(x)); };
  sys->backward = [up, Q](const Vec& x) { return Q->canonical(up->backward(x)); };
  sys->tangent = [up, Q](const Vec& x) {
    const Vec y = up->forward(x);
    const Vec cy = Q->canonical(y);
    const double sign = wrapped_difference(Vec(cy - y)).norm() <= wrapped_difference(Vec(cy + y)).norm() ? 1.0 : -1.0;
    return Mat(sign * up->tangent(x));
  };
  sys->declared_dim = 1;
  sys->declared_orientable = false;
  sys->recipe = atomic("plykin");
  const Vec origin = Vec::Zero(2);
  sys->designated_source = origin;

  // source, the saddle class, and the two classes with F(x) = -x upstairs
  sys->fixed_points.push_back(make_fixed_point(*sys, origin));
  const Vec saddle = Q->canonical(up->fixed_points.at(1).location);
  sys->fixed_points.push_back(make_fixed_point(*sys, saddle));
  const Mat Api = (cat_matrix() + Eigen::MatrixXi::Identity(2, 2)).cast<double>();
  std::vector<Vec> anti;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) {
      const Vec x = Eigen::Vector2d(i / 5.0, j / 5.0);
      if ((i || j) && wrapped_difference(Vec(Api * x)).norm() < 1e-12) {
        const Vec c = Q->canonical(solve_antifixed(*up, x));
        bool seen = false;
        for (const auto& a : anti) seen = seen || Q->distance(a, c) < 1e-9;
        if (!seen) anti.push_back(c);
      }
    }
  for (const auto& a : anti) sys->fixed_points.push_back(make_fixed_point(*sys, a));

  const double core = prm.profile.core() * prm.radius;
  sys->trapping = ball_complement_region(Q, origin, 0.8 * core);

  // q = z^2 (complex square of the representative) linearises the source: q -> lambda_u^2 q.
  const double lu = cat->fixed_points.front().multipliers.front();
  LinearChart sc;
  sc.point = origin;
  sc.rate = lu * lu;
  sc.radius = core * core;
  sc.to = [Q, origin](const Vec& x) {
    const Vec z = Q->log(origin, x);
    return Vec(Eigen::Vector2d(z(0) * z(0) - z(1) * z(1), 2 * z(0) * z(1)));
  };
  sc.from = [Q](const Vec& q) {
    const std::complex<double> z = std::sqrt(std::complex<double>(q(0), q(1)));
    return Q->canonical(Eigen::Vector2d(z.real(), z.imag()));
  };
  sys->source_chart = sc;

  validate_system(*sys);
  auto iso = std::make_shared<PlykinIsotopy>(sys, saddle);
  auto dt = std::make_shared<Diffeotopy>();
  dt->forward = [iso](double a, const Vec& x) { return iso->forward(a, x); };
  dt->backward = [iso](double a, const Vec& x) { return iso->backward(a, x); };
  sys->diffeotopy = dt;
  return sys;
}

// ---------------------------------------------------------------------------
// Gradient-like Morse-Smale systems

namespace {

// unit vector <-> stereographic coordinate from the north pole (last axis)
Vec from_north_chart(const Vec& w) {
  const double r2 = w.squaredNorm();
  Vec x(w.size() + 1);
  x.head(w.size()) = 2.0 * w / (1.0 + r2);
  x(w.size()) = (r2 - 1.0) / (r2 + 1.0);
  return x;
}
Vec from_south_chart(const Vec& z) {
  const double r2 = z.squaredNorm();
  Vec x(z.size() + 1);
  x.head(z.size()) = 2.0 * z / (1.0 + r2);
  x(z.size()) = (1.0 - r2) / (1.0 + r2);
  return x;
}
Vec north_chart(const Vec& x) {
  const Eigen::Index k = x.size() - 1;
  return x.head(k) / (1.0 - x(k));
}
Vec south_chart(const Vec& x) {
  const Eigen::Index k = x.size() - 1;
  return x.head(k) / (1.0 + x(k));
}

// w -> c w in the north chart, computed in whichever chart is bounded
Vec scale_sphere(const Vec& x, double c) {
  const Eigen::Index k = x.size() - 1;
  if (x(k) <= 0.0) return sphere_normalize(from_north_chart(Vec(c * north_chart(x))));
  return sphere_normalize(from_south_chart(Vec(south_chart(x) / c)));
}

}  // namespace

SystemPtr north_south_sphere(int k, double c) {
  if (k < 1) throw std::invalid_argument("north_south_sphere: k must be >= 1");
  if (!(c > 0.0 && c < 1.0)) throw std::invalid_argument("north_south_sphere: contraction must lie in (0,1)");
  auto sys = std::make_shared<SystemSpec>();
  sys->name = "north_south[S^" + std::to_string(k) + "]";
  sys->manifold = make_sphere(k);
  sys->forward = [c](const Vec& x) { return scale_sphere(x, c); };
  sys->backward = [c](const Vec& x) { return scale_sphere(x, 1.0 / c); };
  sys->declared_dim = 0;
  RecipeNode r = atomic("north_south");
  r.params["k"] = std::to_string(k);
  r.params["c"] = format_real(c);
  sys->recipe = r;
  const Vec north = Vec::Unit(k + 1, k), south = -Vec::Unit(k + 1, k);
  FixedPointRecord src{north, FixedKind::Source, std::vector<double>(k, 1.0 / c)};
  FixedPointRecord snk{south, FixedKind::Sink, std::vector<double>(k, c)};
  sys->fixed_points = {snk, src};
  sys->designated_source = north;
  sys->trapping = ball_region(sys->manifold, south, std::numbers::pi / 2);

  LinearChart sink;
  sink.point = south;
  sink.rate = c;
  sink.radius = std::numeric_limits<double>::infinity();
  sink.to = [](const Vec& x) { return north_chart(x); };
  sink.from = [](const Vec& v) { return sphere_normalize(from_north_chart(v)); };
  sys->sink_chart = sink;
  LinearChart source;
  source.point = north;
  source.rate = 1.0 / c;
  source.radius = std::numeric_limits<double>::infinity();
  source.to = [](const Vec& x) { return south_chart(x); };
  source.from = [](const Vec& z) { return sphere_normalize(from_south_chart(z)); };
  sys->source_chart = source;

  auto dt = std::make_shared<Diffeotopy>();
  dt->forward = [c](double a, const Vec& x) {
    if (a >= 1.0) return x;
    return a <= 0.0 ? scale_sphere(x, c) : scale_sphere(x, std::pow(c, 1.0 - a));
  };
  dt->backward = [c](double a, const Vec& x) {
    if (a >= 1.0) return x;
    return a <= 0.0 ? scale_sphere(x, 1.0 / c) : scale_sphere(x, std::pow(c, a - 1.0));
  };
  sys->diffeotopy = dt;
  validate_system(*sys);
  return sys;
}

namespace {

// tan(pi x') = e^mu tan(pi x), branch kept by atan2
double gradient_coord(double x, double mu) {
  const double d = x - std::round(x);
  const double a = std::numbers::pi * d;
  return std::atan2(std::exp(mu) * std::sin(a), std::cos(a)) / std::numbers::pi;
}
double gradient_coord_derivative(double x, double mu) {
  const double a = std::numbers::pi * x;
  const double e = std::exp(mu), c = std::cos(a), s = std::sin(a);
  return e / (c * c + e * e * s * s);
}

}  // namespace

SystemPtr torus_gradient_ms(int k) {
  if (k < 1) throw std::invalid_argument("torus_gradient_ms: k must be >= 1");
  const double mu = std::log(2.0);
  auto sys = std::make_shared<SystemSpec>();
  sys->name = "torus_gradient[T^" + std::to_string(k) + "]";
  sys->manifold = make_torus(k);
  auto step = [mu](const Vec& x, double sgn) {
    Vec y(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) y(i) = gradient_coord(x(i), sgn * mu);
    return wrap_torus(y);
  };
  sys->forward = [step](const Vec& x) { return step(x, 1.0); };
  sys->backward = [step](const Vec& x) { return step(x, -1.0); };
  sys->tangent = [mu](const Vec& x) {
    Mat J = Mat::Zero(x.size(), x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) J(i, i) = gradient_coord_derivative(x(i), mu);
    return J;
  };
  sys->declared_dim = 0;
  RecipeNode r = atomic("torus_gradient");
  r.params["k"] = std::to_string(k);
  sys->recipe = r;
  for (int mask = 0; mask < (1 << k); ++mask) {
    Vec p(k);
    std::vector<double> mods;
    for (int i = 0; i < k; ++i) {
      const bool half = (mask >> i) & 1;
      p(i) = half ? 0.5 : 0.0;
      mods.push_back(half ? std::exp(-mu) : std::exp(mu));
    }
    std::sort(mods.begin(), mods.end(), std::greater<>());
    sys->fixed_points.push_back({p, *classify_multipliers(mods), mods});
  }
  const Vec sink_pt = Vec::Constant(k, 0.5), source_pt = Vec::Zero(k);
  sys->designated_source = source_pt;
  sys->trapping = ball_region(sys->manifold, sink_pt, 0.25);

  auto tan_chart = [](const Vec& x, double shift) {
    Vec v(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double d = x(i) - shift;
      v(i) = std::tan(std::numbers::pi * (d - std::round(d)));
    }
    return v;
  };
  auto tan_inverse = [](const Vec& v, double shift) {
    Vec x(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) x(i) = std::atan(v(i)) / std::numbers::pi + shift;
    return wrap_torus(x);
  };
  LinearChart sink;
  sink.point = sink_pt;
  sink.rate = std::exp(-mu);
  sink.radius = std::numeric_limits<double>::infinity();
  sink.to = [tan_chart](const Vec& x) { return tan_chart(x, 0.5); };
  sink.from = [tan_inverse](const Vec& v) { return tan_inverse(v, 0.5); };
  sys->sink_chart = sink;
  LinearChart source;
  source.point = source_pt;
  source.rate = std::exp(mu);
  source.radius = std::numeric_limits<double>::infinity();
  source.to = [tan_chart](const Vec& x) { return tan_chart(x, 0.0); };
  source.from = [tan_inverse](const Vec& v) { return tan_inverse(v, 0.0); };
  sys->source_chart = source;
  validate_system(*sys);
  return sys;
}

SystemPtr planar_rotation() {
  auto sys = std::make_shared<SystemSpec>();
  sys->name = "planar_rotation";
  sys->manifold = make_torus(2);
  Mat R(2, 2);
  R << 0, -1, 1, 0;
  sys->forward = [R](const Vec& x) { return linear_step(R, x); };
  sys->backward = [R](const Vec& x) { return linear_step(Mat(R.transpose()), x); };
  sys->tangent = [R](const Vec&) { return R; };
  sys->recipe = atomic("planar_rotation");
  sys->trapping = whole_region(sys->manifold);
  validate_system(*sys);
  return sys;
}

// ---------------------------------------------------------------------------
// Radial logistic flow

double radial_flow(double rho, double t) {
  if (rho > 1.0) return 2.0 - radial_flow(2.0 - rho, t);
  const double e = std::exp(t);
  return rho * e / (rho * e + (1.0 - rho));
}

double radial_flow_derivative(double rho, double t) {
  if (rho > 1.0) rho = 2.0 - rho;
  const double e = std::exp(t);
  const double q = rho * e + (1.0 - rho);
  return e / (q * q);
}

SystemPtr radial_logistic_map() {
  auto sys = std::make_shared<SystemSpec>();
  sys->name = "radial_logistic";
  sys->manifold = make_interval(0.0, 2.0);
  sys->forward = [](const Vec& x) { return Vec::Constant(1, radial_flow(x(0), 1.0)); };
  sys->backward = [](const Vec& x) { return Vec::Constant(1, radial_flow(x(0), -1.0)); };
  sys->tangent = [](const Vec& x) { return Mat::Constant(1, 1, radial_flow_derivative(x(0), 1.0)); };
  sys->recipe = atomic("radial_logistic");
  sys->is_flow = false;
  for (double r : {0.0, 1.0, 2.0}) sys->fixed_points.push_back(make_fixed_point(*sys, Vec::Constant(1, r)));
  sys->flow = [](const Vec& x, double t) { return Vec::Constant(1, radial_flow(x(0), t)); };
  sys->trapping = ball_region(sys->manifold, Vec::Constant(1, 1.0), 0.5);
  validate_system(*sys);
  return sys;
}

std::shared_ptr<const Diffeotopy> make_diffeotopy(const SystemSpec& sys) {
  if (!sys.diffeotopy)
    throw ConstructionError("no isotopy strategy registered for " + sys.name +
                            " (supported: plykin, north_south, tube spin-ups of these)");
  return sys.diffeotopy;
}

}  // namespace attr
