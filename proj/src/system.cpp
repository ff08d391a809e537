#include "attractors/system.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

namespace attr {

std::string to_string(FixedKind k) {
  switch (k) {
    case FixedKind::Source: return "source";
    case FixedKind::Sink: return "sink";
    case FixedKind::Saddle: return "saddle";
  }
  return "unknown";
}

std::optional<FixedKind> classify_multipliers(const std::vector<double>& moduli, double tol) {
  bool up = false, down = false;
  for (double m : moduli) {
    if (std::abs(m - 1.0) <= tol) return std::nullopt;
    (m > 1.0 ? up : down) = true;
  }
  if (up && down) return FixedKind::Saddle;
  return up ? FixedKind::Source : FixedKind::Sink;
}

std::vector<double> eigen_moduli(const Mat& J) {
  Eigen::EigenSolver<Mat> es(J, false);
  std::vector<double> out;
  for (Eigen::Index i = 0; i < J.rows(); ++i) out.push_back(std::abs(es.eigenvalues()(i)));
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

namespace {
Mat central(const SystemSpec& sys, const Vec& x, const Vec& fx, double h) {
  const auto& M = *sys.manifold;
  const int d = M.dim();
  Mat D(d, d);
  for (int j = 0; j < d; ++j) {
    const Vec e = Vec::Unit(d, j) * h;
    const Vec yp = sys.forward(M.retract(x, e));
    const Vec ym = sys.forward(M.retract(x, -e));
    D.col(j) = (M.log(fx, yp) - M.log(fx, ym)) / (2 * h);
  }
  return D;
}
}  // namespace

JacobianResult numeric_jacobian(const SystemSpec& sys, const Vec& x, double h) {
  if (!(h >= 1e-8 && h <= 1e-3)) throw std::invalid_argument("numeric_jacobian: h must lie in [1e-8, 1e-3]");
  const Vec fx = sys.forward(x);
  const Mat D1 = central(sys, x, fx, h);
  const Mat D2 = central(sys, x, fx, h / 2);
  JacobianResult r;
  r.J = (4 * D2 - D1) / 3;
  r.near_chart_boundary = sys.manifold->near_chart_boundary(x, h) || sys.manifold->near_chart_boundary(fx, h);
  return r;
}

Mat tangent_at(const SystemSpec& sys, const Vec& x) {
  if (sys.tangent) return sys.tangent(x);
  return numeric_jacobian(sys, x).J;
}

FixedPointRecord make_fixed_point(const SystemSpec& sys, const Vec& x) {
  FixedPointRecord r;
  r.location = x;
  r.multipliers = eigen_moduli(tangent_at(sys, x));
  const auto k = classify_multipliers(r.multipliers);
  if (!k) throw ConstructionError(sys.name + ": fixed point with a multiplier of modulus 1");
  r.kind = *k;
  return r;
}

void validate_system(const SystemSpec& sys, const ValidationOptions& opt) {
  const auto& M = *sys.manifold;
  if (sys.backward) {
    Rng rng(opt.seed);
    for (int i = 0; i < opt.probes; ++i) {
      const Vec x = M.random_point(rng);
      const double err = M.distance(sys.backward(sys.forward(x)), x);
      if (!(err < opt.roundtrip_tol))
        throw ConstructionError(sys.name + ": backward(forward(x)) round-trip error " + std::to_string(err) +
                                " exceeds tolerance");
    }
  }
  for (const auto& fp : sys.fixed_points) {
    const double res = M.distance(sys.forward(fp.location), fp.location);
    if (!(res < opt.fixed_tol))
      throw ConstructionError(sys.name + ": listed fixed point has displacement " + std::to_string(res));
    const auto k = classify_multipliers(fp.multipliers);
    if (!k || *k != fp.kind)
      throw ConstructionError(sys.name + ": fixed point kind inconsistent with its multipliers");
  }
}

Vec iterate(const SystemSpec& sys, Vec x, int n) {
  for (int i = 0; i < n; ++i) x = sys.forward(x);
  return x;
}

std::string format_real(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw std::runtime_error("format_real failed");
  return std::string(buf, ptr);
}

double parse_real(const std::string& s) {
  double v = 0;
  const char* b = s.data();
  const char* e = b + s.size();
  while (b < e && *b == ' ') ++b;
  while (e > b && e[-1] == ' ') --e;
  if (b < e && *b == '+') ++b;
  auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || ptr != e) throw ConfigError("not a real number: '" + s + "'");
  return v;
}

std::string format_int_matrix(const Eigen::MatrixXi& A) {
  std::string s;
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    if (i) s += ';';
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
      if (j) s += ',';
      s += std::to_string(A(i, j));
    }
  }
  return s;
}

Eigen::MatrixXi parse_int_matrix(const std::string& s) {
  std::vector<std::vector<int>> rows;
  std::stringstream rs(s);
  std::string row;
  while (std::getline(rs, row, ';')) {
    std::vector<int> r;
    std::stringstream es(row);
    std::string e;
    while (std::getline(es, e, ',')) {
      try {
        size_t pos = 0;
        r.push_back(std::stoi(e, &pos));
        if (e.find_first_not_of(' ', pos) != std::string::npos) throw std::invalid_argument(e);
      } catch (const std::exception&) {
        throw ConfigError("bad integer matrix entry '" + e + "'");
      }
    }
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw ConfigError("empty matrix");
  Eigen::MatrixXi A(rows.size(), rows.front().size());
  for (size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.front().size()) throw ConfigError("ragged matrix '" + s + "'");
    for (size_t j = 0; j < rows[i].size(); ++j) A(i, j) = rows[i][j];
  }
  return A;
}

std::string format_vec(const Vec& v) {
  std::string s;
  for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_real(v(i));
  return s;
}

Vec parse_vec(const std::string& s) {
  std::vector<double> vals;
  std::stringstream ss(s);
  std::string e;
  while (std::getline(ss, e, ',')) vals.push_back(parse_real(e));
  return Eigen::Map<Vec>(vals.data(), vals.size());
}

}  // namespace attr
