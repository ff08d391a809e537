#pragma once

#include "attractors/geometry.hpp"

#include <functional>
#include <map>
#include <optional>

namespace attr {

// Exit-code classes surfaced by the CLI.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConstructionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Declarative description of how a system was assembled.
struct RecipeNode {
  std::string op;
  std::map<std::string, std::string> params;
  std::vector<RecipeNode> children;
};

enum class FixedKind { Source, Sink, Saddle };
std::string to_string(FixedKind k);

struct FixedPointRecord {
  Vec location;
  FixedKind kind = FixedKind::Saddle;
  std::vector<double> multipliers;  // moduli
};

// Classification by multiplier moduli; nullopt if some modulus is within tol of 1.
std::optional<FixedKind> classify_multipliers(const std::vector<double>& moduli, double tol = 1e-6);
std::vector<double> eigen_moduli(const Mat& J);

// Local coordinate V around a hyperbolic fixed point in which the map is V -> rate * V
// whenever |V(x)| < radius.
struct LinearChart {
  Vec point;
  double rate = 1.0;
  double radius = 0.0;
  std::function<Vec(const Vec&)> to;
  std::function<Vec(const Vec&)> from;
};

struct Diffeotopy {
  std::function<Vec(double, const Vec&)> forward;
  std::function<Vec(double, const Vec&)> backward;
  bool approximate = false;
};

class Region;
using RegionPtr = std::shared_ptr<const Region>;

struct NeckParams;
struct SystemSpec;
using SystemPtr = std::shared_ptr<const SystemSpec>;

struct SystemSpec {
  std::string name;
  ManifoldPtr manifold;
  std::function<Vec(const Vec&)> forward;
  std::function<Vec(const Vec&)> backward;
  // Derivative in retract/log coordinates: chart at x -> chart at forward(x). Empty => numeric.
  std::function<Mat(const Vec&)> tangent;
  std::vector<FixedPointRecord> fixed_points;
  std::optional<int> declared_dim;
  std::optional<bool> declared_orientable;
  RecipeNode recipe;

  RegionPtr trapping;                 // neighbourhood U with f(U) inside U
  std::shared_ptr<const Diffeotopy> diffeotopy;
  std::optional<Vec> designated_source;  // puncture used when capping or summing
  std::optional<LinearChart> source_chart;
  std::optional<LinearChart> sink_chart;
  std::vector<SystemPtr> factors;     // product constituents, if any
  std::optional<Eigen::MatrixXi> toral_matrix;  // linear part of toral automorphisms
  std::shared_ptr<const NeckParams> neck;       // connected sums

  // Flows: forward is the time-tau map, flow(x, t) the time-t map.
  bool is_flow = false;
  double time_step = 1.0;
  std::function<Vec(const Vec&, double)> flow;

  int dim() const { return manifold->dim(); }
};

struct JacobianResult {
  Mat J;
  bool near_chart_boundary = false;
};

// Central differences in chart coordinates with one Richardson step.
JacobianResult numeric_jacobian(const SystemSpec& sys, const Vec& x, double h = 1e-5);
Mat tangent_at(const SystemSpec& sys, const Vec& x);

FixedPointRecord make_fixed_point(const SystemSpec& sys, const Vec& x);

struct ValidationOptions {
  int probes = 1000;
  double roundtrip_tol = 1e-9;
  double fixed_tol = 1e-10;
  std::uint64_t seed = 12345;
};

// Throws ConstructionError naming the failed invariant.
void validate_system(const SystemSpec& sys, const ValidationOptions& opt = {});

Vec iterate(const SystemSpec& sys, Vec x, int n);

// Canonical text forms used in recipes (shortest round-tripping decimal).
std::string format_real(double v);
double parse_real(const std::string& s);
std::string format_int_matrix(const Eigen::MatrixXi& A);  // rows ';', entries ','
Eigen::MatrixXi parse_int_matrix(const std::string& s);
std::string format_vec(const Vec& v);
Vec parse_vec(const std::string& s);

}  // namespace attr
