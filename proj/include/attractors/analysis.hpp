#pragma once

#include "attractors/regions.hpp"

#include <cstdint>

namespace attr {

struct AnalysisError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Orbits

struct AttractorSample {
  std::string recipe_hash;
  std::vector<Vec> points;  // manifold states
  long transient = 0;
  long steps = 0;
  std::uint64_t seed = 0;
};

// Iterates N steps from x0, keeps the last N - T0. Throws AnalysisError with the step
// index if the orbit leaves every chart (non-finite state).
AttractorSample orbit(const SystemSpec& sys, const Vec& x0, long N, long T0, std::uint64_t seed = 0);

// Start point drawn from the trapping region (or the manifold) with the given seed.
Vec seeded_start(const SystemSpec& sys, std::uint64_t seed);
AttractorSample attractor_sample(const SystemSpec& sys, long points, long transient, std::uint64_t seed);

// Euclidean coordinates used for boxes and grids.
std::vector<Vec> embedded(const SystemSpec& sys, const std::vector<Vec>& points);

MarginReport verify_trapping(const SystemSpec& sys, const Region& region, int resolution, double delta = 1e-6);

// ---------------------------------------------------------------------------
// Lyapunov exponents

struct LyapunovReport {
  std::vector<double> exponents;  // descending, per unit time, mean over seeds
  std::vector<double> spread;     // max - min over seeds, per exponent
  std::vector<std::vector<double>> per_seed;
  long steps = 0;
  int renorm_interval = 1;
  double time_step = 1.0;
  bool converged = true;
};

LyapunovReport lyapunov_spectrum(const SystemSpec& sys, const Vec& x0, long N, int renorm_interval,
                                 const std::vector<std::uint64_t>& seeds, long transient = 1000,
                                 double spread_tol = 2e-3);  // flagged when spread > 10 x spread_tol

constexpr double kNeutralTol = 5e-3;

struct UnstableDim {
  int value = 0;
  int neutral = 0;
  bool ambiguous = false;
  std::string note;
};
UnstableDim unstable_dim(const LyapunovReport& report, bool flow = false, double tol = kNeutralTol);

// ---------------------------------------------------------------------------
// Box-counting dimension

struct DimensionReport {
  std::vector<double> scales;
  std::vector<std::size_t> counts;
  double dimension = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  bool reliable = false;
  std::size_t points = 0;
};

struct ScaleRange {
  double eps_max = 0.0;  // 0: a quarter of the largest bounding-box side
  double eps_min = 0.0;  // 0: stop once boxes hold ten points on average
  double ratio = 1.4142135623730951;
};

DimensionReport box_dimension(const std::vector<Vec>& points, const ScaleRange& range = {});

// ---------------------------------------------------------------------------
// Transversal Cantor probe

struct ProbeReport {
  std::string verdict;  // "cantor", "gapped" (one gap scale), "solid", "inconclusive"
  std::size_t local_points = 0;
  int bins = 0;
  int gap_count = 0;
  std::vector<double> gap_sizes;  // relative to the occupied transverse span, descending
  int gap_scales = 0;
  double fill_density = 0.0;  // along the first frame column
  bool cantor_like = false;
};

// points: Euclidean coordinates; frame columns: unstable directions first, the last
// column is the transverse direction.
ProbeReport transversal_cantor_probe(const std::vector<Vec>& points, const Vec& center, const Mat& frame,
                                     double radius, int bins);

// Chart coordinates log(center, x) of sample points within radius of center.
std::vector<Vec> local_chart(const SystemSpec& sys, const Vec& center, const std::vector<Vec>& points,
                             double radius);

struct Splitting {
  Mat unstable;  // dim x du, orthonormal
  Mat stable;    // dim x (dim - du), orthonormal
  bool converged = false;
};
// Unstable directions pushed forward from k preimages, stable pulled back from k images.
Splitting estimate_splitting(const SystemSpec& sys, const Vec& x, int du, int k = 30, double tol = 1e-6);

// Probe at a sample point, transverse direction = first stable direction.
ProbeReport attractor_probe(const SystemSpec& sys, const AttractorSample& sample, int du, double radius = 0.05,
                            int bins = 729);

// ---------------------------------------------------------------------------
// Mixing

struct MixingReport {
  std::vector<long> checkpoints;
  std::vector<double> coverage;
  std::vector<std::size_t> visited;
  std::size_t occupied = 0;
  int grid = 0;
};

// Coverage of occupied boxes by a single orbit of length N from x0. Occupied boxes are
// those hit by reference (embedded points) or, when reference is empty, the whole
// bounding box of the embedding range lo..hi.
MixingReport mixing_probe(const SystemSpec& sys, const Vec& x0, long N, int grid, const std::vector<Vec>& reference,
                          const Vec& lo, const Vec& hi);

// ---------------------------------------------------------------------------
// Cones

enum class ConeReference { Pushed, Fixed };

struct ConeReport {
  std::size_t samples = 0;
  std::size_t excluded = 0;
  std::size_t violations = 0;
  double aperture = 0.0;
  double lambda_min = 1.0;
  double min_expansion = 0.0;
  Vec worst;
  bool pass = false;
};

// Fixed mode uses the chart axes: the first du as unstable, the rest as stable.
ConeReport cone_check(const SystemSpec& sys, const std::vector<Vec>& sample, double aperture, double lambda_min,
                      int du, ConeReference mode = ConeReference::Pushed, int reference_iters = 30);

// ---------------------------------------------------------------------------
// Periodic census

struct PeriodicPoint {
  Vec location;
  int minimal_period = 1;
  FixedKind kind = FixedKind::Saddle;
  bool hyperbolic = true;
};

struct CensusReport {
  int period = 1;
  std::vector<PeriodicPoint> points;  // solutions of f^p(x) = x
  double merge_radius = 1e-6;
  std::size_t seeds = 0;
  std::size_t converged = 0;
  std::size_t count() const { return points.size(); }
};

CensusReport periodic_census(const SystemSpec& sys, int period, int grid_resolution, double merge_radius = 1e-6);

// ---------------------------------------------------------------------------
// Expanding-attractor verdict

struct SubCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct ExpandingVerdict {
  bool pass = false;
  std::vector<SubCheck> checks;  // trapping, unstable_dim, box_dimension, transversal
  std::string summary() const;   // "PASS" or "FAIL(<first failing check>)"
};

ExpandingVerdict expanding_attractor_check(const SystemSpec& sys, const MarginReport& trapping,
                                           const LyapunovReport& lyap, const DimensionReport& dim,
                                           const ProbeReport& probe);

}  // namespace attr
