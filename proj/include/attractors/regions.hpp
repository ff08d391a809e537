#pragma once

#include "attractors/system.hpp"

namespace attr {

// Candidate trapping neighbourhood U described by a signed depth (positive inside).
class Region {
 public:
  virtual ~Region() = default;
  virtual std::string describe() const = 0;
  virtual double depth(const Vec& x) const = 0;
  virtual bool proper() const { return true; }
  // Interior grid/random points plus boundary points. For two-dimensional
  // tori and quotients the interior is a resolution x resolution grid.
  virtual std::vector<Vec> sample(int resolution, Rng& rng) const = 0;
};

RegionPtr whole_region(ManifoldPtr m);
RegionPtr ball_region(ManifoldPtr m, Vec center, double radius);
RegionPtr ball_complement_region(ManifoldPtr m, Vec center, double radius);
// Tube state [base..., rho]: |rho - 1| <= half_width and base point inside base_region.
RegionPtr collar_region(ManifoldPtr tube, RegionPtr base_region, double half_width);
RegionPtr product_region(ManifoldPtr product, std::vector<RegionPtr> factors);
// Region read off a contiguous slice of the state. If flag_index >= 0, states whose
// flag coordinate differs from flag_value lie outside.
RegionPtr sliced_region(ManifoldPtr whole, int offset, int length, RegionPtr inner, int flag_index = -1,
                        double flag_value = 0.0);

}  // namespace attr

namespace attr {

struct MarginReport {
  bool pass = false;
  bool proper = true;
  double margin = 0.0;  // min depth of f(x) over sampled x in U
  Vec worst;
  std::size_t samples = 0;
};

// Samples U and reports min depth(f(x)); flows are checked with their time-1 map.
MarginReport check_region(const SystemSpec& sys, const Region& region, int resolution, double delta = 1e-6,
                          std::uint64_t seed = 7);

}  // namespace attr
