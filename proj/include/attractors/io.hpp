#pragma once

#include "attractors/analysis.hpp"

#include <iosfwd>
#include <utility>

namespace attr {

// Point clouds.
//   CSV:    "# recipe_hash: <hex>" line, header "variant,dim,c0,...", one row per point.
//   Binary: magic "ATRF", u32 version, u8 variant, u32 dim, u64 count, 16 ASCII hex
//           bytes of recipe hash, then count x dim float64, all little-endian.
// dim is the number of stored values per point.
enum class CloudFormat { Csv, Binary };
CloudFormat parse_cloud_format(const std::string& name);  // ConfigError lists supported formats

constexpr std::uint32_t kCloudVersion = 1;
constexpr std::size_t kBinaryHeaderBytes = 4 + 4 + 1 + 4 + 8 + 16;

struct Cloud {
  PointKind variant = PointKind::Torus;
  std::string recipe_hash;
  std::vector<Vec> points;
};

void write_cloud(std::ostream& os, const Cloud& c, CloudFormat f);
Cloud read_cloud(std::istream& is, CloudFormat f);
void write_cloud_file(const std::string& path, const Cloud& c, CloudFormat f);

// Reports: "# key: value" metadata lines, then a CSV table with a header row.
struct Report {
  std::vector<std::pair<std::string, std::string>> meta;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  void add(const std::string& k, const std::string& v) { meta.emplace_back(k, v); }
};

void write_report(std::ostream& os, const Report& r);
void write_report_file(const std::string& path, const Report& r);
Report read_report(std::istream& is);

// Shortest round-tripping decimal.
std::string num(double v);

Report to_report(const MarginReport& m, const std::string& region);
Report to_report(const LyapunovReport& r);
Report to_report(const DimensionReport& r);
Report to_report(const ConeReport& r);
Report to_report(const CensusReport& r, const Manifold& m);
Report to_report(const ProbeReport& r);
Report to_report(const MixingReport& r);
Report to_report(const ExpandingVerdict& v);

}  // namespace attr
