#include "attractors/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace attr {

static_assert(std::endian::native == std::endian::little, "binary clouds assume a little-endian host");

std::string num(double v) { return format_real(v); }

CloudFormat parse_cloud_format(const std::string& name) {
  if (name == "csv") return CloudFormat::Csv;
  if (name == "binary" || name == "bin") return CloudFormat::Binary;
  throw ConfigError("unknown format '" + name + "' (supported: csv, binary)");
}

namespace {

template <typename T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
template <typename T>
T get(std::istream& is) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof v)) throw std::runtime_error("cloud: truncated header");
  return v;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::ofstream open_out(const std::string& path, bool binary) {
  std::ofstream os(path, binary ? std::ios::binary : std::ios::out);
  if (!os) throw std::runtime_error("cannot write " + path);
  return os;
}

}  // namespace

void write_cloud(std::ostream& os, const Cloud& c, CloudFormat f) {
  const std::uint32_t dim = c.points.empty() ? 0 : static_cast<std::uint32_t>(c.points[0].size());
  for (const auto& p : c.points)
    if (p.size() != dim) throw std::invalid_argument("cloud: points of different sizes");
  if (f == CloudFormat::Csv) {
    os << "# recipe_hash: " << c.recipe_hash << "\n";
    os << "variant,dim";
    for (std::uint32_t i = 0; i < dim; ++i) os << ",c" << i;
    os << "\n";
    const std::string v = to_string(c.variant);
    for (const auto& p : c.points) {
      os << v << "," << dim;
      for (std::uint32_t i = 0; i < dim; ++i) os << "," << format_real(p(i));
      os << "\n";
    }
    return;
  }
  os.write("ATRF", 4);
  put<std::uint32_t>(os, kCloudVersion);
  put<std::uint8_t>(os, static_cast<std::uint8_t>(c.variant));
  put<std::uint32_t>(os, dim);
  put<std::uint64_t>(os, c.points.size());
  std::string h = c.recipe_hash;
  h.resize(16, '0');
  os.write(h.data(), 16);
  for (const auto& p : c.points) os.write(reinterpret_cast<const char*>(p.data()), static_cast<std::streamsize>(dim * 8));
}

Cloud read_cloud(std::istream& is, CloudFormat f) {
  Cloud c;
  if (f == CloudFormat::Csv) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("# recipe_hash: ", 0) != 0) throw std::runtime_error("cloud: missing hash line");
    c.recipe_hash = line.substr(15);
    if (!std::getline(is, line) || line.rfind("variant,dim", 0) != 0) throw std::runtime_error("cloud: missing header");
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      const auto cells = split_csv(line);
      if (cells.size() < 2) throw std::runtime_error("cloud: short row");
      c.variant = point_kind_from_string(cells[0]);
      const int dim = std::stoi(cells[1]);
      if (static_cast<int>(cells.size()) != dim + 2) throw std::runtime_error("cloud: row width does not match dim");
      Vec p(dim);
      for (int i = 0; i < dim; ++i) p(i) = parse_real(cells[2 + i]);
      c.points.push_back(p);
    }
    return c;
  }
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, "ATRF", 4) != 0) throw std::runtime_error("cloud: bad magic");
  if (get<std::uint32_t>(is) != kCloudVersion) throw std::runtime_error("cloud: unsupported version");
  c.variant = static_cast<PointKind>(get<std::uint8_t>(is));
  const auto dim = get<std::uint32_t>(is);
  const auto count = get<std::uint64_t>(is);
  char h[16];
  if (!is.read(h, 16)) throw std::runtime_error("cloud: truncated header");
  c.recipe_hash.assign(h, 16);
  c.points.resize(count, Vec(dim));
  for (auto& p : c.points)
    if (!is.read(reinterpret_cast<char*>(p.data()), static_cast<std::streamsize>(dim * 8)))
      throw std::runtime_error("cloud: truncated data");
  return c;
}

void write_cloud_file(const std::string& path, const Cloud& c, CloudFormat f) {
  auto os = open_out(path, f == CloudFormat::Binary);
  write_cloud(os, c, f);
}

void write_report(std::ostream& os, const Report& r) {
  for (const auto& [k, v] : r.meta) os << "# " << k << ": " << v << "\n";
  if (r.columns.empty()) return;
  for (size_t i = 0; i < r.columns.size(); ++i) os << (i ? "," : "") << r.columns[i];
  os << "\n";
  for (const auto& row : r.rows) {
    for (size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
    os << "\n";
  }
}

void write_report_file(const std::string& path, const Report& r) {
  auto os = open_out(path, false);
  write_report(os, r);
}

Report read_report(std::istream& is) {
  Report r;
  std::string line;
  bool header = false;
  while (std::getline(is, line)) {
    if (line.rfind("# ", 0) == 0 && !header) {
      const auto colon = line.find(": ");
      if (colon == std::string::npos) throw std::runtime_error("report: malformed metadata line");
      r.meta.emplace_back(line.substr(2, colon - 2), line.substr(colon + 2));
    } else if (!header) {
      r.columns = split_csv(line);
      header = true;
    } else {
      r.rows.push_back(split_csv(line));
    }
  }
  return r;
}

namespace {

std::string join(const std::vector<double>& v) {
  std::string s;
  for (size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + num(v[i]);
  return s;
}

std::string spaced(const Vec& v) {
  return join(std::vector<double>(v.data(), v.data() + v.size()));
}

}  // namespace

Report to_report(const MarginReport& m, const std::string& region) {
  Report r;
  r.add("analysis", "trapping");
  r.add("region", region);
  r.add("pass", m.pass ? "true" : "false");
  r.add("proper", m.proper ? "true" : "false");
  r.add("margin", num(m.margin));
  r.add("samples", std::to_string(m.samples));
  r.columns = {"worst_point"};
  if (m.worst.size()) r.rows.push_back({spaced(m.worst)});
  return r;
}

Report to_report(const LyapunovReport& L) {
  Report r;
  r.add("analysis", "lyapunov");
  r.add("steps", std::to_string(L.steps));
  r.add("renorm_interval", std::to_string(L.renorm_interval));
  r.add("time_step", num(L.time_step));
  r.add("seeds", std::to_string(L.per_seed.size()));
  r.add("converged", L.converged ? "true" : "false");
  r.add("exponents", join(L.exponents));
  r.add("spread", join(L.spread));
  r.columns = {"seed_index"};
  for (size_t k = 0; k < L.exponents.size(); ++k) r.columns.push_back("lambda" + std::to_string(k + 1));
  for (size_t i = 0; i < L.per_seed.size(); ++i) {
    std::vector<std::string> row{std::to_string(i)};
    for (double e : L.per_seed[i]) row.push_back(num(e));
    r.rows.push_back(row);
  }
  return r;
}

Report to_report(const DimensionReport& D) {
  Report r;
  r.add("analysis", "boxdim");
  r.add("points", std::to_string(D.points));
  r.add("dimension", num(D.dimension));
  r.add("r2", num(D.r2));
  r.add("reliable", D.reliable ? "true" : "false");
  r.columns = {"eps", "count"};
  for (size_t i = 0; i < D.scales.size(); ++i) r.rows.push_back({num(D.scales[i]), std::to_string(D.counts[i])});
  return r;
}

Report to_report(const ConeReport& C) {
  Report r;
  r.add("analysis", "cones");
  r.add("aperture", num(C.aperture));
  r.add("lambda_min", num(C.lambda_min));
  r.add("samples", std::to_string(C.samples));
  r.add("excluded", std::to_string(C.excluded));
  r.add("violations", std::to_string(C.violations));
  r.add("min_expansion", num(C.min_expansion));
  r.add("pass", C.pass ? "true" : "false");
  r.columns = {"worst_point"};
  if (C.worst.size()) r.rows.push_back({spaced(C.worst)});
  return r;
}

Report to_report(const CensusReport& c, const Manifold& m) {
  Report r;
  r.add("analysis", "census");
  r.add("period", std::to_string(c.period));
  r.add("count", std::to_string(c.count()));
  r.add("seeds", std::to_string(c.seeds));
  r.add("converged_seeds", std::to_string(c.converged));
  r.add("merge_radius", num(c.merge_radius));
  r.columns = {"minimal_period", "kind", "hyperbolic", "embedded"};
  for (const auto& p : c.points)
    r.rows.push_back({std::to_string(p.minimal_period), to_string(p.kind), p.hyperbolic ? "true" : "false",
                      spaced(m.embed(p.location))});
  return r;
}

Report to_report(const ProbeReport& P) {
  Report r;
  r.add("analysis", "probe");
  r.add("verdict", P.verdict);
  r.add("local_points", std::to_string(P.local_points));
  r.add("bins", std::to_string(P.bins));
  r.add("gap_count", std::to_string(P.gap_count));
  r.add("gap_scales", std::to_string(P.gap_scales));
  r.add("fill_density", num(P.fill_density));
  r.columns = {"relative_gap"};
  for (double g : P.gap_sizes) r.rows.push_back({num(g)});
  return r;
}

Report to_report(const MixingReport& M) {
  Report r;
  r.add("analysis", "mixing");
  r.add("grid", std::to_string(M.grid));
  r.add("occupied_boxes", std::to_string(M.occupied));
  r.columns = {"steps", "coverage", "visited_boxes"};
  for (size_t i = 0; i < M.checkpoints.size(); ++i)
    r.rows.push_back({std::to_string(M.checkpoints[i]), num(M.coverage[i]), std::to_string(M.visited[i])});
  return r;
}

Report to_report(const ExpandingVerdict& v) {
  Report r;
  r.add("analysis", "expanding");
  r.add("verdict", v.summary());
  r.columns = {"check", "pass", "detail"};
  for (const auto& c : v.checks) r.rows.push_back({c.name, c.pass ? "true" : "false", c.detail});
  return r;
}

}  // namespace attr
