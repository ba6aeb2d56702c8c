#include "parweight/csv_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "parweight/error.hpp"

namespace parweight {

namespace {

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<double> parse_reals(const std::string& line, const char* path) {
  std::vector<double> out;
  std::stringstream ss(line);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    char* end = nullptr;
    double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str()) fail_data(std::string(path) + ": malformed number '" + tok + "'");
    out.push_back(v);
  }
  return out;
}

}  // namespace

void write_grid_csv(const std::string& path, const GridFunction& f) {
  std::ofstream out(path);
  if (!out) fail_data("cannot open for writing: " + path);
  const GridSpec& spec = f.spec();

  out << spec.n;
  for (int c : spec.cells) out << ',' << c;
  out << ',' << spec.time_cells;
  for (double v : spec.domain.spatial_lo) out << ',' << format_real(v);
  for (double v : spec.domain.spatial_hi) out << ',' << format_real(v);
  out << ',' << format_real(spec.domain.time_lo) << ','
      << format_real(spec.domain.time_hi) << '\n';

  const auto& vals = f.values();
  std::size_t slice = spec.spatial_cells();
  for (int it = 0; it < spec.time_cells; ++it) {
    std::size_t base = static_cast<std::size_t>(it) * slice;
    for (std::size_t i = 0; i < slice; ++i) {
      if (i) out << ',';
      out << format_real(vals[base + i]);
    }
    out << '\n';
  }
  if (!out) fail_data("write failed: " + path);
}

GridFunction read_grid_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail_data("cannot open grid CSV: " + path);
  std::string line;
  if (!std::getline(in, line)) fail_data(path + ": empty file");

  std::vector<double> header = parse_reals(line, path.c_str());
  if (header.size() < 6) fail_data(path + ": truncated header");
  int n = static_cast<int>(header[0]);
  if (n < 1 || static_cast<double>(n) != header[0]) fail_data(path + ": bad dimension");
  std::size_t want = 1 + static_cast<std::size_t>(n) + 1 + 2 * static_cast<std::size_t>(n) + 2;
  if (header.size() != want) fail_data(path + ": header field count mismatch");

  GridSpec spec;
  spec.n = n;
  std::size_t pos = 1;
  spec.cells.resize(n);
  for (int a = 0; a < n; ++a) spec.cells[a] = static_cast<int>(header[pos++]);
  spec.time_cells = static_cast<int>(header[pos++]);
  spec.domain.spatial_lo.resize(n);
  spec.domain.spatial_hi.resize(n);
  for (int a = 0; a < n; ++a) spec.domain.spatial_lo[a] = header[pos++];
  for (int a = 0; a < n; ++a) spec.domain.spatial_hi[a] = header[pos++];
  spec.domain.time_lo = header[pos++];
  spec.domain.time_hi = header[pos++];
  spec.validate();

  std::vector<double> vals;
  vals.reserve(spec.total_cells());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row = parse_reals(line, path.c_str());
    vals.insert(vals.end(), row.begin(), row.end());
  }
  if (vals.size() != spec.total_cells())
    fail_data(path + ": value count does not match the header");
  return GridFunction(spec, std::move(vals));
}

}  // namespace parweight
