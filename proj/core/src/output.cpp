#include "mmshape/output.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include "mmshape/errors.hpp"

namespace mmshape {

namespace {

std::ofstream open_for_write(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

std::string number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_number(const std::string& s, int line) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  // strtod rather than stod: subnormals must round-trip
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) throw ParseError("invalid number '" + s + "'", line);
  return v;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::size_t Table::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw InvalidArgument("Table: no column named " + name);
}

void write_csv(const Table& table, const std::filesystem::path& path) {
  std::ofstream out = open_for_write(path);
  for (std::size_t i = 0; i < table.header.size(); ++i) out << (i ? "," : "") << table.header[i];
  out << '\n';
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size()) throw InvalidArgument("write_csv: row width differs from header");
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << number(row[i]);
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

Table read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  Table t;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (lineno == 1) {
      t.header = split(line);
      continue;
    }
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != t.header.size()) throw ParseError("row width differs from header", lineno);
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(parse_number(c, lineno));
    t.rows.push_back(std::move(row));
  }
  if (lineno == 0) throw ParseError("empty CSV file", 1);
  return t;
}

void write_vtk(const Mesh& mesh, const std::filesystem::path& path, const std::vector<PointScalars>& point_scalars,
               const std::vector<PointVectors>& point_vectors, const std::vector<CellScalars>& cell_scalars) {
  const std::size_t nv = mesh.num_vertices();
  const std::size_t nc = mesh.num_cells();
  for (const auto& f : point_scalars)
    if (f.values.size() != nv) throw InvalidArgument("write_vtk: point field " + f.name + " has the wrong size");
  for (const auto& f : point_vectors)
    if (f.values.size() != nv) throw InvalidArgument("write_vtk: point field " + f.name + " has the wrong size");
  for (const auto& f : cell_scalars)
    if (f.values.size() != nc) throw InvalidArgument("write_vtk: cell field " + f.name + " has the wrong size");

  std::ofstream out = open_for_write(path);
  out << "# vtk DataFile Version 3.0\nmmshape\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << nv << " double\n";
  for (const auto& v : mesh.vertices()) out << number(v.x()) << ' ' << number(v.y()) << " 0\n";
  out << "CELLS " << nc << ' ' << 4 * nc << '\n';
  for (const auto& c : mesh.cells()) out << "3 " << c[0] << ' ' << c[1] << ' ' << c[2] << '\n';
  out << "CELL_TYPES " << nc << '\n';
  for (std::size_t i = 0; i < nc; ++i) out << "5\n";

  out << "CELL_DATA " << nc << "\nSCALARS region int 1\nLOOKUP_TABLE default\n";
  for (int r : mesh.cell_region()) out << r << '\n';
  for (const auto& f : cell_scalars) {
    out << "SCALARS " << f.name << " double 1\nLOOKUP_TABLE default\n";
    for (double v : f.values) out << number(v) << '\n';
  }
  if (!point_scalars.empty() || !point_vectors.empty()) {
    out << "POINT_DATA " << nv << '\n';
    for (const auto& f : point_scalars) {
      out << "SCALARS " << f.name << " double 1\nLOOKUP_TABLE default\n";
      for (double v : f.values) out << number(v) << '\n';
    }
    for (const auto& f : point_vectors) {
      out << "VECTORS " << f.name << " double\n";
      for (const auto& v : f.values) out << number(v.x()) << ' ' << number(v.y()) << " 0\n";
    }
  }
  if (!out) throw IoError("write failed: " + path.string());
}

Table history_table(const History& history) {
  Table t;
  t.header = {"iteration", "J", "slope", "xi", "evals", "min_quality"};
  t.header.insert(t.header.end(), history.labels.begin(), history.labels.end());
  for (const auto& e : history.entries) {
    std::vector<double> row{static_cast<double>(e.iteration), e.j, e.slope, e.xi, static_cast<double>(e.evals),
                            e.min_quality};
    row.insert(row.end(), e.design.begin(), e.design.end());
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table taylor_table(const TaylorReport& report) {
  Table t;
  t.header = {"eps", "r0", "r1", "rate0", "rate1"};
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    const auto& r = report.rows[i];
    t.rows.push_back({r.eps, r.r0, r.r1, i ? report.rate0[i - 1] : nan, i ? report.rate1[i - 1] : nan});
  }
  return t;
}

Table density_table(const GradientDensity& density) {
  Table t;
  t.header = {"block", "facet", "x", "y", "nx", "ny", "length", "g"};
  for (const auto& f : density.facets)
    t.rows.push_back({static_cast<double>(f.block), static_cast<double>(f.facet), f.mid.x(), f.mid.y(), f.normal.x(),
                      f.normal.y(), f.length, f.g});
  return t;
}

}  // namespace mmshape
