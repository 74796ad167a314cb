#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include "mmshape/errors.hpp"
#include "mmshape/mesh.hpp"

namespace mmshape {

void write_mesh(const Mesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << std::setprecision(17);
  out << "mmesh 1\n";
  out << "vertices " << mesh.num_vertices() << '\n';
  for (const auto& v : mesh.vertices()) out << v.x() << ' ' << v.y() << '\n';
  out << "cells " << mesh.num_cells() << '\n';
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const auto& t = mesh.cells()[c];
    out << t[0] << ' ' << t[1] << ' ' << t[2] << ' ' << mesh.cell_region()[c] << '\n';
  }
  out << "facets " << mesh.num_facets() << '\n';
  for (std::size_t f = 0; f < mesh.num_facets(); ++f) {
    const auto& e = mesh.facets()[f];
    out << e[0] << ' ' << e[1] << ' ' << mesh.facet_marker()[f] << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

namespace {

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  std::istringstream next(const char* what) {
    std::string line;
    if (!std::getline(in_, line)) throw ParseError(std::string("unexpected end of file, expected ") + what, line_ + 1);
    ++line_;
    return std::istringstream(line);
  }
  int line() const { return line_; }

 private:
  std::istream& in_;
  int line_ = 0;
};

std::size_t read_count(LineReader& r, const std::string& keyword) {
  auto ss = r.next(keyword.c_str());
  std::string word;
  long long n = -1;
  if (!(ss >> word >> n) || word != keyword || n < 0) throw ParseError("expected '" + keyword + " <count>'", r.line());
  return static_cast<std::size_t>(n);
}

template <typename... Ts>
void read_fields(LineReader& r, const char* what, Ts&... fields) {
  auto ss = r.next(what);
  if (!(ss >> ... >> fields)) throw ParseError(std::string("malformed ") + what + " record", r.line());
  std::string rest;
  if (ss >> rest) throw ParseError(std::string("trailing data in ") + what + " record", r.line());
}

}  // namespace

Mesh read_mesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  LineReader r(in);
  {
    auto ss = r.next("header");
    std::string magic;
    int version = 0;
    if (!(ss >> magic >> version) || magic != "mmesh") throw ParseError("missing 'mmesh' header", r.line());
    if (version != 1) throw UnsupportedVersion("unsupported mmesh version " + std::to_string(version), r.line());
  }
  std::vector<Vec2> vertices(read_count(r, "vertices"));
  for (auto& v : vertices) read_fields(r, "vertex", v.x(), v.y());
  const std::size_t nc = read_count(r, "cells");
  std::vector<Mesh::Cell> cells(nc);
  std::vector<int> regions(nc);
  for (std::size_t c = 0; c < nc; ++c) read_fields(r, "cell", cells[c][0], cells[c][1], cells[c][2], regions[c]);
  const std::size_t nf = read_count(r, "facets");
  std::vector<Mesh::Facet> facets(nf);
  std::vector<int> markers(nf);
  for (std::size_t f = 0; f < nf; ++f) read_fields(r, "facet", facets[f][0], facets[f][1], markers[f]);
  return Mesh(std::move(vertices), std::move(cells), std::move(regions), std::move(facets), std::move(markers));
}

}  // namespace mmshape
