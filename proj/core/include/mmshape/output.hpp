#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mmshape/mesh.hpp"
#include "mmshape/optim.hpp"
#include "mmshape/shape.hpp"

namespace mmshape {

/// Numeric table with a header row.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& name) const;  // throws InvalidArgument if absent
};

/// Comma separated, '.' decimal, 17 significant digits, '\n' line ends.
void write_csv(const Table& table, const std::filesystem::path& path);
Table read_csv(const std::filesystem::path& path);

struct PointScalars {
  std::string name;
  std::vector<double> values;  // one per mesh vertex
};

struct PointVectors {
  std::string name;
  std::vector<Vec2> values;
};

struct CellScalars {
  std::string name;
  std::vector<double> values;  // one per cell
};

/// Legacy ASCII VTK unstructured grid (triangles, z = 0).
void write_vtk(const Mesh& mesh, const std::filesystem::path& path, const std::vector<PointScalars>& point_scalars = {},
               const std::vector<PointVectors>& point_vectors = {}, const std::vector<CellScalars>& cell_scalars = {});

/// iteration, J, slope, xi, evals, min_quality, then the design labels.
Table history_table(const History& history);
/// eps, r0, r1, rate0, rate1 (rates NaN on the first row).
Table taylor_table(const TaylorReport& report);
/// block, facet, x, y, nx, ny, length, g.
Table density_table(const GradientDensity& density);

}  // namespace mmshape
