#include "ldg/io.hpp"

#include <fstream>
#include <sstream>

#include "ldg/error.hpp"

namespace ldg {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out.precision(17);
  return out;
}

void write_row(std::ostream& out, const std::vector<double>& row) {
  for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
  out << '\n';
}

void write_header(std::ostream& out, const std::vector<std::string>& header) {
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
}

}  // namespace

void write_table_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows) {
  auto out = open_out(path);
  write_header(out, header);
  for (const auto& r : rows) write_row(out, r);
}

void write_field_csv(const std::filesystem::path& path, const Field& field) {
  const Grid& g = field.grid();
  auto out = open_out(path);
  if (field.ncomp() == 3) {
    write_header(out, {"x", "y", "p1", "p2", "r"});
  } else {
    write_header(out, {"x", "y", "v1", "v2"});
  }
  std::vector<double> row(2 + field.ncomp());
  for (int n = 0; n < g.num_nodes(); ++n) {
    if (!g.active(n)) continue;
    const Vec2 x = g.position(n);
    row[0] = x.x;
    row[1] = x.y;
    for (int c = 0; c < field.ncomp(); ++c) row[2 + c] = field(n, c);
    write_row(out, row);
  }
}

Field read_field_csv(const std::filesystem::path& path, std::shared_ptr<const Grid> grid) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
  std::string line;
  std::getline(in, line);
  int ncomp;
  if (line == "x,y,p1,p2,r") {
    ncomp = 3;
  } else if (line == "x,y,v1,v2") {
    ncomp = 2;
  } else {
    throw Error(ErrorCode::Io, "unrecognized field header in " + path.string());
  }
  Field f(grid, ncomp);
  const Grid& g = *grid;
  for (int n = 0; n < g.num_nodes(); ++n) {
    if (!g.active(n)) continue;
    if (!std::getline(in, line)) throw Error(ErrorCode::Io, "field file is shorter than the grid");
    std::istringstream row(line);
    std::string cell;
    std::vector<double> v;
    while (std::getline(row, cell, ',')) v.push_back(std::stod(cell));
    if (static_cast<int>(v.size()) != 2 + ncomp) throw Error(ErrorCode::Io, "malformed field row");
    const Vec2 x = g.position(n);
    if (std::abs(v[0] - x.x) > 1e-9 || std::abs(v[1] - x.y) > 1e-9) {
      throw Error(ErrorCode::Io, "field file was written on a different grid");
    }
    for (int c = 0; c < ncomp; ++c) f(n, c) = v[2 + c];
  }
  if (std::getline(in, line) && !line.empty()) throw Error(ErrorCode::Io, "field file is longer than the grid");
  return f;
}

void write_grid_csv(const std::filesystem::path& path, const Grid& grid) {
  auto out = open_out(path);
  write_header(out, {"x", "y", "mask"});
  for (int n = 0; n < grid.num_nodes(); ++n) {
    const Vec2 x = grid.active(n) ? grid.position(n) : grid.lattice(grid.node_i(n), grid.node_j(n));
    write_row(out, {x.x, x.y, static_cast<double>(grid.kind(n))});
  }
}

void write_defects_csv(const std::filesystem::path& path, const DefectSet& defects) {
  auto out = open_out(path);
  write_header(out, {"x", "y", "winding", "core_radius"});
  for (const Defect& d : defects.defects) {
    write_row(out, {d.position.x, d.position.y, static_cast<double>(d.winding), d.core_radius});
  }
}

void write_director_csv(const std::filesystem::path& path, const std::vector<DirectorSample>& samples) {
  auto out = open_out(path);
  write_header(out, {"x", "y", "angle", "abs_p", "r"});
  for (const DirectorSample& s : samples) write_row(out, {s.x.x, s.x.y, s.angle, s.abs_p, s.r});
}

void write_landscape_csv(const std::filesystem::path& path, const std::vector<WSample>& samples) {
  auto out = open_out(path);
  const std::size_t k = samples.empty() ? 1 : samples.front().config.size();
  std::vector<std::string> header;
  for (std::size_t l = 1; l <= k; ++l) {
    header.push_back("b" + std::to_string(l) + "x");
    header.push_back("b" + std::to_string(l) + "y");
  }
  header.push_back("W");
  write_header(out, header);
  for (const WSample& s : samples) {
    std::vector<double> row;
    for (Vec2 b : s.config) {
      row.push_back(b.x);
      row.push_back(b.y);
    }
    row.push_back(s.W);
    write_row(out, row);
  }
}

void write_cell_csv(const std::filesystem::path& path, const CellProblemResult& cell) {
  auto out = open_out(path);
  write_header(out, {"tau", "L"});
  for (std::size_t i = 0; i < cell.tau.size(); ++i) write_row(out, {cell.tau[i], cell.L[i]});
}

}  // namespace ldg
