#pragma once

// CSV artifacts. Numbers are written with 17 significant digits so that
// files round-trip and identical runs produce identical bytes.

#include <filesystem>
#include <string>
#include <vector>

#include "ldg/defects.hpp"
#include "ldg/renorm.hpp"

namespace ldg {

/// Active nodes in row-major order with header x,y,p1,p2,r (or x,y,v1,v2).
void write_field_csv(const std::filesystem::path& path, const Field& field);
/// Reads a file written by write_field_csv on the same grid.
Field read_field_csv(const std::filesystem::path& path, std::shared_ptr<const Grid> grid);

/// x,y,mask for every lattice node; mask is 0 exterior, 1 interior, 2 boundary.
void write_grid_csv(const std::filesystem::path& path, const Grid& grid);
void write_defects_csv(const std::filesystem::path& path, const DefectSet& defects);
void write_director_csv(const std::filesystem::path& path, const std::vector<DirectorSample>& samples);
void write_landscape_csv(const std::filesystem::path& path, const std::vector<WSample>& samples);
void write_cell_csv(const std::filesystem::path& path, const CellProblemResult& cell);

/// Generic table with a header row.
void write_table_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows);

}  // namespace ldg
