#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "latentid/ndmath/matrix.hpp"

namespace latentid {

// Matrix CSV: first line "rows,cols", then one comma-separated row per line,
// every value printed with 17 significant digits so it round-trips exactly.
void write_matrix_csv(std::ostream& os, const Matrix& m);
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m);
Matrix read_matrix_csv(std::istream& is);
Matrix read_matrix_csv(const std::filesystem::path& path);

// One integer per line.
void write_labels(const std::filesystem::path& path, const std::vector<std::size_t>& labels);
std::vector<std::size_t> read_labels(const std::filesystem::path& path);

/// Reads a vector of doubles either from a single-column Matrix CSV or from
/// a plain file with one value per line.
std::vector<double> read_vector(const std::filesystem::path& path);

}  // namespace latentid
