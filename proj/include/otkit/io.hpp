#pragma once

#include <string>
#include <vector>

#include "otkit/core.hpp"

namespace otkit {

// CSV formats: histograms are one value per line, matrices are
// comma-separated rows without a header. Values are written with 17
// significant digits so a write/read round trip is bit-exact.

std::vector<double> read_vector_csv(const std::string& path);
Matrix read_matrix_csv(const std::string& path);

void write_vector_csv(const std::string& path, const std::vector<double>& v);
void write_matrix_csv(const std::string& path, const Matrix& m);

std::string format_double(double x);

// Group structure file: one line per group, space-separated zero-based
// row indices.
std::vector<std::vector<int>> read_groups(const std::string& path);

}  // namespace otkit
