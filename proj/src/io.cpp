#include "otkit/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace otkit {

namespace {

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw OtError(Errc::io_error, "cannot open for reading: " + path);
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw OtError(Errc::io_error, "cannot open for writing: " + path);
  return out;
}

double parse_double(const std::string& token, const std::string& path) {
  const char* begin = token.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  while (end && *end == ' ') ++end;
  if (end == begin || (end && *end != '\0'))
    throw OtError(Errc::io_error, "bad numeric value '" + token + "' in " + path);
  return v;
}

bool blank(const std::string& line) {
  for (char c : line)
    if (c != ' ' && c != '\t' && c != '\r') return false;
  return true;
}

}  // namespace

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::vector<double> read_vector_csv(const std::string& path) {
  auto in = open_in(path);
  std::vector<double> v;
  std::string line;
  while (std::getline(in, line)) {
    if (blank(line)) continue;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    v.push_back(parse_double(line, path));
  }
  if (v.empty()) throw OtError(Errc::io_error, "no values in " + path);
  return v;
}

Matrix read_matrix_csv(const std::string& path) {
  auto in = open_in(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (blank(line)) continue;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<double> row;
    std::stringstream ss(line);
    std::string token;
    while (std::getline(ss, token, ',')) row.push_back(parse_double(token, path));
    if (!rows.empty() && row.size() != rows.front().size())
      throw OtError(Errc::io_error, "ragged rows in " + path);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw OtError(Errc::io_error, "no rows in " + path);
  Matrix m(static_cast<int>(rows.size()), static_cast<int>(rows.front().size()));
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) m(i, j) = rows[static_cast<size_t>(i)][static_cast<size_t>(j)];
  return m;
}

void write_vector_csv(const std::string& path, const std::vector<double>& v) {
  auto out = open_out(path);
  for (double x : v) out << format_double(x) << '\n';
  if (!out) throw OtError(Errc::io_error, "write failed: " + path);
}

void write_matrix_csv(const std::string& path, const Matrix& m) {
  auto out = open_out(path);
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
  if (!out) throw OtError(Errc::io_error, "write failed: " + path);
}

std::vector<std::vector<int>> read_groups(const std::string& path) {
  auto in = open_in(path);
  std::vector<std::vector<int>> groups;
  std::string line;
  while (std::getline(in, line)) {
    if (blank(line)) continue;
    std::vector<int> g;
    std::stringstream ss(line);
    long long idx;
    while (ss >> idx) g.push_back(static_cast<int>(idx));
    if (!g.empty()) groups.push_back(std::move(g));
  }
  if (groups.empty()) throw OtError(Errc::io_error, "no groups in " + path);
  return groups;
}

}  // namespace otkit
