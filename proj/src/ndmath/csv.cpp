#include "latentid/ndmath/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "latentid/error.hpp"

namespace latentid {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& tok) {
  const std::string t = trim(tok);
  if (t.empty()) throw IoError("empty numeric field");
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    throw IoError("cannot parse number '" + t + "'");
  }
  if (used != t.size()) throw IoError("cannot parse number '" + t + "'");
  return v;
}

std::size_t parse_count(const std::string& tok) {
  const std::string t = trim(tok);
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size()) {
    throw IoError("cannot parse count '" + t + "'");
  }
  return v;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

}  // namespace

void write_matrix_csv(std::ostream& os, const Matrix& m) {
  os << m.rows() << ',' << m.cols() << '\n';
  char buf[32];
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", m(r, c));
      if (c) os << ',';
      os << buf;
    }
    os << '\n';
  }
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m) {
  auto out = open_out(path);
  write_matrix_csv(out, m);
  if (!out) throw IoError("write failed: " + path.string());
}

Matrix read_matrix_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw IoError("matrix csv: missing header");
  const auto comma = line.find(',');
  if (comma == std::string::npos) throw IoError("matrix csv: header must be 'rows,cols'");
  const std::size_t rows = parse_count(line.substr(0, comma));
  const std::size_t cols = parse_count(line.substr(comma + 1));
  std::vector<double> data;
  data.reserve(rows * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (!std::getline(is, line)) throw IoError("matrix csv: expected " + std::to_string(rows) + " rows");
    std::stringstream ss(line);
    std::string tok;
    std::size_t n = 0;
    while (std::getline(ss, tok, ',')) {
      data.push_back(parse_double(tok));
      ++n;
    }
    if (n != cols) throw IoError("matrix csv: row " + std::to_string(r) + " has wrong width");
  }
  return Matrix(rows, cols, std::move(data));
}

Matrix read_matrix_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_matrix_csv(in);
}

void write_labels(const std::filesystem::path& path, const std::vector<std::size_t>& labels) {
  auto out = open_out(path);
  for (std::size_t v : labels) out << v << '\n';
}

std::vector<std::size_t> read_labels(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::vector<std::size_t> out;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    out.push_back(parse_count(line));
  }
  return out;
}

std::vector<double> read_vector(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string first;
  while (std::getline(in, first) && trim(first).empty()) {
  }
  if (first.find(',') != std::string::npos) {
    in.clear();
    in.seekg(0);
    const Matrix m = read_matrix_csv(in);
    if (m.cols() != 1) throw IoError("expected a single-column matrix in " + path.string());
    return m.column(0);
  }
  std::vector<double> out;
  if (!trim(first).empty()) out.push_back(parse_double(first));
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    out.push_back(parse_double(line));
  }
  return out;
}

}  // namespace latentid
