#include "wasser_dual/csv_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <istream>
#include <ostream>
#include <sstream>

#include "wasser_dual/error.hpp"

namespace wd {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

double parse_double(std::string_view token, std::string_view field) {
  token = trim(token);
  if (token == "inf" || token == "+inf" || token == "Inf" || token == "infinity") {
    return std::numeric_limits<double>::infinity();
  }
  double value = 0.0;
  const auto* begin = token.data();
  const auto* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (token.empty() || ec != std::errc{} || ptr != end) {
    throw MalformedInput("malformed number in field '" + std::string(field) + "': '" +
                         std::string(token) + "'");
  }
  return value;
}

std::uint64_t parse_u64(std::string_view token, std::string_view field) {
  token = trim(token);
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (token.empty() || ec != std::errc{} || ptr != token.data() + token.size()) {
    throw MalformedInput("malformed integer in field '" + std::string(field) + "': '" +
                         std::string(token) + "'");
  }
  return value;
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.emplace_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

std::vector<double> read_index_value_csv(std::istream& in, std::size_t size,
                                         std::string_view what) {
  std::vector<std::pair<std::size_t, double>> entries;
  std::string line;
  std::size_t line_number = 0;
  std::size_t max_index = 0;
  while (std::getline(in, line)) {
    ++line_number;
    auto view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    auto cells = split_csv_line(view);
    if (cells.size() != 2) {
      throw MalformedInput(std::string(what) + ": line " + std::to_string(line_number) +
                           " must have two columns");
    }
    if (line_number == 1 && !cells[0].empty() && !std::isdigit(static_cast<unsigned char>(cells[0][0]))) {
      continue;  // header
    }
    const std::string field = std::string(what) + " line " + std::to_string(line_number);
    const auto index = static_cast<std::size_t>(parse_u64(cells[0], field));
    const double value = parse_double(cells[1], field);
    entries.emplace_back(index, value);
    max_index = std::max(max_index, index);
  }
  if (entries.empty()) throw MalformedInput(std::string(what) + ": no rows");
  if (size == 0) size = max_index + 1;
  if (max_index >= size) {
    throw MalformedInput(std::string(what) + ": index " + std::to_string(max_index) +
                         " out of range for " + std::to_string(size) + " points");
  }
  std::vector<double> values(size, 0.0);
  for (auto [index, value] : entries) values[index] += value;
  return values;
}

std::vector<double> read_index_value_csv_file(const std::filesystem::path& path,
                                              std::size_t size, std::string_view what) {
  std::ifstream in(path);
  if (!in) throw MalformedInput(std::string(what) + ": cannot open '" + path.string() + "'");
  return read_index_value_csv(in, size, what);
}

void write_index_value_csv(std::ostream& out, std::string_view value_header,
                           const std::vector<double>& values) {
  out << "index," << value_header << '\n';
  for (std::size_t i = 0; i < values.size(); ++i) out << i << ',' << format_double(values[i]) << '\n';
}

void write_sparse_triples_csv(std::ostream& out, const DenseMatrix& matrix) {
  out << "i,j,mass\n";
  for (std::size_t i = 0; i < matrix.rows(); ++i) {
    for (std::size_t j = 0; j < matrix.cols(); ++j) {
      if (matrix(i, j) != 0.0) out << i << ',' << j << ',' << format_double(matrix(i, j)) << '\n';
    }
  }
}

void write_dense_csv(std::ostream& out, const DenseMatrix& matrix) {
  for (std::size_t i = 0; i < matrix.rows(); ++i) {
    for (std::size_t j = 0; j < matrix.cols(); ++j) {
      if (j) out << ',';
      out << format_double(matrix(i, j));
    }
    out << '\n';
  }
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  auto temp = path;
  temp += ".tmp";
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + temp.string() + "'");
    out << contents;
    if (!out.flush()) throw std::runtime_error("write failed for '" + temp.string() + "'");
  }
  std::filesystem::rename(temp, path);
}

}  // namespace wd
