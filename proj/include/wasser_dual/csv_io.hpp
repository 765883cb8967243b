#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wasser_dual/dense_matrix.hpp"

namespace wd {

/// 17 significant digits; "inf" / "-inf" / "nan" for non-finite values.
std::string format_double(double value);

/// Parses a decimal (or "inf"); throws MalformedInput naming `field`.
double parse_double(std::string_view token, std::string_view field);
std::uint64_t parse_u64(std::string_view token, std::string_view field);

/// Splits on commas and trims surrounding whitespace.
std::vector<std::string> split_csv_line(std::string_view line);

/// Reads `index,value` rows (an optional non-numeric header is skipped) into
/// a dense vector of length `size` (0 = max index + 1). Missing indices are 0.
std::vector<double> read_index_value_csv(std::istream& in, std::size_t size,
                                         std::string_view what);
std::vector<double> read_index_value_csv_file(const std::filesystem::path& path,
                                              std::size_t size, std::string_view what);

void write_index_value_csv(std::ostream& out, std::string_view value_header,
                           const std::vector<double>& values);
/// Sparse `i,j,mass` triples of the nonzero entries.
void write_sparse_triples_csv(std::ostream& out, const DenseMatrix& matrix);
void write_dense_csv(std::ostream& out, const DenseMatrix& matrix);

/// Writes to `path.tmp` and renames over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace wd
