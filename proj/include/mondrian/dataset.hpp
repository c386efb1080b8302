#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mondrian/features.hpp"
#include "mondrian/matrix.hpp"

namespace mondrian {

/// In-memory regression dataset. Ingestion rejects NaN/Inf and missing
/// values, so downstream code can assume finite entries; per-column value
/// ranges are recorded at load time.
struct Dataset {
  Matrix x;
  std::vector<double> y;
  std::vector<std::string> feature_names;
  std::vector<std::pair<double, double>> feature_ranges;  // per column (min, max)
  std::string source;
};

/**
 * Parse a CSV file into a Dataset. Comma-separated UTF-8, '.' decimal point,
 * no thousands separators; decimal and scientific notation accepted. The
 * target column is selected by name (requires a header) or by 0-based index.
 * Rows with missing or non-numeric cells are rejected with an error naming
 * the line and column.
 */
Dataset ingest_csv(const std::string& path, const std::string& target, bool has_header);

/// Write a dataset back out (round-trips through ingest_csv losslessly).
void write_csv(const Dataset& data, const std::string& path);

/// Shuffled train/validation split: both sets non-empty, disjoint, covering.
struct SplitSpec {
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
};

DataSplit make_split(std::size_t n_rows, const SplitSpec& spec);

/// Rows of `x` selected by index.
Matrix select_rows(const Matrix& x, std::span<const int> rows);
std::vector<double> select(std::span<const double> v, std::span<const int> rows);

}  // namespace mondrian
