#include "mondrian/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "mondrian/rng.hpp"

namespace mondrian {
namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

double parse_cell(const std::string& raw, std::size_t line_no, const std::string& col_name) {
  const std::string cell = trim(raw);
  const auto fail = [&](const char* what) {
    throw std::invalid_argument("csv line " + std::to_string(line_no) + ", column '" +
                                col_name + "': " + what + " ('" + cell + "')");
  };
  if (cell.empty()) fail("missing value");
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) fail("not a number");
  if (!std::isfinite(value)) fail("non-finite value");
  return value;
}

}  // namespace

Dataset ingest_csv(const std::string& path, const std::string& target, bool has_header) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read file: " + path);

  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!trim(line).empty()) lines.push_back(line);
  }
  if (lines.size() < (has_header ? 3u : 2u))
    throw std::invalid_argument("csv: need at least 2 data rows in " + path);

  std::vector<std::string> names;
  std::size_t first_data = 0;
  const std::size_t n_cols = split_line(lines[0]).size();
  if (n_cols < 2) throw std::invalid_argument("csv: need at least 2 columns in " + path);
  if (has_header) {
    for (const std::string& h : split_line(lines[0])) names.push_back(trim(h));
    first_data = 1;
  } else {
    for (std::size_t c = 0; c < n_cols; ++c) names.push_back("col" + std::to_string(c));
  }

  // Target by name, falling back to a 0-based index.
  std::size_t target_col = n_cols;
  const auto it = std::find(names.begin(), names.end(), target);
  if (it != names.end()) {
    target_col = static_cast<std::size_t>(it - names.begin());
  } else {
    std::size_t idx = 0;
    const auto [ptr, ec] = std::from_chars(target.data(), target.data() + target.size(), idx);
    if (ec == std::errc() && ptr == target.data() + target.size() && idx < n_cols)
      target_col = idx;
  }
  if (target_col >= n_cols)
    throw std::invalid_argument("csv: target column '" + target + "' not found");

  const std::size_t n_rows = lines.size() - first_data;
  Dataset data;
  data.source = path;
  data.x = Matrix(n_rows, n_cols - 1);
  data.y.resize(n_rows);
  for (std::size_t c = 0; c < n_cols; ++c)
    if (c != target_col) data.feature_names.push_back(names[c]);

  for (std::size_t r = 0; r < n_rows; ++r) {
    const std::size_t line_no = first_data + r + 1;  // 1-based, as in the file
    const std::vector<std::string> cells = split_line(lines[first_data + r]);
    if (cells.size() != n_cols)
      throw std::invalid_argument("csv line " + std::to_string(line_no) + ": expected " +
                                  std::to_string(n_cols) + " cells, got " +
                                  std::to_string(cells.size()));
    std::size_t feature = 0;
    for (std::size_t c = 0; c < n_cols; ++c) {
      const double value = parse_cell(cells[c], line_no, names[c]);
      if (c == target_col)
        data.y[r] = value;
      else
        data.x(r, feature++) = value;
    }
  }
  data.feature_ranges.resize(data.x.cols());
  for (std::size_t c = 0; c < data.x.cols(); ++c) {
    double lo = data.x(0, c), hi = data.x(0, c);
    for (std::size_t r = 1; r < n_rows; ++r) {
      lo = std::min(lo, data.x(r, c));
      hi = std::max(hi, data.x(r, c));
    }
    data.feature_ranges[c] = {lo, hi};
  }
  return data;
}

void write_csv(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write file: " + path);
  for (const std::string& name : data.feature_names) out << name << ',';
  out << "target\n";
  char buf[64];
  const auto put = [&](double v, char sep) {
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    out.write(buf, ptr - buf);
    out.put(sep);
  };
  for (std::size_t r = 0; r < data.x.rows(); ++r) {
    for (std::size_t c = 0; c < data.x.cols(); ++c) put(data.x(r, c), ',');
    put(data.y[r], '\n');
  }
}

DataSplit make_split(std::size_t n_rows, const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0))
    throw std::invalid_argument("split: train fraction must lie in (0, 1)");
  if (n_rows < 2) throw std::invalid_argument("split: need at least 2 rows");

  std::vector<int> order(n_rows);
  for (std::size_t i = 0; i < n_rows; ++i) order[i] = static_cast<int>(i);
  RngStream rng(spec.seed, RngStream::stream_hash("split", 0));
  for (std::size_t i = n_rows - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(rng.next_u64() % (i + 1));
    std::swap(order[i], order[j]);
  }

  auto n_train = static_cast<std::size_t>(
      std::round(spec.train_fraction * static_cast<double>(n_rows)));
  n_train = std::clamp<std::size_t>(n_train, 1, n_rows - 1);

  DataSplit split;
  split.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  split.val.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.val.begin(), split.val.end());
  return split;
}

Matrix select_rows(const Matrix& x, std::span<const int> rows) {
  Matrix out(rows.size(), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t c = 0; c < x.cols(); ++c) out(i, c) = x(rows[i], c);
  return out;
}

std::vector<double> select(std::span<const double> v, std::span<const int> rows) {
  std::vector<double> out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) out[i] = v[rows[i]];
  return out;
}

}  // namespace mondrian
