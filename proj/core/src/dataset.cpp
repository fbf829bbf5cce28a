#include "superk/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <unordered_map>

#include "superk/error.hpp"
#include "superk/random.hpp"

namespace superk {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split_cells(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      cells.push_back(trim(line.substr(start)));
      break;
    }
    cells.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return cells;
}

// std::from_chars accepts "nan" and "inf"; those parse here and are rejected
// by the caller as non-finite.
std::optional<double> parse_number(std::string_view cell) {
  if (cell.empty()) return std::nullopt;
  if (cell.front() == '+') cell.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) return std::nullopt;
  return value;
}

std::string where(std::size_t row, std::size_t col) {
  return "row " + std::to_string(row) + ", column " + std::to_string(col);
}

struct RawTable {
  std::vector<std::string> header;
  // (1-based file row, cells)
  std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;
};

// Reads all non-empty lines. The header decision is made by `is_header`.
template <class HeaderRule>
RawTable read_table(const std::filesystem::path& path, HeaderRule is_header) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  RawTable table;
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split_cells(line);
    std::vector<std::string> owned(cells.begin(), cells.end());
    if (first) {
      first = false;
      width = owned.size();
      if (is_header(cells)) {
        table.header = std::move(owned);
        continue;
      }
    } else if (owned.size() != width) {
      throw DataError("'" + path.string() + "' row " + std::to_string(line_no) + ": expected " +
                      std::to_string(width) + " columns, found " +
                      std::to_string(owned.size()));
    }
    table.rows.emplace_back(line_no, std::move(owned));
  }
  if (table.rows.empty()) {
    throw DataError("'" + path.string() + "' contains no instances");
  }
  return table;
}

double parse_feature(const std::filesystem::path& path, std::string_view cell, std::size_t row,
                     std::size_t col) {
  const auto v = parse_number(cell);
  if (!v) {
    throw DataError("'" + path.string() + "' " + where(row, col) + ": non-numeric value '" +
                    std::string(cell) + "'");
  }
  if (!std::isfinite(*v)) {
    throw DataError("'" + path.string() + "' " + where(row, col) + ": non-finite value '" +
                    std::string(cell) + "'");
  }
  return *v;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::vector<std::string> numbered_names(int n) {
  std::vector<std::string> names;
  for (int i = 0; i < n; ++i) names.push_back(std::to_string(i));
  return names;
}

std::vector<double> linspace(double lo, double hi, std::size_t count, bool endpoint) {
  std::vector<double> out(count);
  if (count == 0) return out;
  const double denom = endpoint ? static_cast<double>(count > 1 ? count - 1 : 1)
                                : static_cast<double>(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = lo + (hi - lo) * static_cast<double>(i) / denom;
  return out;
}

// Applies a seeded row permutation so class blocks are interleaved.
Dataset shuffled(Dataset d, Rng& rng) {
  std::vector<std::size_t> order(d.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order);
  Dataset out;
  out.features = d.features.select_rows(order);
  out.labels.reserve(order.size());
  for (auto i : order) out.labels.push_back(d.labels[i]);
  out.feature_names = std::move(d.feature_names);
  out.label_names = std::move(d.label_names);
  out.n_classes = d.n_classes;
  return out;
}

}  // namespace

std::vector<std::size_t> Dataset::class_counts() const {
  std::vector<std::size_t> counts(static_cast<std::size_t>(std::max(n_classes, 0)), 0);
  for (int y : labels) ++counts.at(static_cast<std::size_t>(y));
  return counts;
}

void Dataset::validate() const {
  if (features.rows() < 1) throw DataError("dataset has no instances");
  if (features.cols() < 1) throw DataError("dataset has no features");
  if (labels.size() != features.rows()) {
    throw DataError("label count " + std::to_string(labels.size()) + " does not match " +
                    std::to_string(features.rows()) + " instances");
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= n_classes) {
      throw DataError("instance " + std::to_string(i) + " has label " +
                      std::to_string(labels[i]) + " outside [0, " + std::to_string(n_classes) +
                      ")");
    }
  }
  for (double v : features.data()) {
    if (!std::isfinite(v)) throw DataError("dataset contains a non-finite feature value");
  }
}

LabelColumn parse_label_column(const std::string& token) {
  const std::string_view t = trim(token);
  const bool numeric = !t.empty() && std::all_of(t.begin() + (t.front() == '-' ? 1 : 0), t.end(),
                                                 [](char c) { return c >= '0' && c <= '9'; }) &&
                       t != "-";
  if (numeric) return std::stoi(std::string(t));
  return std::string(t);
}

Dataset load_csv(const std::filesystem::path& path, const LabelColumn& label_column,
                 const CsvOptions& options) {
  const bool by_name = std::holds_alternative<std::string>(label_column);
  RawTable table = read_table(path, [&](const std::vector<std::string_view>& cells) {
    if (by_name) return true;
    int idx = std::get<int>(label_column);
    if (idx < 0) idx += static_cast<int>(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (static_cast<int>(c) == idx) continue;
      if (!parse_number(cells[c])) return true;
    }
    return false;
  });

  const std::size_t width = table.rows.front().second.size();
  std::size_t label_idx = 0;
  if (by_name) {
    const auto& name = std::get<std::string>(label_column);
    const auto it = std::find(table.header.begin(), table.header.end(), name);
    if (it == table.header.end()) {
      throw DataError("'" + path.string() + "': label column '" + name + "' not found in header");
    }
    label_idx = static_cast<std::size_t>(it - table.header.begin());
  } else {
    int idx = std::get<int>(label_column);
    if (idx < 0) idx += static_cast<int>(width);
    if (idx < 0 || static_cast<std::size_t>(idx) >= width) {
      throw DataError("'" + path.string() + "': label column index " +
                      std::to_string(std::get<int>(label_column)) + " out of range for " +
                      std::to_string(width) + " columns");
    }
    label_idx = static_cast<std::size_t>(idx);
  }
  if (width < 2) {
    throw DataError("'" + path.string() + "': need at least one feature column besides the label");
  }

  Dataset out;
  if (!table.header.empty()) {
    for (std::size_t c = 0; c < width; ++c) {
      if (c != label_idx) out.feature_names.push_back(table.header[c]);
    }
  }

  std::unordered_map<std::string, int> ids;
  if (options.known_labels) {
    out.label_names = *options.known_labels;
    for (std::size_t i = 0; i < out.label_names.size(); ++i) {
      ids.emplace(out.label_names[i], static_cast<int>(i));
    }
  }

  std::vector<double> buf;
  buf.reserve(table.rows.size() * (width - 1));
  out.labels.reserve(table.rows.size());
  for (const auto& [row_no, cells] : table.rows) {
    for (std::size_t c = 0; c < width; ++c) {
      if (c == label_idx) continue;
      buf.push_back(parse_feature(path, cells[c], row_no, c));
    }
    const std::string& label = cells[label_idx];
    if (label.empty()) {
      throw DataError("'" + path.string() + "' " + where(row_no, label_idx) + ": empty label");
    }
    auto it = ids.find(label);
    if (it == ids.end()) {
      if (options.known_labels) {
        throw DataError("'" + path.string() + "' " + where(row_no, label_idx) + ": label '" +
                        label + "' is not a known class");
      }
      it = ids.emplace(label, static_cast<int>(out.label_names.size())).first;
      out.label_names.push_back(label);
    }
    out.labels.push_back(it->second);
  }
  out.features = Matrix(table.rows.size(), width - 1, std::move(buf));
  out.n_classes = static_cast<int>(out.label_names.size());
  return out;
}

Matrix load_features_csv(const std::filesystem::path& path) {
  RawTable table = read_table(path, [](const std::vector<std::string_view>& cells) {
    return std::any_of(cells.begin(), cells.end(),
                       [](std::string_view c) { return !parse_number(c); });
  });
  const std::size_t width = table.rows.front().second.size();
  std::vector<double> buf;
  buf.reserve(table.rows.size() * width);
  for (const auto& [row_no, cells] : table.rows) {
    for (std::size_t c = 0; c < width; ++c) buf.push_back(parse_feature(path, cells[c], row_no, c));
  }
  return Matrix(table.rows.size(), width, std::move(buf));
}

void save_csv(const Dataset& data, const std::filesystem::path& path,
              const std::string& label_header) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  const std::size_t m = data.dims();
  for (std::size_t c = 0; c < m; ++c) {
    out << (c < data.feature_names.size() ? data.feature_names[c] : "x" + std::to_string(c))
        << ',';
  }
  out << label_header << '\n';
  for (std::size_t r = 0; r < data.size(); ++r) {
    const auto row = data.features.row(r);
    for (std::size_t c = 0; c < m; ++c) out << format_double(row[c]) << ',';
    const auto y = static_cast<std::size_t>(data.labels[r]);
    out << (y < data.label_names.size() ? data.label_names[y] : std::to_string(y)) << '\n';
  }
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

Dataset make_moons(std::size_t n, double noise, std::uint64_t seed) {
  if (n < 2) throw InvalidArgument("make_moons: n must be at least 2");
  if (!(noise >= 0.0)) throw InvalidArgument("make_moons: noise must be >= 0");
  Rng rng(seed);
  const std::size_t n_upper = (n + 1) / 2;
  const std::size_t n_lower = n / 2;
  Dataset d;
  d.features = Matrix(n, 2);
  d.labels.reserve(n);
  std::size_t r = 0;
  for (double t : linspace(0.0, std::numbers::pi, n_upper, true)) {
    d.features(r, 0) = std::cos(t);
    d.features(r, 1) = std::sin(t);
    d.labels.push_back(0);
    ++r;
  }
  for (double t : linspace(0.0, std::numbers::pi, n_lower, true)) {
    d.features(r, 0) = 1.0 - std::cos(t);
    d.features(r, 1) = 0.5 - std::sin(t);
    d.labels.push_back(1);
    ++r;
  }
  if (noise > 0.0) {
    for (std::size_t i = 0; i < n; ++i) {
      d.features(i, 0) += noise * rng.normal();
      d.features(i, 1) += noise * rng.normal();
    }
  }
  d.feature_names = {"x0", "x1"};
  d.label_names = numbered_names(2);
  d.n_classes = 2;
  return shuffled(std::move(d), rng);
}

Dataset make_circles(std::size_t n, double noise, double factor, std::uint64_t seed) {
  if (n < 2) throw InvalidArgument("make_circles: n must be at least 2");
  if (!(factor > 0.0 && factor < 1.0)) {
    throw InvalidArgument("make_circles: factor must lie in (0, 1)");
  }
  if (!(noise >= 0.0)) throw InvalidArgument("make_circles: noise must be >= 0");
  Rng rng(seed);
  const std::size_t n_outer = (n + 1) / 2;
  const std::size_t n_inner = n / 2;
  Dataset d;
  d.features = Matrix(n, 2);
  std::size_t r = 0;
  auto ring = [&](std::size_t count, double radius, int label) {
    for (double t : linspace(0.0, 2.0 * std::numbers::pi, count, false)) {
      d.features(r, 0) = radius * std::cos(t);
      d.features(r, 1) = radius * std::sin(t);
      d.labels.push_back(label);
      ++r;
    }
  };
  ring(n_outer, 1.0, 0);
  ring(n_inner, factor, 1);
  if (noise > 0.0) {
    for (std::size_t i = 0; i < n; ++i) {
      d.features(i, 0) += noise * rng.normal();
      d.features(i, 1) += noise * rng.normal();
    }
  }
  d.feature_names = {"x0", "x1"};
  d.label_names = numbered_names(2);
  d.n_classes = 2;
  return shuffled(std::move(d), rng);
}

Dataset make_gaussians(std::size_t n, int n_classes, double spread, std::uint64_t seed) {
  if (n_classes < 2) throw InvalidArgument("make_gaussians: need at least 2 classes");
  if (n < static_cast<std::size_t>(n_classes)) {
    throw InvalidArgument("make_gaussians: n must be at least n_classes");
  }
  if (!(spread >= 0.0)) throw InvalidArgument("make_gaussians: spread must be >= 0");
  Rng rng(seed);
  const auto k = static_cast<std::size_t>(n_classes);
  std::vector<std::pair<double, double>> centers(k);
  for (auto& c : centers) {
    c.first = rng.uniform(-10.0, 10.0);
    c.second = rng.uniform(-10.0, 10.0);
  }
  Dataset d;
  d.features = Matrix(n, 2);
  std::size_t r = 0;
  for (std::size_t c = 0; c < k; ++c) {
    const std::size_t count = n / k + (c < n % k ? 1 : 0);
    for (std::size_t i = 0; i < count; ++i, ++r) {
      d.features(r, 0) = centers[c].first;
      d.features(r, 1) = centers[c].second;
      if (spread > 0.0) {
        d.features(r, 0) += spread * rng.normal();
        d.features(r, 1) += spread * rng.normal();
      }
      d.labels.push_back(static_cast<int>(c));
    }
  }
  d.feature_names = {"x0", "x1"};
  d.label_names = numbered_names(n_classes);
  d.n_classes = n_classes;
  return shuffled(std::move(d), rng);
}

Dataset subset(const Dataset& data, const std::vector<std::size_t>& indices) {
  Dataset out;
  out.features = data.features.select_rows(indices);
  out.labels.reserve(indices.size());
  for (auto i : indices) out.labels.push_back(data.labels[i]);
  out.feature_names = data.feature_names;
  out.label_names = data.label_names;
  out.n_classes = data.n_classes;
  return out;
}

std::pair<Dataset, Dataset> split(const Dataset& data, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw InvalidArgument("split: test_fraction must lie in (0, 1)");
  }
  const std::size_t n = data.size();
  const auto n_test =
      static_cast<std::size_t>(std::llround(static_cast<double>(n) * test_fraction));
  if (n_test == 0 || n_test >= n) {
    throw InvalidArgument("split: test_fraction " + std::to_string(test_fraction) + " of " +
                          std::to_string(n) + " instances leaves an empty part");
  }

  // Per-class quotas: floor of the proportional share, then the remainder goes
  // to the largest fractional parts (lower class id first on ties).
  const auto counts = data.class_counts();
  const std::size_t k = counts.size();
  std::vector<std::size_t> quota(k);
  std::vector<double> frac(k);
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < k; ++c) {
    const double share = static_cast<double>(counts[c]) * static_cast<double>(n_test) /
                         static_cast<double>(n);
    quota[c] = static_cast<std::size_t>(std::floor(share));
    frac[c] = share - static_cast<double>(quota[c]);
    assigned += quota[c];
  }
  std::vector<std::size_t> order(k);
  for (std::size_t c = 0; c < k; ++c) order[c] = c;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
  for (std::size_t i = 0; assigned < n_test; i = (i + 1) % k) {
    const auto c = order[i];
    if (quota[c] < counts[c]) {
      ++quota[c];
      ++assigned;
    }
  }

  Rng rng(seed);
  std::vector<std::vector<std::size_t>> members(k);
  for (std::size_t i = 0; i < n; ++i) members[static_cast<std::size_t>(data.labels[i])].push_back(i);
  std::vector<char> is_test(n, 0);
  for (std::size_t c = 0; c < k; ++c) {
    rng.shuffle(members[c]);
    for (std::size_t j = 0; j < quota[c]; ++j) is_test[members[c][j]] = 1;
  }
  std::vector<std::size_t> train_idx, test_idx;
  for (std::size_t i = 0; i < n; ++i) (is_test[i] ? test_idx : train_idx).push_back(i);
  return {subset(data, train_idx), subset(data, test_idx)};
}

}  // namespace superk
