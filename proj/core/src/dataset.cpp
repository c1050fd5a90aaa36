#include "irmc/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <string_view>

#include "irmc/errors.hpp"

namespace irmc {
namespace {

double parseField(std::string_view tok, const std::string& source, std::size_t lineno) {
  const auto b = tok.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) throw ParseError(source + ": line " + std::to_string(lineno) + ": empty field");
  tok = tok.substr(b, tok.find_last_not_of(" \t\r") - b + 1);
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (*first == '+') ++first;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last)
    throw ParseError(source + ": line " + std::to_string(lineno) + ": non-numeric field '" + std::string(tok) + "'");
  return v;
}

// Comma-separated when the line has a comma, whitespace-separated otherwise.
std::vector<double> splitNumbers(std::string_view line, const std::string& source, std::size_t lineno) {
  std::vector<double> out;
  if (line.find(',') != std::string_view::npos) {
    std::size_t pos = 0;
    while (true) {
      const auto comma = line.find(',', pos);
      out.push_back(parseField(line.substr(pos, comma - pos), source, lineno));
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
    return out;
  }
  std::size_t pos = 0;
  while ((pos = line.find_first_not_of(" \t\r", pos)) != std::string_view::npos) {
    const auto end = line.find_first_of(" \t\r", pos);
    out.push_back(parseField(line.substr(pos, end - pos), source, lineno));
    if (end == std::string_view::npos) break;
    pos = end;
  }
  return out;
}

}  // namespace

void validate(const LabeledDataset& data) {
  if (data.rows() == 0 || data.cols() == 0) throw ValidationError("dataset is empty");
  if (data.labels.size() != data.rows()) throw ValidationError("label count does not match rows");
  if (!data.design.allFinite()) throw ValidationError("design matrix has non-finite entries");
  for (Eigen::Index i = 0; i < data.labels.size(); ++i)
    if (data.labels[i] != 0.0 && data.labels[i] != 1.0)
      throw ValidationError("label at row " + std::to_string(i + 1) + " is not in {0,1}");
  if (!(data.design.col(0).array() == 1.0).all())
    throw ValidationError("first design column must be the all-ones intercept");
}

LabeledDataset parseLabeledTable(std::istream& in, int label_column, bool standardize,
                                 const std::string& source) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    auto values = splitNumbers(line, source, lineno);
    if (width == 0) width = values.size();
    if (values.size() != width)
      throw ParseError(source + ": line " + std::to_string(lineno) + ": expected " + std::to_string(width) +
                       " fields, found " + std::to_string(values.size()));
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw ParseError(source + ": no data rows");
  if (width < 2) throw ParseError(source + ": need at least one feature and a label column");

  const int w = static_cast<int>(width);
  const int label = label_column < 0 ? w + label_column : label_column;
  if (label < 0 || label >= w)
    throw std::invalid_argument("label column " + std::to_string(label_column) + " out of range");

  std::set<double> distinct;
  for (const auto& r : rows) distinct.insert(r[static_cast<std::size_t>(label)]);
  const bool zero_one = std::all_of(distinct.begin(), distinct.end(), [](double v) { return v == 0.0 || v == 1.0; });
  const bool one_two = std::all_of(distinct.begin(), distinct.end(), [](double v) { return v == 1.0 || v == 2.0; });
  if (!zero_one && !one_two) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const double v = rows[i][static_cast<std::size_t>(label)];
      if (v != 0.0 && v != 1.0)
        throw ValidationError(source + ": non-binary label " + std::to_string(v) + " in data row " +
                              std::to_string(i + 1));
    }
  }

  const auto n = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index d = w;  // intercept + (w - 1) features
  LabeledDataset data;
  data.design.resize(n, d);
  data.labels.resize(n);
  data.design.col(0).setOnes();
  data.feature_names.push_back("intercept");
  for (int c = 0; c < w; ++c)
    if (c != label) data.feature_names.push_back("x" + std::to_string(c));

  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = rows[static_cast<std::size_t>(i)];
    const double y = r[static_cast<std::size_t>(label)];
    data.labels[i] = (!zero_one && one_two) ? y - 1.0 : y;
    Eigen::Index col = 1;
    for (int c = 0; c < w; ++c)
      if (c != label) data.design(i, col++) = r[static_cast<std::size_t>(c)];
  }

  if (standardize) {
    if (n < 2) throw ValidationError(source + ": standardization needs at least two rows");
    for (Eigen::Index c = 1; c < d; ++c) {
      auto col = data.design.col(c);
      const double mean = col.mean();
      const double var = (col.array() - mean).square().sum() / static_cast<double>(n - 1);
      if (!(var > 0.0))
        throw ValidationError(source + ": feature column '" +
                              data.feature_names[static_cast<std::size_t>(c)] +
                              "' is constant and cannot be standardized");
      col = (col.array() - mean) / std::sqrt(var);
    }
    data.standardized = true;
  }
  validate(data);
  return data;
}

LabeledDataset loadStatlogCsv(const std::filesystem::path& path, int label_column, bool standardize) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open dataset '" + path.string() + "'");
  return parseLabeledTable(in, label_column, standardize, path.string());
}

}  // namespace irmc
