#pragma once

#include <filesystem>
#include <istream>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace irmc {

/// Binary-response regression data. The first design column is the intercept.
struct LabeledDataset {
  Eigen::MatrixXd design;  ///< N x D, column 0 all ones
  Eigen::VectorXd labels;  ///< N entries in {0, 1}
  std::vector<std::string> feature_names;
  bool standardized = false;

  Eigen::Index rows() const { return design.rows(); }
  Eigen::Index cols() const { return design.cols(); }
};

/// Throws ValidationError if labels are not in {0,1}, the design has
/// non-finite entries or the intercept column is missing.
void validate(const LabeledDataset& data);

/// Parse a numeric table (comma or whitespace separated, '.' decimal point).
///
/// `label_column` indexes the raw columns; negative values count from the end.
/// Labels must be {0,1}, or {1,2} (the Statlog convention, 2 -> 1).
/// With `standardize`, every feature column is shifted and scaled to sample mean
/// 0 and variance 1; a constant feature column is a ValidationError.
LabeledDataset parseLabeledTable(std::istream& in, int label_column, bool standardize,
                                 const std::string& source = "<stream>");

LabeledDataset loadStatlogCsv(const std::filesystem::path& path, int label_column,
                              bool standardize);

}  // namespace irmc
