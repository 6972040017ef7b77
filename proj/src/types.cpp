#include "qutlasso/types.hpp"

namespace qut {

DesignMatrix::DesignMatrix(Matrix m) {
  if (m.rows() < 1 || m.cols() < 1)
    throw InvalidDimension("design matrix must have at least one row and one column");
  if (!m.allFinite()) throw NonFiniteInput("design matrix has non-finite entries");
  values = std::move(m);
  column_scale = Vector::Ones(values.cols());
  column_center = Vector::Zero(values.cols());
  constant_column.assign(static_cast<std::size_t>(values.cols()), 0);
  standardized = false;
}

TrueModel TrueModel::from_beta(Vector beta0) {
  TrueModel m;
  m.support = support_of(beta0);
  m.beta0 = std::move(beta0);
  return m;
}

std::vector<int> support_of(const Vector& beta) {
  std::vector<int> s;
  for (Eigen::Index j = 0; j < beta.size(); ++j)
    if (beta[j] != 0.0) s.push_back(static_cast<int>(j));
  return s;
}

DesignMatrix subset_rows(const DesignMatrix& X, const std::vector<int>& rows) {
  if (rows.empty()) throw InvalidDimension("row subset must be nonempty");
  DesignMatrix sub;
  sub.values.resize(static_cast<Eigen::Index>(rows.size()), X.p());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    int r = rows[i];
    if (r < 0 || r >= X.n()) throw InvalidDimension("row index out of range");
    sub.values.row(static_cast<Eigen::Index>(i)) = X.values.row(r);
  }
  sub.column_scale = X.column_scale;
  sub.column_center = X.column_center;
  sub.constant_column = X.constant_column;
  sub.standardized = X.standardized;
  return sub;
}

void check_design_response(const DesignMatrix& X, const Vector& y) {
  if (y.size() != X.n())
    throw DimensionMismatch("response length " + std::to_string(y.size()) +
                            " does not match design rows " + std::to_string(X.n()));
  if (!y.allFinite()) throw NonFiniteInput("response has non-finite entries");
  if (!X.values.allFinite()) throw NonFiniteInput("design matrix has non-finite entries");
}

}  // namespace qut
