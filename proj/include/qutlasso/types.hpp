#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace qut {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error { using Error::Error; };
struct NonFiniteInput : Error { using Error::Error; };
struct InvalidDimension : Error { using Error::Error; };
struct InvalidSize : Error { using Error::Error; };
struct InvalidFolds : Error { using Error::Error; };
struct TooFewReplicates : Error { using Error::Error; };
struct DegreesOfFreedomExhausted : Error { using Error::Error; };
struct InsufficientData : Error { using Error::Error; };
struct InvalidConfig : Error { using Error::Error; };

/// Covariate matrix together with the scaling that produced it, so
/// coefficients can be mapped back to the original measurement units.
struct DesignMatrix {
  Matrix values;                              // N x P
  Vector column_scale;                        // multiplicative factor applied per column
  Vector column_center;                       // subtracted per column (zero unless centered)
  std::vector<std::uint8_t> constant_column;  // degenerate columns, kept at coefficient zero
  bool standardized = false;

  DesignMatrix() = default;
  explicit DesignMatrix(Matrix m);

  Eigen::Index n() const { return values.rows(); }
  Eigen::Index p() const { return values.cols(); }
  bool is_constant(Eigen::Index j) const {
    return constant_column[static_cast<std::size_t>(j)] != 0;
  }
};

struct LassoFit {
  double lambda = 0.0;
  Vector beta;
  std::vector<int> active_set;  // sorted indices of nonzero coefficients
  double objective = 0.0;
  double kkt_violation = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct TrueModel {
  Vector beta0;
  std::vector<int> support;

  int sparsity() const { return static_cast<int>(support.size()); }
  static TrueModel from_beta(Vector beta0);
};

std::vector<int> support_of(const Vector& beta);

void check_design_response(const DesignMatrix& X, const Vector& y);

/// Row-subset view copy preserving scaling metadata and column flags.
DesignMatrix subset_rows(const DesignMatrix& X, const std::vector<int>& rows);

}  // namespace qut
