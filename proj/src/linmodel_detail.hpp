#pragma once

#include "aggpi/linmodel.hpp"

#include <optional>
#include <vector>

namespace aggpi::detail {

/// Columns that take part in a fit: not flagged constant and not constant in the data.
std::vector<Eigen::Index> fit_columns(const DesignMatrix& X);

void check_dimensions(const DesignMatrix& X, const Eigen::VectorXd& y, const std::optional<ObservationWeights>& w);

/// Scatters active-column coefficients back to full width, maps them to the
/// original scale and fills residuals.
FitResult finalize(const DesignMatrix& X, const Eigen::VectorXd& y, const std::vector<Eigen::Index>& active,
                   const Eigen::VectorXd& beta_active, double intercept_std, Estimator estimator);

Eigen::MatrixXd take_columns(const Eigen::MatrixXd& values, const std::vector<Eigen::Index>& cols);

}  // namespace aggpi::detail
