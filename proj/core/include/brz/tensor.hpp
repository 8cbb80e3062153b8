#pragma once

// Mode-j products of row-major tensors with dense matrices.

#include <cstddef>
#include <vector>

#include <Eigen/Core>

namespace brz {

using Shape = std::vector<std::size_t>;

/// out = M x_axis in, where M is (m x shape[axis]); the result has shape[axis]
/// replaced by m.
std::vector<double> mode_product(const std::vector<double>& in, const Shape& shape, int axis,
                                 const Eigen::MatrixXd& M);

/// Applies mats[j] along every axis j in turn. Returns the final values and
/// updates shape in place.
std::vector<double> apply_per_axis(std::vector<double> values, Shape& shape,
                                   const std::vector<Eigen::MatrixXd>& mats);

}  // namespace brz
