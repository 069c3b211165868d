#pragma once

#include <Eigen/Dense>
#include <vector>

namespace ensctl {

/// Minimum-cost perfect matching on a square cost matrix (Hungarian method
/// with potentials, O(n^3)). Returns the column assigned to each row.
std::vector<int> min_cost_assignment(const Eigen::MatrixXd& cost);

}  // namespace ensctl
