#pragma once

#include <ostream>
#include <string>

#include "json.hpp"

#include "ensctl/diagnostics.hpp"
#include "ensctl/model.hpp"
#include "ensctl/network.hpp"
#include "ensctl/simulation.hpp"
#include "ensctl/synthesis.hpp"

namespace ensctl {

nlohmann::json to_json(const Witness& w);
nlohmann::json to_json(const CheckOutcome& c);
nlohmann::json to_json(const Tolerances& t);
nlohmann::json to_json(const DiagnosticsReport& rep);
nlohmann::json to_json(const RobustSyncReport& rep);
nlohmann::json to_json(const ErrorReport& rep);

/// Control artifact: {mode, h?, T, coeffs[m][D+1], achieved_error,
/// grid_descriptor, tolerances} plus the embedded target/x0 that produced it.
nlohmann::json control_to_json(const PolynomialControl& ctrl, const ParameterDomain& domain,
                               int grid_count, double eps, const TargetProfile& target,
                               const std::vector<Eigen::VectorXd>& x0);

struct ControlFile {
    PolynomialControl control;
    int grid_count = 0;
    double eps = 0.0;
    std::vector<std::string> target_exprs;            // expression targets
    std::vector<std::vector<double>> target_points;   // tabulated targets
    std::vector<std::vector<double>> x0;
};

ControlFile control_from_json(const nlohmann::json& j);

/// Trajectory CSV: t, theta (d columns), x_1..x_n; header row mandatory;
/// rows grouped per grid point with t ascending.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj, const ParamGrid& grid);

}  // namespace ensctl
