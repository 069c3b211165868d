#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "ensctl/model.hpp"

namespace ensctl {

struct Trajectory {
    std::vector<std::vector<Eigen::VectorXd>> states;  // per grid point, x_0..x_T
    std::vector<Eigen::VectorXd> final_states;
    int horizon = 0;
};

/// Exact discrete recursion x_{t+1} = A x_t + B u_t per grid point. Continuous
/// ensembles must be ZOH-discretized first (the ensemble carries zoh_step).
/// x0: empty = zero start; one vector = shared; grid-size vectors = per-point.
Trajectory rollout(const SampledEnsemble& ens, const std::vector<Eigen::VectorXd>& inputs,
                   const std::vector<Eigen::VectorXd>& x0 = {});

struct ErrorReport {
    double sup_fit = 0.0;
    std::vector<double> per_point;
    Eigen::VectorXd argmax_theta;
    bool revalidated = false;
    int revalidation_factor = 0;
    double sup_revalidation = 0.0;
    Eigen::VectorXd argmax_theta_revalidation;
};

/// Euclidean final-state error per grid point plus, for expression targets and
/// shared initial states, a re-run on a factor-finer grid.
ErrorReport sup_error(const Trajectory& traj, const TargetProfile& target,
                      const ParametricSystem& system, const SampledEnsemble& ens,
                      const std::vector<Eigen::VectorXd>& inputs,
                      const std::vector<Eigen::VectorXd>& x0, int revalidation_factor);

/// Pade scaling-and-squaring matrix exponential (dense, double).
Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& A);

}  // namespace ensctl
