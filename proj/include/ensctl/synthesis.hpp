#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ensctl/model.hpp"

namespace ensctl {

/// Open-loop control as one real polynomial per input channel, ascending
/// monomial coefficients; the discrete input sequence is the coefficient list
/// reversed (u_{T-1-k} carries the z^k coefficient).
struct PolynomialControl {
    std::vector<Eigen::VectorXd> coeffs;  // m vectors, each of size degree+1
    int horizon = 0;                      // T = degree + 1
    std::optional<double> zoh_step;       // absent = natively discrete
    double achieved_error = 0.0;          // sup over fitting grid
    std::string basis;                    // orthogonalized-basis record

    int degree() const { return coeffs.empty() ? -1 : static_cast<int>(coeffs[0].size()) - 1; }
};

struct SynthesisConfig {
    double eps = 1e-3;
    int degree_start = 0;
    int degree_step = 1;
    int max_degree = 60;
    int lawson_iters = 60;  // sup-norm polish (iteratively reweighted LS)
    double ridge = 0.0;     // 0 = plain least squares
    int grid_count = 0;     // fitting grid density; 0 = domain default
    int revalidation_factor = 4;
};

struct SynthesisResult {
    PolynomialControl control;
    bool converged = false;
    int degrees_tried = 0;
};

/// Theorem-2(c) made constructive: least-squares polynomial fit of
/// sum_j p_j(A(theta)) b_j(theta) to the target over the grid, walking the
/// degree schedule until the sup error beats eps.
SynthesisResult synthesize(const SampledEnsemble& ens, const TargetProfile& target,
                           const SynthesisConfig& cfg);

/// Target recomputed per candidate horizon (free-response corrections for
/// nonzero initial states); degree D implies horizon T = D+1.
using HorizonTarget = std::function<std::vector<Eigen::VectorXd>(int degree, int horizon)>;
SynthesisResult synthesize_horizon(const SampledEnsemble& ens, const HorizonTarget& target_fn,
                                   const SynthesisConfig& cfg);

/// Input sequence u_0..u_{T-1}; exact coefficient reversal, no arithmetic.
std::vector<Eigen::VectorXd> control_to_inputs(const PolynomialControl& ctrl);

struct CascadeResult {
    std::vector<PolynomialControl> block_controls;  // bottom block last
    std::vector<Eigen::VectorXd> inputs;            // unified-horizon composite sequence
    int horizon = 0;
    double achieved_error = 0.0;  // full-system sup at the unified horizon
    bool converged = false;
    int failed_block = -1;  // first unconverged block (top-indexed), -1 if none
};

/// Proposition-2 cascade: synthesize the bottom block, re-simulate its drift
/// into the block above at each candidate horizon, repeat upward; horizons are
/// unified by zero-prepending.
CascadeResult cascade_synthesize(const SampledEnsemble& full, const std::vector<int>& state_dims,
                                 const std::vector<int>& input_dims, const TargetProfile& target,
                                 const SynthesisConfig& cfg);

/// Exact ZOH pair A_d = e^{hA}, B_d = (int_0^h e^{sA} ds) B via the augmented
/// exponential. Refuses steps with h * max|Im lambda| >= pi on the grid.
SampledEnsemble discretize_zoh(const SampledEnsemble& ens, double h);

}  // namespace ensctl
