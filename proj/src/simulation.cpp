#include "ensctl/simulation.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include "ensctl/synthesis.hpp"

namespace ensctl {

Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& A) { return A.exp(); }

Trajectory rollout(const SampledEnsemble& ens, const std::vector<Eigen::VectorXd>& inputs,
                   const std::vector<Eigen::VectorXd>& x0) {
    if (ens.mode == TimeMode::Continuous && !ens.zoh_step)
        throw ModelError("rollout: continuous ensembles must go through discretize_zoh first");
    const int n = ens.n();
    const int m = ens.m();
    for (const auto& u : inputs)
        if (u.size() != m) throw ModelError("rollout: input dimension mismatch");
    if (!x0.empty() && x0.size() != 1 && x0.size() != ens.size())
        throw ModelError("rollout: x0 must be empty, shared, or per-grid-point");
    for (const auto& v : x0)
        if (v.size() != n) throw ModelError("rollout: x0 dimension mismatch");

    Trajectory traj;
    traj.horizon = static_cast<int>(inputs.size());
    traj.states.resize(ens.size());
    traj.final_states.resize(ens.size());

    for (std::size_t p = 0; p < ens.size(); ++p) {
        Eigen::VectorXd x = x0.empty() ? Eigen::VectorXd::Zero(n)
                                       : (x0.size() == 1 ? x0[0] : x0[p]);
        auto& seq = traj.states[p];
        seq.reserve(inputs.size() + 1);
        seq.push_back(x);
        for (const auto& u : inputs) {
            x = ens.A[p] * x + ens.B[p] * u;
            seq.push_back(x);
        }
        traj.final_states[p] = x;
    }
    return traj;
}

ErrorReport sup_error(const Trajectory& traj, const TargetProfile& target,
                      const ParametricSystem& system, const SampledEnsemble& ens,
                      const std::vector<Eigen::VectorXd>& inputs,
                      const std::vector<Eigen::VectorXd>& x0, int revalidation_factor) {
    if (traj.final_states.size() != ens.size())
        throw ModelError("sup_error: trajectory/ensemble size mismatch");

    ErrorReport rep;
    rep.per_point.reserve(ens.size());
    std::size_t arg = 0;
    for (std::size_t p = 0; p < ens.size(); ++p) {
        const Eigen::VectorXd want = target.at(ens.grid, p);
        if (want.size() != traj.final_states[p].size())
            throw ModelError("sup_error: target dimension mismatch");
        double e = (traj.final_states[p] - want).norm();
        rep.per_point.push_back(e);
        if (e >= rep.sup_fit) {
            rep.sup_fit = e;
            arg = p;
        }
    }
    rep.argmax_theta = ens.grid.points[arg];

    // revalidation needs a finer ensemble: expression targets and a shared
    // (or zero) initial state only; tabulated data has no off-grid meaning
    if (revalidation_factor > 1 && !target.is_tabulated() && x0.size() <= 1) {
        ParamGrid fine = make_grid(system.domain,
                                   refined_count(ens.grid.per_axis_count, revalidation_factor));
        SampledEnsemble fens = sample_ensemble(system, fine);
        if (system.mode == TimeMode::Continuous) {
            if (!ens.zoh_step)
                throw ModelError("sup_error: continuous revalidation needs the ZOH step");
            fens = discretize_zoh(fens, *ens.zoh_step);
        }
        Trajectory ftraj = rollout(fens, inputs, x0);
        rep.revalidated = true;
        rep.revalidation_factor = revalidation_factor;
        std::size_t farg = 0;
        for (std::size_t p = 0; p < fens.size(); ++p) {
            double e = (ftraj.final_states[p] - target.at(fine, p)).norm();
            if (e >= rep.sup_revalidation) {
                rep.sup_revalidation = e;
                farg = p;
            }
        }
        rep.argmax_theta_revalidation = fine.points[farg];
    }
    return rep;
}

}  // namespace ensctl
