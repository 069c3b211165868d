#include "doctest.h"

#include <random>

#include "ensctl/simulation.hpp"
#include "ensctl/synthesis.hpp"
#include "support/test_helpers.hpp"

using namespace ensctl;
using namespace ensctl::testing;

TEST_CASE("rollout basics") {
    auto ens = make_ensemble_1d(linspace(1.0, 2.0, 5),
                                [](double th) { return (th * oscillator()).eval(); },
                                [](double) { return Eigen::MatrixXd::Identity(2, 2); });

    // zero input from the origin stays at the origin
    std::vector<Eigen::VectorXd> zeros(4, Eigen::VectorXd::Zero(2));
    Trajectory t0 = rollout(ens, zeros);
    for (const auto& x : t0.final_states) CHECK(x.norm() == 0.0);

    // dimension mismatches are refused
    std::vector<Eigen::VectorXd> bad(2, Eigen::VectorXd::Zero(3));
    CHECK_THROWS_AS(rollout(ens, bad), ModelError);
    CHECK_THROWS_AS(rollout(ens, zeros, {Eigen::VectorXd::Zero(5)}), ModelError);
}

TEST_CASE("rollout reproduces the polynomial reachability map") {
    std::mt19937 rng(11);
    auto ens = make_ensemble_1d(linspace(0.5, 1.5, 9),
                                [&](double th) {
                                    Eigen::MatrixXd M(2, 2);
                                    M << th, 1.0, 0.0, 0.5 * th;
                                    return M;
                                },
                                [](double) {
                                    Eigen::MatrixXd b(2, 1);
                                    b << 1.0, 1.0;
                                    return b;
                                });
    PolynomialControl ctrl;
    ctrl.coeffs = {Eigen::Vector4d(0.3, -0.7, 0.2, 1.1)};
    ctrl.horizon = 4;
    Trajectory traj = rollout(ens, control_to_inputs(ctrl));
    for (std::size_t p = 0; p < ens.size(); ++p) {
        Eigen::VectorXd want = Eigen::VectorXd::Zero(2);
        Eigen::VectorXd v = ens.B[p].col(0);
        for (int k = 0; k <= 3; ++k) {
            want += ctrl.coeffs[0][k] * v;
            v = ens.A[p] * v;
        }
        CHECK((traj.final_states[p] - want).norm() <=
              1e-10 * std::max(1.0, want.norm()));
    }
}

TEST_CASE("continuous-ZOH free response matches the matrix exponential") {
    auto cont = make_ensemble_1d(linspace(1.0, 2.0, 7),
                                 [](double th) { return (th * oscillator()).eval(); },
                                 [](double) {
                                     Eigen::MatrixXd b(2, 1);
                                     b << 1.0, 0.0;
                                     return b;
                                 },
                                 TimeMode::Continuous);
    const double h = 0.1;
    SampledEnsemble disc = discretize_zoh(cont, h);
    const int K = 10;
    Eigen::VectorXd x0(2);
    x0 << 0.7, -0.3;
    std::vector<Eigen::VectorXd> zeros(K, Eigen::VectorXd::Zero(1));
    Trajectory traj = rollout(disc, zeros, {x0});
    for (std::size_t p = 0; p < cont.size(); ++p) {
        Eigen::VectorXd want = matrix_exponential(K * h * cont.A[p]) * x0;
        CHECK((traj.final_states[p] - want).norm() <= 1e-10);
    }
}

TEST_CASE("rollout is linear in the input for x0 = 0") {
    std::mt19937 rng(13);
    auto ens = make_ensemble_1d(linspace(0.0, 1.0, 6),
                                [&](double th) {
                                    Eigen::MatrixXd M(3, 3);
                                    M << 0.2, th, 0.0, -th, 0.1, 1.0, 0.0, 0.3, -0.2;
                                    return M;
                                },
                                [](double) { return Eigen::MatrixXd::Identity(3, 3).leftCols(2); });
    const int T = 6;
    std::vector<Eigen::VectorXd> u, v, uv;
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int t = 0; t < T; ++t) {
        Eigen::VectorXd a(2), b(2);
        a << dist(rng), dist(rng);
        b << dist(rng), dist(rng);
        u.push_back(a);
        v.push_back(b);
        uv.push_back(a + b);
    }
    Trajectory tu = rollout(ens, u), tv = rollout(ens, v), tuv = rollout(ens, uv);
    for (std::size_t p = 0; p < ens.size(); ++p) {
        Eigen::VectorXd sum = tu.final_states[p] + tv.final_states[p];
        CHECK((tuv.final_states[p] - sum).norm() <= 1e-12 * std::max(1.0, sum.norm()));
    }
}

TEST_CASE("free response over 2T equals two chained rollouts over T") {
    auto ens = make_ensemble_1d(linspace(0.5, 1.0, 5),
                                [](double th) {
                                    Eigen::MatrixXd M(2, 2);
                                    M << 0.9, th, 0.0, 0.8;
                                    return M;
                                },
                                [](double) { return Eigen::MatrixXd::Ones(2, 1); });
    const int T = 7;
    Eigen::VectorXd x0(2);
    x0 << 1.0, -2.0;
    std::vector<Eigen::VectorXd> zeros(T, Eigen::VectorXd::Zero(1));
    std::vector<Eigen::VectorXd> zeros2(2 * T, Eigen::VectorXd::Zero(1));
    Trajectory once = rollout(ens, zeros2, {x0});
    Trajectory half = rollout(ens, zeros, {x0});
    Trajectory chained = rollout(ens, zeros, half.final_states);
    for (std::size_t p = 0; p < ens.size(); ++p)
        CHECK((once.final_states[p] - chained.final_states[p]).norm() <= 1e-12);
}

TEST_CASE("sup_error basics") {
    ParametricSystem sys = load_model(R"({
        "system": {"n": 2, "m": 1, "mode": "discrete"},
        "domain": {"intervals": [[0, 1]]},
        "A": [["0.5", "0"], ["0", "0.5"]],
        "B": [["1"], ["1"]]})");
    ParamGrid grid = make_grid(sys.domain, 3);
    SampledEnsemble ens = sample_ensemble(sys, grid);

    std::vector<Eigen::VectorXd> u(1, Eigen::VectorXd::Ones(1));
    Trajectory traj = rollout(ens, u);  // final = (1,1) everywhere

    TargetProfile exact = TargetProfile::expressions({parse_expr("1", 1), parse_expr("1", 1)});
    ErrorReport r0 = sup_error(traj, exact, sys, ens, u, {}, 0);
    CHECK(r0.sup_fit == 0.0);

    // single grid point off by (0.3, 0.4): sup error 0.5
    std::vector<Eigen::VectorXd> pts(3, Eigen::VectorXd::Ones(2));
    pts[1] = Eigen::Vector2d(1.3, 1.4);
    TargetProfile off = TargetProfile::table(pts);
    ErrorReport r1 = sup_error(traj, off, sys, ens, u, {}, 0);
    CHECK(r1.sup_fit == doctest::Approx(0.5));
    CHECK(r1.argmax_theta[0] == doctest::Approx(0.5));
    CHECK_FALSE(r1.revalidated);  // tabulated targets have no off-grid meaning

    ErrorReport r2 = sup_error(traj, exact, sys, ens, u, {}, 4);
    CHECK(r2.revalidated);
    CHECK(r2.sup_revalidation >= 0.0);
}
