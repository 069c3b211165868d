#include "doctest.h"

#include <cmath>
#include <random>

#include "ensctl/simulation.hpp"
#include "ensctl/synthesis.hpp"
#include "support/remez_oracle.hpp"
#include "support/test_helpers.hpp"

using namespace ensctl;
using namespace ensctl::testing;

namespace {

SampledEnsemble scalar_ensemble(double a, double b, int count) {
    return make_ensemble_1d(linspace(a, b, count),
                            [](double th) { return Eigen::MatrixXd::Constant(1, 1, th); },
                            [](double) { return Eigen::MatrixXd::Ones(1, 1); });
}

// frozen before the build from the dense-grid exchange oracle (200001 points)
constexpr double kMinimax1OverTheta[4] = {4.786451314499052e-02, 3.436517428224595e-03,
                                          1.771447804321813e-05, 4.707046974417040e-10};

}  // namespace

TEST_CASE("target equal to b needs degree zero") {
    auto ens = make_ensemble_1d(linspace(1.0, 2.0, 11),
                                [](double th) { return (th * oscillator()).eval(); },
                                [](double th) {
                                    Eigen::MatrixXd b(2, 1);
                                    b << th, 1.0;
                                    return b;
                                });
    TargetProfile target =
        TargetProfile::expressions({parse_expr("theta", 1), parse_expr("1", 1)});
    SynthesisConfig cfg;
    cfg.eps = 1e-10;
    SynthesisResult res = synthesize(ens, target, cfg);
    CHECK(res.converged);
    CHECK(res.control.degree() == 0);
    CHECK(res.control.coeffs[0][0] == doctest::Approx(1.0));
    CHECK(res.control.achieved_error <= 1e-12);
}

TEST_CASE("scalar 1/theta fit tracks the exchange-oracle minimax") {
    auto ens = scalar_ensemble(0.5, 1.5, 101);
    TargetProfile target = TargetProfile::expressions({parse_expr("1/theta", 1)});
    const int degrees[3] = {2, 4, 8};
    double prev = 1e300;
    for (int i = 0; i < 3; ++i) {
        RemezResult oracle = remez_minimax([](double x) { return 1.0 / x; }, 0.5, 1.5,
                                           degrees[i]);
        // oracle values were frozen before the build; the live run must agree
        CHECK(oracle.minimax_error ==
              doctest::Approx(kMinimax1OverTheta[i]).epsilon(1e-6));

        SynthesisConfig cfg;
        cfg.eps = 1e-16;  // unreachable: force best-at-degree
        cfg.degree_start = degrees[i];
        cfg.max_degree = degrees[i];
        cfg.lawson_iters = 400;
        SynthesisResult res = synthesize(ens, target, cfg);
        CHECK(res.control.achieved_error <= 1.10 * kMinimax1OverTheta[i]);
        CHECK(res.control.achieved_error >= 0.90 * kMinimax1OverTheta[i]);
        CHECK(res.control.achieved_error <= prev + 1e-12);  // nonincreasing
        prev = res.control.achieved_error;
    }
}

TEST_CASE("degree schedule stops at the first eps-beating degree") {
    auto ens = scalar_ensemble(0.5, 1.5, 101);
    TargetProfile target = TargetProfile::expressions({parse_expr("1/theta", 1)});
    SynthesisConfig cfg;
    cfg.eps = 1e-3;
    SynthesisResult res = synthesize(ens, target, cfg);
    CHECK(res.converged);
    CHECK(res.control.achieved_error < 1e-3);
    CHECK(res.control.horizon <= 31);  // regression: the polish lands at T = 6
    CHECK(res.control.horizon == 6);
}

TEST_CASE("achieved_error is nonincreasing along one schedule") {
    auto ens = scalar_ensemble(0.5, 1.5, 51);
    TargetProfile target = TargetProfile::expressions({parse_expr("1/theta", 1)});
    double prev = 1e300;
    for (int maxd : {2, 4, 6, 10}) {
        SynthesisConfig cfg;
        cfg.eps = 1e-14;
        cfg.max_degree = maxd;
        SynthesisResult res = synthesize(ens, target, cfg);
        CHECK(res.control.achieved_error <= prev + 1e-12);
        prev = res.control.achieved_error;
    }
}

TEST_CASE("reported error matches an independent residual recomputation") {
    auto ens = scalar_ensemble(0.5, 1.5, 51);
    TargetProfile target = TargetProfile::expressions({parse_expr("1/theta", 1)});
    SynthesisConfig cfg;
    cfg.eps = 1e-16;
    cfg.degree_start = 6;
    cfg.max_degree = 6;
    SynthesisResult res = synthesize(ens, target, cfg);
    double sup = 0.0;
    for (std::size_t p = 0; p < ens.size(); ++p) {
        double acc = 0.0, pw = 1.0;
        const double th = ens.grid.points[p][0];
        for (int k = 0; k <= res.control.degree(); ++k) {
            acc += res.control.coeffs[0][k] * pw;
            pw *= th;
        }
        sup = std::max(sup, std::abs(acc - 1.0 / th));
    }
    CHECK(res.control.achieved_error ==
          doctest::Approx(sup).epsilon(1e-8));  // basis independence
}

TEST_CASE("scaling oscillator with identity input converges immediately") {
    auto ens = make_ensemble_1d(linspace(-1.0, 1.0, 101),
                                [](double th) { return (th * oscillator()).eval(); },
                                [](double) { return Eigen::MatrixXd::Identity(2, 2); });
    TargetProfile target = TargetProfile::expressions({parse_expr("1", 1), parse_expr("1", 1)});
    SynthesisConfig cfg;
    cfg.eps = 1e-2;
    cfg.max_degree = 40;
    SynthesisResult res = synthesize(ens, target, cfg);
    CHECK(res.converged);
    CHECK(res.control.degree() == 0);  // frozen: u = (1,1) reaches it in one step
    CHECK(res.control.achieved_error <= 1e-12);
}

TEST_CASE("control_to_inputs reverses coefficients") {
    PolynomialControl c1;
    c1.coeffs = {Eigen::VectorXd::Ones(1)};
    c1.horizon = 1;
    auto u1 = control_to_inputs(c1);
    REQUIRE(u1.size() == 1);
    CHECK(u1[0][0] == 1.0);

    PolynomialControl cz;
    cz.coeffs = {Eigen::Vector2d(0.0, 1.0)};  // p(z) = z
    cz.horizon = 2;
    auto uz = control_to_inputs(cz);
    CHECK(uz[0][0] == 1.0);
    CHECK(uz[1][0] == 0.0);

    PolynomialControl cq;
    cq.coeffs = {Eigen::Vector3d(3.0, 0.0, 2.0)};  // p(z) = 3 + 2 z^2
    cq.horizon = 3;
    auto uq = control_to_inputs(cq);
    CHECK(uq[0][0] == 2.0);
    CHECK(uq[1][0] == 0.0);
    CHECK(uq[2][0] == 3.0);
}

TEST_CASE("rollout under the control reproduces the polynomial map") {
    std::mt19937 rng(21);
    for (int it = 0; it < 10; ++it) {
        const int n = 1 + static_cast<int>(rng() % 4);
        const int m = 1 + static_cast<int>(rng() % 2);
        auto ens = make_ensemble_1d(
            linspace(0.0, 1.0, 21),
            [&, seed = rng()](double th) {
                std::mt19937 r(seed);
                Eigen::MatrixXd M = random_matrix(r, n, n);
                M(0, 0) += th;
                return M;
            },
            [&, seed = rng()](double th) {
                std::mt19937 r(seed);
                Eigen::MatrixXd B = random_matrix(r, n, m);
                B(n - 1, 0) -= th;
                return B;
            });
        const int D = static_cast<int>(rng() % 11);
        PolynomialControl ctrl;
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        for (int j = 0; j < m; ++j) {
            Eigen::VectorXd c(D + 1);
            for (int k = 0; k <= D; ++k) c[k] = dist(rng);
            ctrl.coeffs.push_back(c);
        }
        ctrl.horizon = D + 1;
        Trajectory traj = rollout(ens, control_to_inputs(ctrl));
        for (std::size_t p = 0; p < ens.size(); ++p) {
            Eigen::VectorXd want = Eigen::VectorXd::Zero(n);
            for (int j = 0; j < m; ++j) {
                Eigen::VectorXd v = ens.B[p].col(j);
                for (int k = 0; k <= D; ++k) {
                    want += ctrl.coeffs[j][k] * v;
                    v = ens.A[p] * v;
                }
            }
            CHECK((traj.final_states[p] - want).norm() <=
                  1e-10 * std::max(1.0, want.norm()));
        }
    }
}

TEST_CASE("fine-grid audit stays within 25% for the bundled case") {
    ParametricSystem sys = load_model(R"({
        "system": {"n": 1, "m": 1, "mode": "discrete"},
        "domain": {"intervals": [[0.5, 1.5]]},
        "A": [["theta"]], "B": [["1"]]})");
    ParamGrid grid = make_grid(sys.domain, 101);
    SampledEnsemble ens = sample_ensemble(sys, grid);
    TargetProfile target = TargetProfile::expressions({parse_expr("1/theta", 1)});
    SynthesisConfig cfg;
    cfg.eps = 1e-3;
    SynthesisResult res = synthesize(ens, target, cfg);
    auto inputs = control_to_inputs(res.control);
    Trajectory traj = rollout(ens, inputs);
    ErrorReport err = sup_error(traj, target, sys, ens, inputs, {}, 4);
    REQUIRE(err.revalidated);
    CHECK(err.sup_revalidation <= 1.25 * err.sup_fit);
}

TEST_CASE("discretize_zoh") {
    // A = 0: exact pair (I, hB)
    auto zero = make_ensemble_1d(linspace(0.0, 1.0, 3),
                                 [](double) { return Eigen::MatrixXd::Zero(2, 2); },
                                 [](double th) {
                                     Eigen::MatrixXd B(2, 1);
                                     B << th, 1.0;
                                     return B;
                                 },
                                 TimeMode::Continuous);
    SampledEnsemble dz = discretize_zoh(zero, 0.25);
    CHECK((dz.A[1] - Eigen::Matrix2d::Identity()).norm() <= 1e-14);
    CHECK((dz.B[1] - 0.25 * zero.B[1]).norm() <= 1e-14);
    CHECK(dz.mode == TimeMode::Discrete);
    CHECK(dz.zoh_step == 0.25);

    // rotation generator: A_d is the rotation by h
    auto rot = make_ensemble_1d({1.0}, [](double) { return oscillator(); },
                                [](double) { return Eigen::MatrixXd::Identity(2, 2); },
                                TimeMode::Continuous);
    const double h = 0.7;
    SampledEnsemble dr = discretize_zoh(rot, h);
    Eigen::Matrix2d R;
    R << std::cos(h), -std::sin(h), std::sin(h), std::cos(h);
    CHECK((dr.A[0] - R).norm() <= 1e-13);

    // aliasing guard: oscillator family on [1,2] at h = pi
    auto fam = make_ensemble_1d(linspace(1.0, 2.0, 11),
                                [](double th) { return (th * oscillator()).eval(); },
                                [](double) { return Eigen::MatrixXd::Identity(2, 2); },
                                TimeMode::Continuous);
    CHECK_THROWS_WITH_AS(discretize_zoh(fam, M_PI), doctest::Contains("aliasing"),
                         ModelError);
    CHECK_NOTHROW(discretize_zoh(fam, 1.5));  // 2 * 1.5 < pi
}

TEST_CASE("cascade: zero coupling reproduces per-block synthesis exactly") {
    auto full = make_ensemble_1d(linspace(1.0, 2.0, 31),
                                 [](double th) {
                                     Eigen::MatrixXd M = Eigen::MatrixXd::Zero(2, 2);
                                     M(0, 0) = 0.3 * th;
                                     M(1, 1) = 0.9 * th;
                                     return M;
                                 },
                                 [](double) { return Eigen::MatrixXd::Identity(2, 2); });
    TargetProfile target =
        TargetProfile::expressions({parse_expr("1/theta", 1), parse_expr("theta", 1)});
    SynthesisConfig cfg;
    cfg.eps = 1e-6;
    CascadeResult cas = cascade_synthesize(full, {1, 1}, {1, 1}, target, cfg);
    REQUIRE(cas.converged);

    for (int blk = 0; blk < 2; ++blk) {
        SampledEnsemble bi;
        bi.grid = full.grid;
        bi.mode = full.mode;
        for (std::size_t p = 0; p < full.size(); ++p) {
            bi.A.push_back(full.A[p].block(blk, blk, 1, 1));
            bi.B.push_back(full.B[p].block(blk, blk, 1, 1));
        }
        TargetProfile bt = TargetProfile::expressions(
            {blk == 0 ? parse_expr("1/theta", 1) : parse_expr("theta", 1)});
        SynthesisResult ind = synthesize(bi, bt, cfg);
        REQUIRE(ind.control.degree() == cas.block_controls[blk].degree());
        // bitwise-equal coefficients: identical code path and inputs
        for (int k = 0; k <= ind.control.degree(); ++k)
            CHECK(ind.control.coeffs[0][k] == cas.block_controls[blk].coeffs[0][k]);
    }
}

TEST_CASE("cascade: coupled two-block system beats eps and cross-validates") {
    auto full = make_ensemble_1d(linspace(1.0, 2.0, 101),
                                 [](double th) {
                                     Eigen::MatrixXd M(2, 2);
                                     M << th, 1.0, 0.0, 2.0 * th;
                                     return M;
                                 },
                                 [](double) { return Eigen::MatrixXd::Identity(2, 2); });
    TargetProfile target = TargetProfile::expressions({parse_expr("1", 1), parse_expr("1", 1)});
    SynthesisConfig cfg;
    cfg.eps = 1e-2;
    CascadeResult cas = cascade_synthesize(full, {1, 1}, {1, 1}, target, cfg);
    CHECK(cas.converged);
    CHECK(cas.achieved_error < 1e-2);

    SynthesisResult direct = synthesize(full, target, cfg);
    CHECK(direct.converged);
    CHECK(direct.control.achieved_error < 1e-2);
}

TEST_CASE("cascade with one block equals plain synthesize") {
    auto full = scalar_ensemble(0.5, 1.5, 41);
    TargetProfile target = TargetProfile::expressions({parse_expr("1/theta", 1)});
    SynthesisConfig cfg;
    cfg.eps = 1e-4;
    CascadeResult cas = cascade_synthesize(full, {1}, {1}, target, cfg);
    SynthesisResult direct = synthesize(full, target, cfg);
    REQUIRE(cas.block_controls[0].degree() == direct.control.degree());
    for (int k = 0; k <= direct.control.degree(); ++k)
        CHECK(cas.block_controls[0].coeffs[0][k] == direct.control.coeffs[0][k]);
    CHECK(cas.achieved_error == doctest::Approx(direct.control.achieved_error).epsilon(1e-9));
}

TEST_CASE("unconverged synthesis returns the best control non-fatally") {
    auto ens = scalar_ensemble(0.5, 1.5, 41);
    TargetProfile target = TargetProfile::expressions({parse_expr("1/theta", 1)});
    SynthesisConfig cfg;
    cfg.eps = 1e-3;
    cfg.max_degree = 0;  // degree zero cannot fit a varying target
    SynthesisResult res = synthesize(ens, target, cfg);
    CHECK_FALSE(res.converged);
    CHECK(res.control.degree() == 0);
    CHECK(res.control.achieved_error > 1e-3);
}
