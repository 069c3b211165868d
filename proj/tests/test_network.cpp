#include "doctest.h"

#include <Eigen/Eigenvalues>
#include <complex>
#include <random>

#include "ensctl/assignment.hpp"
#include "ensctl/network.hpp"
#include "support/test_helpers.hpp"

using namespace ensctl;
using namespace ensctl::testing;

namespace {

NetworkSpec oscillator_ring(int N, RingVariant variant, double lo, double hi,
                            TimeMode mode = TimeMode::Continuous) {
    NetworkSpec spec;
    spec.N = N;
    spec.node_A = {{Expr::constant(0.0), Expr::constant(-1.0)},
                   {Expr::constant(1.0), Expr::constant(0.0)}};
    spec.node_b = {Expr::constant(1.0), Expr::constant(0.0)};
    spec.node_c = {Expr::constant(0.0), Expr::constant(1.0)};
    spec.ring = variant;
    spec.ring_weight = parse_expr("theta", 1);
    spec.domain = ParameterDomain::from_intervals({{lo, hi}});
    spec.mode = mode;
    return spec;
}

// multiset distance via optimal assignment
double multiset_distance(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
    const int n = static_cast<int>(a.size());
    Eigen::MatrixXd cost(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) cost(i, j) = std::abs(a[i] - b[j]);
    auto perm = min_cost_assignment(cost);
    double worst = 0.0;
    for (int i = 0; i < n; ++i) worst = std::max(worst, cost(i, perm[i]));
    return worst;
}

}  // namespace

TEST_CASE("assemble: oscillator ring of five") {
    NetworkSpec spec = oscillator_ring(5, RingVariant::Directed, 2.0, 3.0);
    ParametricSystem sys = assemble(spec);
    CHECK(sys.n == 10);
    CHECK(sys.m == 1);
    ParamGrid grid = make_grid(spec.domain, 3);
    SampledEnsemble ens = sample_ensemble(sys, grid);
    // input column is e1 (x) (1,0)
    Eigen::VectorXd want = Eigen::VectorXd::Zero(10);
    want[0] = 1.0;
    CHECK((ens.B[0].col(0) - want).norm() == 0.0);
    // coupling block (0,1) is theta * b c
    CHECK(ens.A[1](0, 3) == doctest::Approx(2.5));  // theta * (bc)(0,1) at theta=2.5
    CHECK(ens.A[1](0, 1) == doctest::Approx(-1.0));
}

TEST_CASE("assemble: N = 1 returns the node system with input b") {
    NetworkSpec spec = oscillator_ring(1, RingVariant::Directed, 0.2, 0.8);
    ParametricSystem sys = assemble(spec);
    CHECK(sys.n == 2);
    ParamGrid grid = make_grid(spec.domain, 3);
    SampledEnsemble ens = sample_ensemble(sys, grid);
    // A + theta * bc with the self-loop convention
    Eigen::MatrixXd want = oscillator();
    want(0, 1) += 0.2;  // theta * b c adds to entry (0,1)
    CHECK((ens.A[0] - want).norm() <= 1e-15);
    CHECK((ens.B[0].col(0) - Eigen::Vector2d(1.0, 0.0)).norm() == 0.0);
}

TEST_CASE("assemble: zero adjacency leaves decoupled nodes") {
    NetworkSpec spec = oscillator_ring(3, RingVariant::Directed, 1.0, 2.0);
    spec.ring.reset();
    spec.adjacency.assign(3, std::vector<Expr>(3, Expr::constant(0.0)));
    ParametricSystem sys = assemble(spec);
    ParamGrid grid = make_grid(spec.domain, 2);
    SampledEnsemble ens = sample_ensemble(sys, grid);
    Eigen::MatrixXd blockdiag = Eigen::MatrixXd::Zero(6, 6);
    for (int i = 0; i < 3; ++i) blockdiag.block(2 * i, 2 * i, 2, 2) = oscillator();
    CHECK((ens.A[0] - blockdiag).norm() == 0.0);
}

TEST_CASE("circulant_spectrum closed forms") {
    auto dir4 = circulant_spectrum(4, 1.0, RingVariant::Directed);
    CHECK(std::abs(dir4[0] - std::complex<double>(1, 0)) <= 1e-15);
    CHECK(std::abs(dir4[1] - std::complex<double>(0, 1)) <= 1e-15);
    CHECK(std::abs(dir4[2] - std::complex<double>(-1, 0)) <= 1e-15);
    CHECK(std::abs(dir4[3] - std::complex<double>(0, -1)) <= 1e-15);

    auto sym4 = circulant_spectrum(4, 1.0, RingVariant::Symmetric);
    CHECK(sym4[0].real() == doctest::Approx(2.0));
    CHECK(std::abs(sym4[1]) <= 1e-15);  // the zero at l = 1
    CHECK(sym4[2].real() == doctest::Approx(-2.0));
    CHECK(std::abs(sym4[3]) <= 1e-15);  // and at l = 3

    auto one = circulant_spectrum(1, 0.7, RingVariant::Directed);
    CHECK(one[0].real() == doctest::Approx(0.7));
}

TEST_CASE("circulant_spectrum matches a dense eigensolve of the adjacency") {
    for (RingVariant variant : {RingVariant::Directed, RingVariant::Symmetric}) {
        for (int N : {2, 3, 5, 8, 17, 64}) {
            NetworkSpec spec = oscillator_ring(N, variant, 1.3, 1.3);
            auto K = spec.adjacency_exprs();
            Eigen::MatrixXd Kmat(N, N);
            std::vector<double> th{1.3};
            for (int i = 0; i < N; ++i)
                for (int j = 0; j < N; ++j)
                    Kmat(i, j) = K[i][j].eval({th.data(), th.size()});
            Eigen::EigenSolver<Eigen::MatrixXd> es(Kmat);
            auto formula = circulant_spectrum(N, 1.3, variant);
            Eigen::VectorXcd f(N);
            for (int l = 0; l < N; ++l) f[l] = formula[l];
            CHECK(multiset_distance(es.eigenvalues(), f) <= 1e-10);
        }
    }
}

TEST_CASE("decouple: directed ring diagonalizes exactly in block order") {
    NetworkSpec spec = oscillator_ring(5, RingVariant::Directed, 2.0, 3.0);
    ParamGrid grid = make_grid(spec.domain, 21);
    DecoupledNetwork dec = decouple(spec, grid);
    CHECK(dec.max_residual <= 1e-10);

    // S * 1 = N e1, so the broadcast e1 transforms to the all-ones weights
    for (int l = 0; l < 5; ++l)
        CHECK(std::abs(dec.transformed_broadcast[l] - std::complex<double>(1, 0)) <= 1e-12);

    // block eigenvalues solve w^2 = theta e^{2 pi i l / 5} - 1
    for (int l = 0; l < 5; ++l)
        for (std::size_t p = 0; p < grid.size(); ++p) {
            Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(dec.blocks[l][p], false);
            const double theta = grid.points[p][0];
            const std::complex<double> want =
                theta * std::polar(1.0, 2.0 * M_PI * l / 5.0) - 1.0;
            for (int k = 0; k < 2; ++k)
                CHECK(std::abs(es.eigenvalues()[k] * es.eigenvalues()[k] - want) <= 1e-8);
        }
}

TEST_CASE("decouple rejects repeated adjacency eigenvalues (symmetric N=4)") {
    NetworkSpec spec = oscillator_ring(4, RingVariant::Symmetric, 2.0, 3.0);
    ParamGrid grid = make_grid(spec.domain, 5);
    CHECK_THROWS_WITH_AS(decouple(spec, grid), doctest::Contains("repeated"), ModelError);
}

TEST_CASE("decouple handles constant adjacencies via eigenvectors") {
    NetworkSpec spec = oscillator_ring(3, RingVariant::Directed, 1.0, 2.0);
    spec.ring.reset();
    spec.adjacency.assign(3, std::vector<Expr>(3, Expr::constant(0.0)));
    spec.adjacency[0][1] = Expr::constant(1.0);
    spec.adjacency[1][2] = Expr::constant(2.0);
    spec.adjacency[2][0] = Expr::constant(3.0);
    ParamGrid grid = make_grid(spec.domain, 3);
    DecoupledNetwork dec = decouple(spec, grid);
    CHECK(dec.max_residual <= 1e-10);
}

TEST_CASE("assembled spectrum equals the union of block spectra") {
    NetworkSpec spec = oscillator_ring(5, RingVariant::Directed, 2.0, 3.0);
    ParametricSystem sys = assemble(spec);
    ParamGrid grid = make_grid(spec.domain, 21);
    SampledEnsemble ens = sample_ensemble(sys, grid);
    DecoupledNetwork dec = decouple(spec, grid);
    for (std::size_t p = 0; p < grid.size(); ++p) {
        Eigen::EigenSolver<Eigen::MatrixXd> es(ens.A[p]);
        Eigen::VectorXcd blocks(10);
        int at = 0;
        for (int l = 0; l < 5; ++l) {
            Eigen::ComplexEigenSolver<Eigen::MatrixXcd> bes(dec.blocks[l][p], false);
            for (int k = 0; k < 2; ++k) blocks[at++] = bes.eigenvalues()[k];
        }
        CHECK(multiset_distance(es.eigenvalues(), blocks) <= 1e-8);
    }
}

TEST_CASE("block characteristic polynomial is affine in the coupling gain") {
    std::mt19937 rng(31);
    const int n = 3;
    Eigen::MatrixXd A = random_matrix(rng, n, n);
    Eigen::VectorXd b = random_matrix(rng, n, 1);
    Eigen::RowVectorXd c = random_matrix(rng, 1, n);

    auto char_coeffs = [n](const Eigen::MatrixXd& M) {
        // Faddeev-LeVerrier, monic z^n + c_{n-1} z^{n-1} + ... + c_0
        Eigen::VectorXd out(n);
        Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
        double a = 1.0;
        for (int k = 1; k <= n; ++k) {
            P = M * P + a * Eigen::MatrixXd::Identity(n, n);
            a = -(M * P).trace() / k;
            out[n - k] = a;
        }
        return out;
    };

    const double l0 = -1.3, l1 = 0.4, l2 = 2.9;
    Eigen::VectorXd c0 = char_coeffs(A + l0 * b * c);
    Eigen::VectorXd c1 = char_coeffs(A + l1 * b * c);
    Eigen::VectorXd c2 = char_coeffs(A + l2 * b * c);
    const double r = (l2 - l0) / (l1 - l0);
    CHECK(((c2 - c0) - r * (c1 - c0)).norm() <= 1e-9 * std::max(1.0, c2.norm()));
}

TEST_CASE("check_robust_sync: directed ring on [2,3] is certified") {
    NetworkSpec spec = oscillator_ring(5, RingVariant::Directed, 2.0, 3.0);
    ParamGrid grid = make_grid(spec.domain, 101);
    RobustSyncReport rep = check_robust_sync(spec, grid);
    CHECK(rep.adjacency_spectrum.passed());
    CHECK(rep.base.main_i.passed());
    CHECK(rep.base.main_ii.passed());
    CHECK(rep.base.main_iii.passed());
    CHECK(rep.base.main_iv.passed());
    CHECK(rep.block_simple.passed());
    CHECK(rep.cross_disjoint.passed());
    CHECK(rep.overall == Classification::CertifiedSufficient);
}

TEST_CASE("check_robust_sync: symmetric N=4 ring is refuted with eigenvalue 0") {
    NetworkSpec spec = oscillator_ring(4, RingVariant::Symmetric, 2.0, 3.0);
    ParamGrid grid = make_grid(spec.domain, 51);
    RobustSyncReport rep = check_robust_sync(spec, grid);
    CHECK(rep.overall == Classification::NecessaryViolated);
    REQUIRE(rep.adjacency_spectrum.failed());
    bool found_zero = false;
    for (const auto& w : rep.adjacency_spectrum.witnesses)
        if (std::abs(w.value) <= 1e-9 && w.thetas.size() >= 2) found_zero = true;
    CHECK(found_zero);
    CHECK(rep.base.e2.failed());  // the assembled system shares +-i across theta
}

TEST_CASE("check_robust_sync: interval through theta=1 breaks simplicity there") {
    NetworkSpec spec = oscillator_ring(5, RingVariant::Directed, 0.5, 2.0);
    ParamGrid grid = make_grid(spec.domain, 151);  // grid step 0.01 hits theta=1
    RobustSyncReport rep = check_robust_sync(spec, grid);
    CHECK(rep.base.main_iv.failed());
    REQUIRE_FALSE(rep.base.main_iv.witnesses.empty());
    CHECK(rep.base.main_iv.witnesses[0].thetas[0][0] == doctest::Approx(1.0));
    CHECK(rep.block_simple.failed());
    CHECK(rep.overall == Classification::Inconclusive);
}

TEST_CASE("sync_synthesize: equilibrium costs nothing") {
    NetworkSpec spec = oscillator_ring(3, RingVariant::Directed, 2.0, 3.0);
    TargetProfile x_star = TargetProfile::expressions({parse_expr("0", 1), parse_expr("0", 1)});
    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(6);
    SynthesisConfig cfg;
    cfg.eps = 1e-9;
    cfg.grid_count = 21;
    SyncResult res = sync_synthesize(spec, x_star, x0, 0.5, cfg);
    CHECK(res.converged);
    CHECK(res.control.degree() == 0);
    CHECK(res.control.coeffs[0][0] == 0.0);
    CHECK(res.error.sup_fit == 0.0);
}

TEST_CASE("sync_synthesize: N = 1 degenerates to single-system synthesis") {
    NetworkSpec spec = oscillator_ring(1, RingVariant::Directed, 0.2, 0.8,
                                       TimeMode::Discrete);
    TargetProfile x_star = TargetProfile::expressions({parse_expr("1", 1), parse_expr("0", 1)});
    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(2);
    SynthesisConfig cfg;
    cfg.eps = 1e-10;
    cfg.grid_count = 31;
    SyncResult res = sync_synthesize(spec, x_star, x0, std::nullopt, cfg);
    CHECK(res.converged);
    CHECK(res.control.degree() == 0);  // target equals b: one step suffices
    CHECK(res.error.sup_fit <= 1e-10);
}

TEST_CASE("sync_synthesize: discrete ring steering from the origin (regression)") {
    NetworkSpec spec = oscillator_ring(5, RingVariant::Directed, 2.0, 3.0,
                                       TimeMode::Discrete);
    TargetProfile x_star = TargetProfile::expressions({parse_expr("1", 1), parse_expr("0", 1)});
    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(10);
    SynthesisConfig cfg;
    cfg.eps = 1e-2;
    cfg.max_degree = 90;
    cfg.degree_step = 5;  // coarse walk, fine enough for the regression
    SyncResult res = sync_synthesize(spec, x_star, x0, std::nullopt, cfg);
    CHECK(res.converged);
    CHECK(res.error.sup_fit < 1e-2);
    CHECK(res.control.degree() <= 85);
    // reported error is the rollout's own sup: self-consistency
    ParametricSystem sys = assemble(spec);
    ParamGrid grid = make_grid(spec.domain, default_grid_count(spec.domain));
    SampledEnsemble ens = sample_ensemble(sys, grid);
    Trajectory traj = rollout(ens, control_to_inputs(res.control), {x0});
    double sup = 0.0;
    for (std::size_t p = 0; p < grid.size(); ++p) {
        Eigen::VectorXd want(10);
        for (int i = 0; i < 5; ++i) want.segment(2 * i, 2) = Eigen::Vector2d(1.0, 0.0);
        sup = std::max(sup, (traj.final_states[p] - want).norm());
    }
    CHECK(res.error.sup_fit == doctest::Approx(sup).epsilon(1e-12));
}

TEST_CASE("ring model document round-trips through the loaders") {
    NetworkSpec spec = oscillator_ring(5, RingVariant::Directed, 2.0, 3.0);
    std::string doc = ring_model_document(spec);
    ParametricSystem sys = load_model(doc);
    CHECK(sys.n == 10);
    CHECK(sys.m == 1);
    CHECK(model_has_network(doc));
    auto loaded = load_network_spec(doc);
    REQUIRE(loaded.has_value());
    CHECK(loaded->N == 5);
    CHECK(loaded->ring.has_value());

    // the emitted assembled system samples identically to a fresh assembly
    ParamGrid grid = make_grid(sys.domain, 5);
    SampledEnsemble from_doc = sample_ensemble(sys, grid);
    SampledEnsemble fresh = sample_ensemble(assemble(spec), grid);
    for (std::size_t p = 0; p < grid.size(); ++p) {
        CHECK((from_doc.A[p] - fresh.A[p]).norm() == 0.0);
        CHECK((from_doc.B[p] - fresh.B[p]).norm() == 0.0);
    }
}
