#pragma once

#include <Eigen/Dense>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "ensctl/model.hpp"

namespace ensctl {

/// Every tolerance that can affect a verdict. Defaults leave ~two orders of
/// headroom over double-precision eigensolver backward error at desk scale.
struct Tolerances {
    double rank_tol = 1e-10;      // relative singular-value threshold
    double tol_spec_base = 1e-8;  // eigenvalue matching: base * (1 + max|lambda|)
    double coeff_tol = 1e-8;      // characteristic-coefficient constancy (absolute)
    double cond_max = 1e6;        // Remark-2 eigenvector condition bound
    double line_tol = 1e-6;       // dimension-gate line-fit distance
};

struct KalmanResult {
    int rank = 0;
    Eigen::VectorXd singular_values;
};

/// Numerical rank of [B, AB, ..., A^{n-1}B] plus the singular values for auditing.
KalmanResult kalman_rank(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double rank_tol);

/// Hermite indices (K_1,...,K_m): greedy left-to-right column selection from
/// the channel-permuted Kalman matrix; selection within a block is contiguous.
std::vector<int> hermite_indices(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                 double rank_tol);

/// Eigenvalues of A(theta_i) per grid point plus eigenvector conditioning and,
/// for d=1, a nearest-continuation branch labeling across adjacent points.
struct SpectrumCloud {
    std::vector<Eigen::VectorXcd> eigenvalues;  // per point, n values
    std::vector<double> eigvec_condition;       // +inf when numerically defective
    std::vector<std::vector<int>> branch;       // branch b -> eigenvalue index
    bool continued_branches = false;            // true for d=1 continuation
    double max_abs = 0.0;

    std::complex<double> branch_value(int b, std::size_t point) const {
        return eigenvalues[point][branch[point][b]];
    }
};

SpectrumCloud spectrum_cloud(const SampledEnsemble& ens, double rank_tol);

struct HermiteProfile {
    std::vector<std::vector<int>> per_point;
    bool constant = false;
};

HermiteProfile hermite_profile(const SampledEnsemble& ens, double rank_tol);

enum class Verdict { Pass, Fail, Inconclusive, NotApplicable };
const char* to_string(Verdict v);

struct Witness {
    std::string kind;                       // e.g. "shared-eigenvalue", "rank-defect"
    std::complex<double> value{0.0, 0.0};   // eigenvalue / cluster center when relevant
    double scalar = 0.0;                    // rank, gap, residual, count...
    std::vector<Eigen::VectorXd> thetas;    // offending parameter points
    std::string note;
};

struct CheckOutcome {
    Verdict verdict = Verdict::NotApplicable;
    std::string summary;
    std::vector<Witness> witnesses;

    bool passed() const { return verdict == Verdict::Pass; }
    bool failed() const { return verdict == Verdict::Fail; }
};

struct NecessaryOutcome {
    CheckOutcome e1;  // pointwise reachability
    CheckOutcome e2;  // no eigenvalue shared by >= m+1 distinct grid points
};

NecessaryOutcome check_necessary(const SampledEnsemble& ens, const SpectrumCloud& cloud,
                                 double tol_spec, double rank_tol);

struct MainOutcome {
    CheckOutcome i, ii, iii, iv;
    CheckOutcome remark2;  // informational alternate for (iv)
    bool certified() const {
        return i.passed() && ii.passed() && iii.passed() && iv.passed();
    }
};

MainOutcome check_main(const SampledEnsemble& ens, const SpectrumCloud& cloud,
                       const HermiteProfile& hermite, double tol_spec, double cond_max,
                       double rank_tol);

/// Constant-characteristic-coefficient test: coefficients of z^1..z^{n-1}
/// constant across the grid while a_0(theta) may vary.
CheckOutcome check_const_char_poly(const SampledEnsemble& ens, double coeff_tol);

/// Scaling families (theta*A, B), constant A and B. Exact iff when 0 is in P;
/// necessary + sufficient split when it is not.
CheckOutcome check_scaling_family(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                  const ParameterDomain& domain, double rank_tol,
                                  double tol_spec_base);

/// Dimension gate: d >= 3 refutes; d = 2 refutes when an eigenvalue branch
/// hugs a line through the origin (or the real axis); d = 1 passes vacuously.
CheckOutcome dimension_gate(const ParameterDomain& domain, const SpectrumCloud& cloud,
                            double line_tol);

struct ScalingFamily {
    Eigen::MatrixXd A0;
    Eigen::MatrixXd B0;
};

/// Detect the (theta*A0, B0) structure from samples (d=1 only).
std::optional<ScalingFamily> detect_scaling_family(const SampledEnsemble& ens);

enum class Classification { CertifiedSufficient, NecessaryViolated, Inconclusive };
const char* to_string(Classification c);

struct DiagnosticsReport {
    CheckOutcome e1, e2;
    CheckOutcome main_i, main_ii, main_iii, main_iv;
    CheckOutcome remark2;
    CheckOutcome const_char_poly;
    CheckOutcome scaling_family;
    CheckOutcome dim_gate;
    Classification overall = Classification::Inconclusive;

    Tolerances tolerances;
    double tol_spec = 0.0;  // resolved absolute eigenvalue-matching tolerance
    double max_eigvec_condition = 0.0;
    bool scaling_detected = false;

    // informational spectrum dump (connectedness is not certified; see README)
    std::vector<Eigen::VectorXcd> spectrum_points;
};

/// Full diagnostic pass: necessary conditions, MAIN (i)-(iv) with the Remark-2
/// alternate, constant-coefficient and scaling-family special classes, and the
/// dimension gate, aggregated into an overall classification.
DiagnosticsReport run_diagnostics(const ParametricSystem& system, const SampledEnsemble& ens,
                                  const Tolerances& tol = {});

}  // namespace ensctl
