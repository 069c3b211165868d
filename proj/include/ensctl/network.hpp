#pragma once

#include <Eigen/Dense>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "ensctl/diagnostics.hpp"
#include "ensctl/model.hpp"
#include "ensctl/simulation.hpp"
#include "ensctl/synthesis.hpp"

namespace ensctl {

enum class RingVariant { Directed, Symmetric };

/// Ensemble of N identical (or node-parametric) SISO systems coupled through a
/// weighted adjacency and driven by one broadcast input.
struct NetworkSpec {
    int N = 1;
    std::vector<std::vector<Expr>> node_A;  // n x n
    std::vector<Expr> node_b;               // n
    std::vector<Expr> node_c;               // 1 x n
    // adjacency: circulant ring descriptor, or an explicit N x N matrix
    std::optional<RingVariant> ring;
    Expr ring_weight;                          // used when ring is set
    std::vector<std::vector<Expr>> adjacency;  // used otherwise
    Eigen::VectorXd broadcast;                 // size N; empty = e1
    ParameterDomain domain;
    TimeMode mode = TimeMode::Continuous;

    int node_dim() const { return static_cast<int>(node_A.size()); }
    void validate() const;
    /// Adjacency as expressions (ring descriptors expanded; N=1 rings are the
    /// 1x1 self-loop [w]).
    std::vector<std::vector<Expr>> adjacency_exprs() const;
};

/// Kronecker assembly I(x)A + K(theta)(x)bc with broadcast input B(x)b, done
/// at expression level so downstream sampling stays exact.
ParametricSystem assemble(const NetworkSpec& spec);

/// Closed-form circulant ring spectrum. Directed: theta e^{2 pi i l / N}.
/// Symmetric (N >= 3): 2 theta cos(2 pi l / N) — the dense-eigensolve-verified
/// factor; N = 2 is the single undirected edge with eigenvalues +-theta.
std::vector<std::complex<double>> circulant_spectrum(int N, double theta, RingVariant variant);

struct DecoupledNetwork {
    Eigen::MatrixXcd S;                      // S K(theta) S^-1 = diag(lambda_l(theta))
    std::vector<Eigen::VectorXcd> lambdas;   // per grid point, N values in block order
    std::vector<std::vector<Eigen::MatrixXcd>> blocks;  // [l][point]: A + lambda_l bc
    Eigen::VectorXcd transformed_broadcast;  // S * broadcast
    double max_residual = 0.0;               // max_p ||S K S^-1 - D||_F / ||K||_F
};

/// Simultaneous diagonalization of the adjacency family: DFT similarity for
/// circulant rings, eigenvector similarity for constant adjacencies. Refuses
/// non-diagonalizable or repeated-eigenvalue adjacencies.
DecoupledNetwork decouple(const NetworkSpec& spec, const ParamGrid& grid);

struct RobustSyncReport {
    DiagnosticsReport base;           // diagnostics of the assembled nN system
    CheckOutcome adjacency_spectrum;  // eigenvalue sharing across (theta, l)
    CheckOutcome block_simple;        // simple spectra per (theta, l)
    CheckOutcome cross_disjoint;      // block spectra disjoint across (theta,l) pairs
    Classification overall = Classification::Inconclusive;
};

/// Necessary/sufficient robust-synchronizability checks: adjacency-spectrum
/// precheck, full diagnostics on the assembled system, and the per-block cross
/// conditions on the decoupled form.
RobustSyncReport check_robust_sync(const NetworkSpec& spec, const ParamGrid& grid,
                                   const Tolerances& tol = {});

struct SyncResult {
    PolynomialControl control;
    ErrorReport error;  // from the true nonzero-x0 rollout
    bool converged = false;
};

/// Broadcast-input synchronization synthesis: assemble, (continuous mode)
/// ZOH-discretize, correct the target for the free response Phi(T) x0 at every
/// candidate horizon, and run the polynomial synthesis.
SyncResult sync_synthesize(const NetworkSpec& spec, const TargetProfile& node_target,
                           const Eigen::VectorXd& x0, std::optional<double> zoh_step,
                           const SynthesisConfig& cfg);

/// Network section of a model document, if present.
std::optional<NetworkSpec> load_network_spec(const std::string& document);

/// Standard model document for a ring network (assembled system plus the
/// network metadata), as emitted by `ensctl network ring`.
std::string ring_model_document(const NetworkSpec& spec);

}  // namespace ensctl
