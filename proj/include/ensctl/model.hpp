#pragma once

#include <Eigen/Dense>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ensctl/expr.hpp"

namespace ensctl {

/// Generic error for model/grid/sampling problems.
struct ModelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

/// Finite union of compact axis-aligned boxes; for d=1 a finite union of
/// disjoint compact intervals.
struct ParameterDomain {
    int d = 1;
    std::vector<std::vector<Interval>> boxes;  // each box holds d intervals

    /// d=1 domain from intervals; sorts them and rejects overlaps.
    static ParameterDomain from_intervals(std::vector<Interval> intervals);
    static ParameterDomain from_boxes(std::vector<std::vector<Interval>> boxes);

    bool contains(const Eigen::VectorXd& theta, double slack = 0.0) const;
    bool contains_zero() const;  // d=1: is 0 in some interval
};

enum class TimeMode { Continuous, Discrete };

/// Parameter-dependent pair (A(theta), B(theta)) with entries as expressions.
struct ParametricSystem {
    int n = 0;
    int m = 0;
    std::vector<std::vector<Expr>> A;  // n x n
    std::vector<std::vector<Expr>> B;  // n x m
    ParameterDomain domain;
    TimeMode mode = TimeMode::Continuous;

    void validate() const;  // dimensions + parameter indices
};

/// Finite evaluation grid over the domain; endpoints/corners always included.
struct ParamGrid {
    int d = 1;
    int per_axis_count = 0;  // density the grid was built with
    std::vector<Eigen::VectorXd> points;

    std::size_t size() const { return points.size(); }
};

/// Numeric image of the system over a grid.
struct SampledEnsemble {
    ParamGrid grid;
    std::vector<Eigen::MatrixXd> A;  // per grid point, n x n
    std::vector<Eigen::MatrixXd> B;  // per grid point, n x m
    TimeMode mode = TimeMode::Continuous;
    std::optional<double> zoh_step;  // set when produced by discretize_zoh

    int n() const { return A.empty() ? 0 : static_cast<int>(A.front().rows()); }
    int m() const { return B.empty() ? 0 : static_cast<int>(B.front().cols()); }
    std::size_t size() const { return A.size(); }
};

/// Desired terminal states x*(theta): either expressions or per-grid-point
/// tabulated vectors (for targets computed by other tools).
struct TargetProfile {
    std::vector<Expr> exprs;                 // size n when expression-based
    std::vector<Eigen::VectorXd> tabulated;  // size = grid size otherwise

    static TargetProfile expressions(std::vector<Expr> e);
    static TargetProfile table(std::vector<Eigen::VectorXd> points);

    bool is_tabulated() const { return exprs.empty(); }
    int dim() const;
    /// Value at grid point i (evaluates expressions at grid.points[i]).
    Eigen::VectorXd at(const ParamGrid& grid, std::size_t i) const;
};

/// Parse a model document (JSON text; see README for the schema).
ParametricSystem load_model(const std::string& document);

/// True when the document carries a `network` section.
bool model_has_network(const std::string& document);

inline constexpr int kDefaultGridCount1d = 101;
inline constexpr int kDefaultGridCountNd = 33;
inline constexpr std::size_t kDefaultMaxGridPoints = 1u << 21;

/// Uniform per-box grid with per_axis_count points per interval/axis
/// (endpoints included; tensor products for d >= 2).
ParamGrid make_grid(const ParameterDomain& domain, int per_axis_count,
                    std::size_t max_points = kDefaultMaxGridPoints);

/// Refined count so the finer grid contains every coarse point exactly.
inline int refined_count(int count, int factor) { return factor * (count - 1) + 1; }

/// Entrywise evaluation of the system at every grid point, in grid order.
SampledEnsemble sample_ensemble(const ParametricSystem& system, const ParamGrid& grid);

int default_grid_count(const ParameterDomain& domain);

}  // namespace ensctl
