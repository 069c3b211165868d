#include "ensctl/model.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

namespace ensctl {

using nlohmann::json;

ParameterDomain ParameterDomain::from_intervals(std::vector<Interval> intervals) {
    if (intervals.empty()) throw ModelError("domain: empty interval list");
    for (const auto& iv : intervals)
        if (!(iv.lo <= iv.hi) || !std::isfinite(iv.lo) || !std::isfinite(iv.hi))
            throw ModelError("domain: invalid interval [" + std::to_string(iv.lo) + ", " +
                             std::to_string(iv.hi) + "]");
    std::sort(intervals.begin(), intervals.end(),
              [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    for (std::size_t i = 1; i < intervals.size(); ++i)
        if (intervals[i].lo <= intervals[i - 1].hi)
            throw ModelError("domain: intervals overlap or touch; they must be disjoint");
    ParameterDomain dom;
    dom.d = 1;
    for (const auto& iv : intervals) dom.boxes.push_back({iv});
    return dom;
}

ParameterDomain ParameterDomain::from_boxes(std::vector<std::vector<Interval>> boxes) {
    if (boxes.empty()) throw ModelError("domain: empty box list");
    const std::size_t d = boxes.front().size();
    if (d == 0) throw ModelError("domain: box with no axes");
    for (const auto& box : boxes) {
        if (box.size() != d) throw ModelError("domain: boxes with mixed dimensions");
        for (const auto& iv : box)
            if (!(iv.lo <= iv.hi) || !std::isfinite(iv.lo) || !std::isfinite(iv.hi))
                throw ModelError("domain: invalid interval [" + std::to_string(iv.lo) + ", " +
                                 std::to_string(iv.hi) + "]");
    }
    if (d == 1) {
        std::vector<Interval> ivs;
        for (const auto& box : boxes) ivs.push_back(box[0]);
        return from_intervals(std::move(ivs));
    }
    ParameterDomain dom;
    dom.d = static_cast<int>(d);
    dom.boxes = std::move(boxes);
    return dom;
}

bool ParameterDomain::contains(const Eigen::VectorXd& theta, double slack) const {
    if (theta.size() != d) return false;
    for (const auto& box : boxes) {
        bool in = true;
        for (int k = 0; k < d; ++k)
            if (theta[k] < box[k].lo - slack || theta[k] > box[k].hi + slack) {
                in = false;
                break;
            }
        if (in) return true;
    }
    return false;
}

bool ParameterDomain::contains_zero() const {
    Eigen::VectorXd zero = Eigen::VectorXd::Zero(d);
    return contains(zero);
}

void ParametricSystem::validate() const {
    if (n < 1 || m < 1) throw ModelError("system: n and m must be >= 1");
    if (static_cast<int>(A.size()) != n) throw ModelError("system: A must have n rows");
    for (const auto& row : A)
        if (static_cast<int>(row.size()) != n) throw ModelError("system: A must be n x n");
    if (static_cast<int>(B.size()) != n) throw ModelError("system: B must have n rows");
    for (const auto& row : B)
        if (static_cast<int>(row.size()) != m) throw ModelError("system: B must be n x m");
    auto check_params = [this](const std::vector<std::vector<Expr>>& mat, const char* name) {
        for (std::size_t i = 0; i < mat.size(); ++i)
            for (std::size_t j = 0; j < mat[i].size(); ++j)
                if (mat[i][j].max_param_index() > domain.d)
                    throw ModelError(std::string(name) + "[" + std::to_string(i + 1) + "][" +
                                     std::to_string(j + 1) + "]: parameter index exceeds domain dimension");
    };
    check_params(A, "A");
    check_params(B, "B");
}

TargetProfile TargetProfile::expressions(std::vector<Expr> e) {
    if (e.empty()) throw ModelError("target: empty expression list");
    TargetProfile t;
    t.exprs = std::move(e);
    return t;
}

TargetProfile TargetProfile::table(std::vector<Eigen::VectorXd> points) {
    if (points.empty()) throw ModelError("target: empty point table");
    for (const auto& p : points)
        if (p.size() != points.front().size())
            throw ModelError("target: inconsistent point dimensions");
    TargetProfile t;
    t.tabulated = std::move(points);
    return t;
}

int TargetProfile::dim() const {
    if (!exprs.empty()) return static_cast<int>(exprs.size());
    return tabulated.empty() ? 0 : static_cast<int>(tabulated.front().size());
}

Eigen::VectorXd TargetProfile::at(const ParamGrid& grid, std::size_t i) const {
    if (is_tabulated()) {
        if (i >= tabulated.size()) throw ModelError("target: point index outside table");
        return tabulated[i];
    }
    const Eigen::VectorXd& th = grid.points.at(i);
    Eigen::VectorXd out(static_cast<int>(exprs.size()));
    for (std::size_t k = 0; k < exprs.size(); ++k)
        out[static_cast<int>(k)] = exprs[k].eval({th.data(), static_cast<std::size_t>(th.size())});
    return out;
}

namespace {

std::vector<std::vector<Expr>> parse_matrix(const json& j, int rows, int cols, int d,
                                            const char* name) {
    if (!j.is_array() || static_cast<int>(j.size()) != rows)
        throw ModelError(std::string(name) + ": expected " + std::to_string(rows) + " rows");
    std::vector<std::vector<Expr>> out(rows);
    for (int i = 0; i < rows; ++i) {
        const json& row = j[i];
        if (!row.is_array() || static_cast<int>(row.size()) != cols)
            throw ModelError(std::string(name) + " row " + std::to_string(i + 1) + ": expected " +
                             std::to_string(cols) + " entries");
        for (int k = 0; k < cols; ++k) {
            std::string text;
            if (row[k].is_string())
                text = row[k].get<std::string>();
            else if (row[k].is_number())
                text = row[k].dump();
            else
                throw ModelError(std::string(name) + "[" + std::to_string(i + 1) + "][" +
                                 std::to_string(k + 1) + "]: entry must be a string or number");
            try {
                out[i].push_back(parse_expr(text, d));
            } catch (const ParseError& e) {
                throw ModelError(std::string(name) + "[" + std::to_string(i + 1) + "][" +
                                 std::to_string(k + 1) + "]: " + e.what());
            }
        }
    }
    return out;
}

ParameterDomain parse_domain(const json& j) {
    if (!j.is_object()) throw ModelError("domain: expected an object");
    if (j.contains("intervals")) {
        std::vector<Interval> ivs;
        for (const auto& e : j.at("intervals")) {
            if (!e.is_array() || e.size() != 2) throw ModelError("domain: interval must be [lo, hi]");
            ivs.push_back({e[0].get<double>(), e[1].get<double>()});
        }
        return ParameterDomain::from_intervals(std::move(ivs));
    }
    if (j.contains("boxes")) {
        std::vector<std::vector<Interval>> boxes;
        for (const auto& box : j.at("boxes")) {
            std::vector<Interval> axes;
            for (const auto& e : box) {
                if (!e.is_array() || e.size() != 2)
                    throw ModelError("domain: box axis must be [lo, hi]");
                axes.push_back({e[0].get<double>(), e[1].get<double>()});
            }
            boxes.push_back(std::move(axes));
        }
        return ParameterDomain::from_boxes(std::move(boxes));
    }
    throw ModelError("domain: need 'intervals' or 'boxes'");
}

}  // namespace

ParametricSystem load_model(const std::string& document) {
    json doc;
    try {
        doc = json::parse(document);
    } catch (const json::exception& e) {
        throw ModelError(std::string("model: invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ModelError("model: expected a JSON object");
    if (!doc.contains("system") || !doc.contains("domain") || !doc.contains("A") ||
        !doc.contains("B"))
        throw ModelError("model: required sections are system, domain, A, B");

    const json& sys = doc.at("system");
    ParametricSystem out;
    out.n = sys.value("n", 0);
    out.m = sys.value("m", 0);
    std::string mode = sys.value("mode", "continuous");
    if (mode == "continuous")
        out.mode = TimeMode::Continuous;
    else if (mode == "discrete")
        out.mode = TimeMode::Discrete;
    else
        throw ModelError("system: mode must be 'continuous' or 'discrete'");

    out.domain = parse_domain(doc.at("domain"));
    out.A = parse_matrix(doc.at("A"), out.n, out.n, out.domain.d, "A");
    out.B = parse_matrix(doc.at("B"), out.n, out.m, out.domain.d, "B");
    out.validate();
    return out;
}

bool model_has_network(const std::string& document) {
    json doc = json::parse(document, nullptr, false);
    return doc.is_object() && doc.contains("network");
}

int default_grid_count(const ParameterDomain& domain) {
    return domain.d == 1 ? kDefaultGridCount1d : kDefaultGridCountNd;
}

ParamGrid make_grid(const ParameterDomain& domain, int per_axis_count, std::size_t max_points) {
    if (per_axis_count < 2) throw ModelError("grid: need at least 2 points per interval");

    // per-axis points for one box; endpoints exact, interior points computed
    // as lo + (hi-lo)*(i/(c-1)) so factor-refined grids contain them bitwise
    auto axis_points = [per_axis_count](const Interval& iv) {
        std::vector<double> pts;
        if (iv.lo == iv.hi) {
            pts.push_back(iv.lo);
            return pts;
        }
        pts.reserve(per_axis_count);
        for (int i = 0; i < per_axis_count; ++i) {
            if (i == 0)
                pts.push_back(iv.lo);
            else if (i == per_axis_count - 1)
                pts.push_back(iv.hi);
            else
                pts.push_back(iv.lo + (iv.hi - iv.lo) *
                                          (static_cast<double>(i) / (per_axis_count - 1)));
        }
        return pts;
    };

    ParamGrid grid;
    grid.d = domain.d;
    grid.per_axis_count = per_axis_count;

    for (const auto& box : domain.boxes) {
        std::vector<std::vector<double>> axes;
        std::size_t box_count = 1;
        for (const auto& iv : box) {
            axes.push_back(axis_points(iv));
            box_count *= axes.back().size();
        }
        if (grid.points.size() + box_count > max_points)
            throw ModelError("grid: point count would exceed the configured maximum (" +
                             std::to_string(max_points) + ")");
        // row-major tensor product (first axis slowest)
        std::vector<std::size_t> idx(box.size(), 0);
        for (;;) {
            Eigen::VectorXd p(domain.d);
            for (int k = 0; k < domain.d; ++k) p[k] = axes[k][idx[k]];
            grid.points.push_back(std::move(p));
            int k = domain.d - 1;
            while (k >= 0 && ++idx[k] == axes[k].size()) idx[k--] = 0;
            if (k < 0) break;
        }
    }

    // drop exact duplicates (overlapping boxes), keeping first occurrence
    std::vector<Eigen::VectorXd> unique;
    unique.reserve(grid.points.size());
    for (const auto& p : grid.points) {
        bool dup = false;
        for (const auto& q : unique)
            if (p == q) {
                dup = true;
                break;
            }
        if (!dup) unique.push_back(p);
    }
    grid.points = std::move(unique);
    return grid;
}

SampledEnsemble sample_ensemble(const ParametricSystem& system, const ParamGrid& grid) {
    system.validate();
    if (grid.d != system.domain.d) throw ModelError("sample: grid dimension mismatch");

    SampledEnsemble ens;
    ens.grid = grid;
    ens.mode = system.mode;
    ens.A.reserve(grid.size());
    ens.B.reserve(grid.size());

    for (std::size_t p = 0; p < grid.size(); ++p) {
        const Eigen::VectorXd& th = grid.points[p];
        std::span<const double> view{th.data(), static_cast<std::size_t>(th.size())};
        Eigen::MatrixXd Ai(system.n, system.n), Bi(system.n, system.m);
        try {
            for (int i = 0; i < system.n; ++i)
                for (int j = 0; j < system.n; ++j) Ai(i, j) = system.A[i][j].eval(view);
            for (int i = 0; i < system.n; ++i)
                for (int j = 0; j < system.m; ++j) Bi(i, j) = system.B[i][j].eval(view);
        } catch (const EvalError& e) {
            throw ModelError(std::string("sample: ") + e.what());
        }
        if (!Ai.allFinite() || !Bi.allFinite())
            throw ModelError("sample: non-finite entry at grid point " + std::to_string(p));
        ens.A.push_back(std::move(Ai));
        ens.B.push_back(std::move(Bi));
    }
    return ens;
}

}  // namespace ensctl
