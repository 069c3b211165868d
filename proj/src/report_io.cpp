#include "ensctl/report_io.hpp"

#include <charconv>
#include <cmath>
#include <limits>

namespace ensctl {

using nlohmann::json;

namespace {

json vec_json(const Eigen::VectorXd& v) {
    json out = json::array();
    for (int i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

json complex_json(const std::complex<double>& z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

std::string csv_number(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace

json to_json(const Witness& w) {
    json out;
    out["kind"] = w.kind;
    if (w.value != std::complex<double>{0.0, 0.0} || w.kind.find("eigenvalue") != std::string::npos)
        out["value"] = complex_json(w.value);
    out["scalar"] = w.scalar;
    json ths = json::array();
    for (const auto& th : w.thetas) ths.push_back(vec_json(th));
    out["thetas"] = ths;
    if (!w.note.empty()) out["note"] = w.note;
    return out;
}

json to_json(const CheckOutcome& c) {
    json out;
    out["verdict"] = to_string(c.verdict);
    out["summary"] = c.summary;
    json ws = json::array();
    for (const auto& w : c.witnesses) ws.push_back(to_json(w));
    out["witnesses"] = ws;
    return out;
}

json to_json(const Tolerances& t) {
    return json{{"rank_tol", t.rank_tol},
                {"tol_spec_base", t.tol_spec_base},
                {"coeff_tol", t.coeff_tol},
                {"cond_max", t.cond_max},
                {"line_tol", t.line_tol}};
}

json to_json(const DiagnosticsReport& rep) {
    json out;
    out["overall"] = to_string(rep.overall);
    out["tolerances"] = to_json(rep.tolerances);
    out["tol_spec"] = rep.tol_spec;
    out["checks"] = {{"E1", to_json(rep.e1)},
                     {"E2", to_json(rep.e2)},
                     {"MAIN-i", to_json(rep.main_i)},
                     {"MAIN-ii", to_json(rep.main_ii)},
                     {"MAIN-iii", to_json(rep.main_iii)},
                     {"MAIN-iv", to_json(rep.main_iv)},
                     {"remark2-condition-number", to_json(rep.remark2)},
                     {"const-char-poly", to_json(rep.const_char_poly)},
                     {"scaling-family", to_json(rep.scaling_family)},
                     {"dimension-gate", to_json(rep.dim_gate)}};
    out["max_eigvec_condition"] =
        std::isfinite(rep.max_eigvec_condition) ? json(rep.max_eigvec_condition) : json("inf");
    out["scaling_family_detected"] = rep.scaling_detected;
    // informational spectrum dump (no connectedness verdict is derived from it)
    json cloud = json::array();
    for (const auto& ev : rep.spectrum_points) {
        json pt = json::array();
        for (int k = 0; k < ev.size(); ++k) pt.push_back({ev[k].real(), ev[k].imag()});
        cloud.push_back(pt);
    }
    out["spectrum_cloud"] = cloud;
    return out;
}

json to_json(const RobustSyncReport& rep) {
    json out = to_json(rep.base);
    out["network"] = {{"adjacency-spectrum", to_json(rep.adjacency_spectrum)},
                      {"block-simple", to_json(rep.block_simple)},
                      {"cross-disjoint", to_json(rep.cross_disjoint)},
                      {"overall", to_string(rep.overall)}};
    out["overall"] = to_string(rep.overall);
    return out;
}

json to_json(const ErrorReport& rep) {
    json out;
    out["sup_error"] = rep.sup_fit;
    out["argmax_theta"] = vec_json(rep.argmax_theta);
    out["per_point"] = rep.per_point;
    out["revalidated"] = rep.revalidated;
    if (rep.revalidated) {
        out["revalidation_factor"] = rep.revalidation_factor;
        out["sup_error_revalidation"] = rep.sup_revalidation;
        out["argmax_theta_revalidation"] = vec_json(rep.argmax_theta_revalidation);
    }
    return out;
}

json control_to_json(const PolynomialControl& ctrl, const ParameterDomain& domain,
                     int grid_count, double eps, const TargetProfile& target,
                     const std::vector<Eigen::VectorXd>& x0) {
    json out;
    out["mode"] = ctrl.zoh_step ? "continuous" : "discrete";
    if (ctrl.zoh_step) out["h"] = *ctrl.zoh_step;
    out["T"] = ctrl.horizon;
    json coeffs = json::array();
    for (const auto& c : ctrl.coeffs) coeffs.push_back(vec_json(c));
    out["coeffs"] = coeffs;
    out["achieved_error"] = ctrl.achieved_error;
    out["basis"] = ctrl.basis;

    json boxes = json::array();
    for (const auto& box : domain.boxes) {
        json b = json::array();
        for (const auto& iv : box) b.push_back({iv.lo, iv.hi});
        boxes.push_back(b);
    }
    out["grid_descriptor"] = {{"boxes", boxes}, {"per_axis_count", grid_count}};
    out["tolerances"] = {{"eps", eps}};

    if (!target.is_tabulated()) {
        json te = json::array();
        for (const auto& e : target.exprs) te.push_back(e.str());
        out["target"] = te;
    } else {
        json tp = json::array();
        for (const auto& v : target.tabulated) tp.push_back(vec_json(v));
        out["target_points"] = tp;
    }
    if (!x0.empty()) {
        json xs = json::array();
        for (const auto& v : x0) xs.push_back(vec_json(v));
        out["x0"] = xs;
    }
    return out;
}

ControlFile control_from_json(const json& j) {
    ControlFile out;
    if (j.contains("h")) out.control.zoh_step = j.at("h").get<double>();
    out.control.horizon = j.at("T").get<int>();
    for (const auto& c : j.at("coeffs")) {
        Eigen::VectorXd v(static_cast<int>(c.size()));
        for (int i = 0; i < v.size(); ++i) v[i] = c[static_cast<std::size_t>(i)].get<double>();
        out.control.coeffs.push_back(std::move(v));
    }
    out.control.achieved_error = j.value("achieved_error", 0.0);
    out.control.basis = j.value("basis", "");
    if (j.contains("grid_descriptor"))
        out.grid_count = j.at("grid_descriptor").value("per_axis_count", 0);
    if (j.contains("tolerances")) out.eps = j.at("tolerances").value("eps", 0.0);
    if (j.contains("target"))
        for (const auto& e : j.at("target")) out.target_exprs.push_back(e.get<std::string>());
    if (j.contains("target_points"))
        for (const auto& v : j.at("target_points"))
            out.target_points.push_back(v.get<std::vector<double>>());
    if (j.contains("x0"))
        for (const auto& v : j.at("x0")) out.x0.push_back(v.get<std::vector<double>>());
    return out;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj, const ParamGrid& grid) {
    os << "t";
    if (grid.d == 1)
        os << ",theta";
    else
        for (int k = 1; k <= grid.d; ++k) os << ",theta" << k;
    const int n = traj.states.empty() || traj.states[0].empty()
                      ? 0
                      : static_cast<int>(traj.states[0][0].size());
    for (int i = 1; i <= n; ++i) os << ",x_" << i;
    os << "\n";
    for (std::size_t p = 0; p < traj.states.size(); ++p) {
        for (std::size_t t = 0; t < traj.states[p].size(); ++t) {
            os << t;
            for (int k = 0; k < grid.d; ++k) os << ',' << csv_number(grid.points[p][k]);
            for (int i = 0; i < n; ++i) os << ',' << csv_number(traj.states[p][t][i]);
            os << "\n";
        }
    }
}

}  // namespace ensctl
