#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "ensctl/diagnostics.hpp"
#include "ensctl/model.hpp"
#include "ensctl/network.hpp"
#include "ensctl/report_io.hpp"
#include "ensctl/simulation.hpp"
#include "ensctl/synthesis.hpp"

using nlohmann::json;
using namespace ensctl;

namespace {

constexpr const char* kVersion = "ensctl 0.1.0";

// exit codes (check): 0 certified-sufficient, 10 necessary-violated,
// 20 inconclusive, 1 usage/IO; synth adds 30 = unconverged
constexpr int kExitCertified = 0;
constexpr int kExitNecessaryViolated = 10;
constexpr int kExitInconclusive = 20;
constexpr int kExitUsage = 1;
constexpr int kExitUnconverged = 30;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ModelError("cannot read file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ModelError("cannot write file: " + path);
    out << content;
}

struct ManifestInput {
    std::string command;
    std::vector<std::string> inputs;
    json config;
    std::optional<unsigned long> seed;
};

json make_manifest(const ManifestInput& mi, double wall_ms) {
    json m;
    m["command"] = mi.command;
    m["inputs"] = mi.inputs;
    m["config"] = mi.config;
    if (mi.seed) m["seed"] = *mi.seed;
    m["tool_version"] = kVersion;
    m["wall_clock_ms"] = wall_ms;
    return m;
}

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

TargetProfile parse_target(const std::string& arg, int n, int d) {
    if (!arg.empty() && arg[0] == '@') {
        json j = json::parse(read_file(arg.substr(1)));
        if (j.is_array()) {
            std::vector<Expr> exprs;
            for (const auto& e : j)
                exprs.push_back(parse_expr(e.is_string() ? e.get<std::string>() : e.dump(), d));
            if (static_cast<int>(exprs.size()) != n)
                throw ModelError("target: expected " + std::to_string(n) + " components");
            return TargetProfile::expressions(std::move(exprs));
        }
        if (j.is_object() && j.contains("points")) {
            std::vector<Eigen::VectorXd> pts;
            for (const auto& row : j.at("points")) {
                Eigen::VectorXd v(static_cast<int>(row.size()));
                for (int i = 0; i < v.size(); ++i) v[i] = row[static_cast<std::size_t>(i)].get<double>();
                pts.push_back(std::move(v));
            }
            return TargetProfile::table(std::move(pts));
        }
        throw ModelError("target file: expected an expression array or {\"points\": [...]}");
    }
    std::vector<Expr> exprs;
    for (const auto& part : split_commas(arg)) exprs.push_back(parse_expr(part, d));
    if (static_cast<int>(exprs.size()) != n)
        throw ModelError("target: expected " + std::to_string(n) + " components, got " +
                         std::to_string(exprs.size()));
    return TargetProfile::expressions(std::move(exprs));
}

Eigen::VectorXd parse_x0(const std::string& arg, int n, unsigned long seed) {
    if (arg == "random") {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> dist(0.0, 1.0);
        Eigen::VectorXd v(n);
        for (int i = 0; i < n; ++i) v[i] = dist(rng);
        return v;
    }
    std::vector<double> vals;
    if (!arg.empty() && arg[0] == '@') {
        json j = json::parse(read_file(arg.substr(1)));
        vals = j.get<std::vector<double>>();
    } else {
        for (const auto& part : split_commas(arg)) vals.push_back(std::stod(part));
    }
    if (static_cast<int>(vals.size()) != n)
        throw ModelError("x0: expected " + std::to_string(n) + " components");
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = vals[i];
    return v;
}

ParameterDomain parse_domain_arg(const std::string& arg) {
    json j = json::parse(arg);
    if (!j.is_array() || j.empty()) throw ModelError("domain: expected [lo,hi] or [[..],[..]]");
    if (j[0].is_number()) {
        if (j.size() != 2) throw ModelError("domain: expected [lo, hi]");
        return ParameterDomain::from_intervals({{j[0].get<double>(), j[1].get<double>()}});
    }
    std::vector<Interval> ivs;
    for (const auto& e : j) ivs.push_back({e[0].get<double>(), e[1].get<double>()});
    return ParameterDomain::from_intervals(std::move(ivs));
}

int run_check(const std::string& model_path, int grid_count, const std::string& out_path,
              const Tolerances& tol) {
    const auto t0 = std::chrono::steady_clock::now();
    std::string text = read_file(model_path);
    ParametricSystem sys = load_model(text);
    const int count = grid_count > 0 ? grid_count : default_grid_count(sys.domain);
    ParamGrid grid = make_grid(sys.domain, count);

    json report;
    Classification overall;
    if (model_has_network(text)) {
        auto spec = load_network_spec(text);
        RobustSyncReport rep = check_robust_sync(*spec, grid, tol);
        report = to_json(rep);
        overall = rep.overall;
    } else {
        SampledEnsemble ens = sample_ensemble(sys, grid);
        DiagnosticsReport rep = run_diagnostics(sys, ens, tol);
        report = to_json(rep);
        overall = rep.overall;
    }
    if (sys.mode == TimeMode::Continuous)
        report["zoh_note"] =
            "verdicts apply to the continuous-time family; re-run the spectral checks on the "
            "discretized ensemble after choosing a ZOH step";

    const double ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - t0).count();
    ManifestInput mi;
    mi.command = "check";
    mi.inputs = {model_path};
    mi.config = {{"grid", count}, {"tolerances", to_json(tol)}};
    report["manifest"] = make_manifest(mi, ms);

    std::string dump = report.dump(2) + "\n";
    if (out_path.empty()) {
        std::cout << dump;
    } else {
        write_file(out_path, dump);
        std::cout << "check: " << to_string(overall) << " (report written to " << out_path
                  << ")\n";
    }
    switch (overall) {
        case Classification::CertifiedSufficient: return kExitCertified;
        case Classification::NecessaryViolated: return kExitNecessaryViolated;
        case Classification::Inconclusive: return kExitInconclusive;
    }
    return kExitUsage;
}

int run_synth(const std::string& model_path, const std::string& target_arg,
              const std::string& x0_arg, unsigned long seed, const SynthesisConfig& cfg,
              double zoh_step, const std::string& out_path, bool machine) {
    const auto t0 = std::chrono::steady_clock::now();
    std::string text = read_file(model_path);
    ParametricSystem sys = load_model(text);
    const int count = cfg.grid_count > 0 ? cfg.grid_count : default_grid_count(sys.domain);
    ParamGrid grid = make_grid(sys.domain, count);
    SampledEnsemble ens = sample_ensemble(sys, grid);

    if (sys.mode == TimeMode::Continuous) {
        if (!(zoh_step > 0.0))
            throw ModelError("synth: continuous models require --zoh-step");
        ens = discretize_zoh(ens, zoh_step);
    }

    TargetProfile target = parse_target(target_arg, sys.n, sys.domain.d);
    if (target.is_tabulated() && target.tabulated.size() != grid.size())
        throw ModelError("synth: tabulated target must match the fitting grid size");

    std::vector<Eigen::VectorXd> x0;
    if (!x0_arg.empty()) x0.push_back(parse_x0(x0_arg, sys.n, seed));

    SynthesisResult res;
    if (x0.empty()) {
        res = synthesize(ens, target, cfg);
    } else {
        // free-response correction at every candidate horizon
        std::vector<Eigen::VectorXd> base(grid.size());
        for (std::size_t p = 0; p < grid.size(); ++p) base[p] = target.at(grid, p);
        std::vector<Eigen::MatrixXd> Phi(grid.size(),
                                         Eigen::MatrixXd::Identity(sys.n, sys.n));
        int curT = 0;
        auto fn = [&](int, int T) {
            if (T < curT) {
                for (auto& P : Phi) P = Eigen::MatrixXd::Identity(sys.n, sys.n);
                curT = 0;
            }
            for (; curT < T; ++curT)
                for (std::size_t p = 0; p < grid.size(); ++p) Phi[p] = ens.A[p] * Phi[p];
            std::vector<Eigen::VectorXd> out(grid.size());
            for (std::size_t p = 0; p < grid.size(); ++p) out[p] = base[p] - Phi[p] * x0[0];
            return out;
        };
        res = synthesize_horizon(ens, fn, cfg);
    }

    // audit rollout + revalidation
    std::vector<Eigen::VectorXd> inputs = control_to_inputs(res.control);
    Trajectory traj = rollout(ens, inputs, x0);
    ErrorReport err = sup_error(traj, target, sys, ens, inputs, x0, cfg.revalidation_factor);

    // post-ZOH spectral recheck (discretization moves the spectra)
    json post_zoh;
    if (sys.mode == TimeMode::Continuous) {
        SpectrumCloud dcloud = spectrum_cloud(ens, Tolerances{}.rank_tol);
        double tol_spec = Tolerances{}.tol_spec_base * (1.0 + dcloud.max_abs);
        NecessaryOutcome nec = check_necessary(ens, dcloud, tol_spec, Tolerances{}.rank_tol);
        HermiteProfile hp = hermite_profile(ens, Tolerances{}.rank_tol);
        MainOutcome mo = check_main(ens, dcloud, hp, tol_spec, Tolerances{}.cond_max,
                                    Tolerances{}.rank_tol);
        post_zoh = {{"E2", to_json(nec.e2)},
                    {"MAIN-iii", to_json(mo.iii)},
                    {"MAIN-iv", to_json(mo.iv)}};
    }

    const double ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - t0).count();
    ManifestInput mi;
    mi.command = "synth";
    mi.inputs = {model_path};
    mi.config = {{"eps", cfg.eps},
                 {"degree_start", cfg.degree_start},
                 {"degree_step", cfg.degree_step},
                 {"max_degree", cfg.max_degree},
                 {"lawson_iters", cfg.lawson_iters},
                 {"ridge", cfg.ridge},
                 {"grid", count},
                 {"revalidation_factor", cfg.revalidation_factor}};
    if (zoh_step > 0.0) mi.config["zoh_step"] = zoh_step;
    if (!x0_arg.empty()) mi.seed = seed;

    json artifact = control_to_json(res.control, sys.domain, count, cfg.eps, target, x0);
    artifact["converged"] = res.converged;
    artifact["degrees_tried"] = res.degrees_tried;
    artifact["audit"] = to_json(err);
    if (!post_zoh.is_null()) artifact["post_zoh_diagnostics"] = post_zoh;
    artifact["manifest"] = make_manifest(mi, ms);
    write_file(out_path, artifact.dump(2) + "\n");

    if (machine) {
        json summary = {{"converged", res.converged},
                        {"achieved_error", res.control.achieved_error},
                        {"T", res.control.horizon},
                        {"out", out_path}};
        std::cout << summary.dump() << "\n";
    } else {
        std::cout << "synth: " << (res.converged ? "converged" : "unconverged")
                  << ", achieved_error = " << res.control.achieved_error
                  << ", T = " << res.control.horizon << ", control written to " << out_path
                  << "\n";
    }
    return res.converged ? kExitCertified : kExitUnconverged;
}

int run_simulate(const std::string& model_path, const std::string& control_path,
                 const std::string& target_arg, const std::string& x0_arg, unsigned long seed,
                 int grid_override, int reval_factor, const std::string& traj_path,
                 const std::string& out_path, bool machine) {
    const auto t0 = std::chrono::steady_clock::now();
    std::string text = read_file(model_path);
    ParametricSystem sys = load_model(text);
    ControlFile cf = control_from_json(json::parse(read_file(control_path)));

    const int count = grid_override > 0
                          ? grid_override
                          : (cf.grid_count > 0 ? cf.grid_count : default_grid_count(sys.domain));
    ParamGrid grid = make_grid(sys.domain, count);
    SampledEnsemble ens = sample_ensemble(sys, grid);
    if (sys.mode == TimeMode::Continuous) {
        if (!cf.control.zoh_step)
            throw ModelError("simulate: continuous model but the control has no ZOH step");
        ens = discretize_zoh(ens, *cf.control.zoh_step);
    }

    TargetProfile target = [&] {
        if (!target_arg.empty()) return parse_target(target_arg, sys.n, sys.domain.d);
        if (!cf.target_exprs.empty()) {
            std::vector<Expr> exprs;
            for (const auto& e : cf.target_exprs) exprs.push_back(parse_expr(e, sys.domain.d));
            return TargetProfile::expressions(std::move(exprs));
        }
        if (!cf.target_points.empty()) {
            std::vector<Eigen::VectorXd> pts;
            for (const auto& row : cf.target_points) {
                Eigen::VectorXd v(static_cast<int>(row.size()));
                for (int i = 0; i < v.size(); ++i) v[i] = row[static_cast<std::size_t>(i)];
                pts.push_back(std::move(v));
            }
            return TargetProfile::table(std::move(pts));
        }
        throw ModelError("simulate: no target in the control file; pass --target");
    }();

    std::vector<Eigen::VectorXd> x0;
    if (!x0_arg.empty()) {
        x0.push_back(parse_x0(x0_arg, sys.n, seed));
    } else if (!cf.x0.empty()) {
        for (const auto& row : cf.x0) {
            Eigen::VectorXd v(static_cast<int>(row.size()));
            for (int i = 0; i < v.size(); ++i) v[i] = row[static_cast<std::size_t>(i)];
            x0.push_back(std::move(v));
        }
    }

    std::vector<Eigen::VectorXd> inputs = control_to_inputs(cf.control);
    Trajectory traj = rollout(ens, inputs, x0);

    std::ostringstream csv;
    write_trajectory_csv(csv, traj, grid);
    write_file(traj_path, csv.str());

    ErrorReport err = sup_error(traj, target, sys, ens, inputs, x0, reval_factor);

    const double ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - t0).count();
    ManifestInput mi;
    mi.command = "simulate";
    mi.inputs = {model_path, control_path};
    mi.config = {{"grid", count}, {"revalidation_factor", reval_factor}};
    json out = to_json(err);
    out["control_achieved_error"] = cf.control.achieved_error;
    out["manifest"] = make_manifest(mi, ms);
    write_file(out_path, out.dump(2) + "\n");

    if (machine) {
        json summary = {{"sup_error", err.sup_fit}, {"traj", traj_path}, {"error", out_path}};
        std::cout << summary.dump() << "\n";
    } else {
        std::cout << "simulate: sup_error = " << err.sup_fit << ", trajectory " << traj_path
                  << ", error report " << out_path << "\n";
    }
    return 0;
}

int run_network_ring(int nodes, const std::string& variant, const std::string& weight,
                     const std::string& domain_arg, const std::string& mode,
                     const std::string& node_file, const std::string& out_path) {
    NetworkSpec spec;
    spec.N = nodes;
    spec.domain = parse_domain_arg(domain_arg);
    const int d = spec.domain.d;
    if (variant == "directed")
        spec.ring = RingVariant::Directed;
    else if (variant == "symmetric")
        spec.ring = RingVariant::Symmetric;
    else
        throw ModelError("network ring: variant must be 'directed' or 'symmetric'");
    spec.ring_weight = parse_expr(weight, d);
    if (mode == "continuous")
        spec.mode = TimeMode::Continuous;
    else if (mode == "discrete")
        spec.mode = TimeMode::Discrete;
    else
        throw ModelError("network ring: mode must be 'continuous' or 'discrete'");

    if (node_file.empty()) {
        // harmonic-oscillator node
        spec.node_A = {{Expr::constant(0.0), Expr::constant(-1.0)},
                       {Expr::constant(1.0), Expr::constant(0.0)}};
        spec.node_b = {Expr::constant(1.0), Expr::constant(0.0)};
        spec.node_c = {Expr::constant(0.0), Expr::constant(1.0)};
    } else {
        json j = json::parse(read_file(node_file));
        for (const auto& row : j.at("A")) {
            std::vector<Expr> r;
            for (const auto& e : row)
                r.push_back(parse_expr(e.is_string() ? e.get<std::string>() : e.dump(), d));
            spec.node_A.push_back(std::move(r));
        }
        for (const auto& e : j.at("b"))
            spec.node_b.push_back(parse_expr(e.is_string() ? e.get<std::string>() : e.dump(), d));
        for (const auto& e : j.at("c"))
            spec.node_c.push_back(parse_expr(e.is_string() ? e.get<std::string>() : e.dump(), d));
    }

    write_file(out_path, ring_model_document(spec));
    std::cout << "network ring: model written to " << out_path << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ensemble controllability analysis and open-loop synthesis"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    // check
    std::string model_path, out_path, target_arg, x0_arg, control_path;
    int grid_count = 0;
    Tolerances tol;
    auto* check = app.add_subcommand("check", "run the controllability diagnostics");
    check->add_option("model", model_path, "model file")->required();
    check->add_option("--grid", grid_count, "points per interval/axis");
    check->add_option("--out", out_path, "write the JSON report here instead of stdout");
    check->add_option("--rank-tol", tol.rank_tol, "relative rank threshold");
    check->add_option("--tol-spec", tol.tol_spec_base, "eigenvalue-matching base tolerance");
    check->add_option("--coeff-tol", tol.coeff_tol, "characteristic-coefficient tolerance");
    check->add_option("--cond-max", tol.cond_max, "Remark-2 condition bound");
    check->add_option("--line-tol", tol.line_tol, "dimension-gate line tolerance");

    // synth
    SynthesisConfig cfg;
    double zoh_step = 0.0;
    unsigned long seed = 0;
    bool machine = false;
    std::string control_out = "control.json";
    auto* synth = app.add_subcommand("synth", "synthesize a polynomial open-loop control");
    synth->add_option("model", model_path, "model file")->required();
    synth->add_option("--target", target_arg, "comma-separated expressions or @file")->required();
    synth->add_option("--eps", cfg.eps, "target sup error");
    synth->add_option("--max-degree", cfg.max_degree, "degree schedule upper end");
    synth->add_option("--degree-start", cfg.degree_start, "degree schedule start");
    synth->add_option("--degree-step", cfg.degree_step, "degree schedule step");
    synth->add_option("--lawson", cfg.lawson_iters, "sup-norm polish iterations");
    synth->add_option("--ridge", cfg.ridge, "ridge regularization (0 = off)");
    synth->add_option("--grid", cfg.grid_count, "fitting grid points per interval");
    synth->add_option("--zoh-step", zoh_step, "ZOH step for continuous models");
    synth->add_option("--x0", x0_arg, "initial state: numbers, @file, or 'random'");
    synth->add_option("--seed", seed, "seed for random x0 (recorded in the manifest)");
    synth->add_option("--revalidate-factor", cfg.revalidation_factor, "finer audit grid factor");
    synth->add_option("--out", control_out, "control artifact path");
    synth->add_flag("--json", machine, "machine-readable stdout");

    // simulate
    std::string traj_path = "traj.csv", err_path = "error.json";
    int sim_grid = 0, sim_reval = 4;
    auto* sim = app.add_subcommand("simulate", "roll out a control and audit the error");
    sim->add_option("model", model_path, "model file")->required();
    sim->add_option("--control", control_path, "control artifact")->required();
    sim->add_option("--target", target_arg, "override the embedded target");
    sim->add_option("--x0", x0_arg, "override the embedded initial state");
    sim->add_option("--seed", seed, "seed when --x0 random");
    sim->add_option("--grid", sim_grid, "override the control's grid density");
    sim->add_option("--revalidate-factor", sim_reval, "finer audit grid factor");
    sim->add_option("--traj", traj_path, "trajectory CSV path");
    sim->add_option("--out", err_path, "error report path");
    sim->add_flag("--json", machine, "machine-readable stdout");

    // network ring
    int nodes = 5;
    std::string variant = "directed", weight = "theta", domain_arg = "[2,3]",
                mode = "continuous", node_file, ring_out = "ring.model";
    auto* network = app.add_subcommand("network", "network constructions");
    auto* ring = network->add_subcommand("ring", "emit a circulant ring model file");
    ring->add_option("--nodes", nodes, "node count N");
    ring->add_option("--variant", variant, "directed | symmetric");
    ring->add_option("--weight", weight, "coupling weight expression");
    ring->add_option("--domain", domain_arg, "parameter domain, e.g. [2,3]");
    ring->add_option("--mode", mode, "continuous | discrete");
    ring->add_option("--node-file", node_file, "JSON {A,b,c} node system (default oscillator)");
    ring->add_option("--out", ring_out, "output model path");
    network->require_subcommand(1);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*check) return run_check(model_path, grid_count, out_path, tol);
        if (*synth)
            return run_synth(model_path, target_arg, x0_arg, seed, cfg, zoh_step, control_out,
                             machine);
        if (*sim)
            return run_simulate(model_path, control_path, target_arg, x0_arg, seed, sim_grid,
                                sim_reval, traj_path, err_path, machine);
        if (*ring)
            return run_network_ring(nodes, variant, weight, domain_arg, mode, node_file,
                                    ring_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
