#include "ensctl/network.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "json.hpp"

namespace ensctl {

using nlohmann::json;

void NetworkSpec::validate() const {
    if (N < 1) throw ModelError("network: N must be >= 1");
    const int n = node_dim();
    if (n < 1) throw ModelError("network: empty node system");
    for (const auto& row : node_A)
        if (static_cast<int>(row.size()) != n) throw ModelError("network: node A must be n x n");
    if (static_cast<int>(node_b.size()) != n || static_cast<int>(node_c.size()) != n)
        throw ModelError("network: node b and c must have length n");
    if (!ring && static_cast<int>(adjacency.size()) != N)
        throw ModelError("network: adjacency must be N x N");
    if (!ring)
        for (const auto& row : adjacency)
            if (static_cast<int>(row.size()) != N) throw ModelError("network: adjacency must be N x N");
    if (broadcast.size() != 0 && broadcast.size() != static_cast<Eigen::Index>(N))
        throw ModelError("network: broadcast vector must have length N");
}

std::vector<std::vector<Expr>> NetworkSpec::adjacency_exprs() const {
    if (!ring) return adjacency;
    std::vector<std::vector<Expr>> K(N, std::vector<Expr>(N, Expr::constant(0.0)));
    if (N == 1) {
        K[0][0] = ring_weight;  // degenerate ring: the 1x1 self-loop
        return K;
    }
    for (int i = 0; i < N; ++i) K[i][(i + 1) % N] = ring_weight;
    if (*ring == RingVariant::Symmetric && N > 2)
        for (int i = 0; i < N; ++i) K[i][(i + N - 1) % N] = ring_weight;
    if (*ring == RingVariant::Symmetric && N == 2) K[1][0] = ring_weight;  // single edge
    return K;
}

ParametricSystem assemble(const NetworkSpec& spec) {
    spec.validate();
    const int n = spec.node_dim();
    const int nN = n * spec.N;
    const auto K = spec.adjacency_exprs();
    Eigen::VectorXd bvec = spec.broadcast;
    if (bvec.size() == 0) {
        bvec = Eigen::VectorXd::Zero(spec.N);
        bvec[0] = 1.0;
    }

    ParametricSystem sys;
    sys.n = nN;
    sys.m = 1;
    sys.domain = spec.domain;
    sys.mode = spec.mode;
    sys.A.assign(nN, std::vector<Expr>(nN, Expr::constant(0.0)));
    sys.B.assign(nN, std::vector<Expr>(1, Expr::constant(0.0)));

    for (int i = 0; i < spec.N; ++i)
        for (int j = 0; j < spec.N; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                    Expr e = K[i][j] * (spec.node_b[k] * spec.node_c[l]);
                    if (i == j) e = spec.node_A[k][l] + e;
                    sys.A[i * n + k][j * n + l] = e;
                }
    for (int i = 0; i < spec.N; ++i)
        for (int k = 0; k < n; ++k)
            sys.B[i * n + k][0] = Expr::constant(bvec[i]) * spec.node_b[k];

    sys.validate();
    return sys;
}

std::vector<std::complex<double>> circulant_spectrum(int N, double theta, RingVariant variant) {
    if (N < 1) throw ModelError("circulant_spectrum: N must be >= 1");
    std::vector<std::complex<double>> out;
    out.reserve(N);
    if (N == 1) {
        out.emplace_back(theta, 0.0);
        return out;
    }
    if (variant == RingVariant::Directed) {
        for (int l = 0; l < N; ++l)
            out.push_back(theta * std::polar(1.0, 2.0 * M_PI * l / N));
    } else if (N == 2) {
        out.emplace_back(theta, 0.0);
        out.emplace_back(-theta, 0.0);
    } else {
        for (int l = 0; l < N; ++l)
            out.emplace_back(2.0 * theta * std::cos(2.0 * M_PI * l / N), 0.0);
    }
    return out;
}

namespace {

// node samples at a grid point
struct NodeSample {
    Eigen::MatrixXd A;
    Eigen::VectorXd b;
    Eigen::RowVectorXd c;
};

NodeSample sample_node(const NetworkSpec& spec, const Eigen::VectorXd& th) {
    const int n = spec.node_dim();
    std::span<const double> view{th.data(), static_cast<std::size_t>(th.size())};
    NodeSample s;
    s.A.resize(n, n);
    s.b.resize(n);
    s.c.resize(n);
    for (int i = 0; i < n; ++i) {
        s.b[i] = spec.node_b[i].eval(view);
        s.c[i] = spec.node_c[i].eval(view);
        for (int j = 0; j < n; ++j) s.A(i, j) = spec.node_A[i][j].eval(view);
    }
    return s;
}

Eigen::MatrixXd sample_adjacency(const std::vector<std::vector<Expr>>& K,
                                 const Eigen::VectorXd& th) {
    const int N = static_cast<int>(K.size());
    std::span<const double> view{th.data(), static_cast<std::size_t>(th.size())};
    Eigen::MatrixXd out(N, N);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) out(i, j) = K[i][j].eval(view);
    return out;
}

}  // namespace

DecoupledNetwork decouple(const NetworkSpec& spec, const ParamGrid& grid) {
    spec.validate();
    const int N = spec.N;
    const auto Kexpr = spec.adjacency_exprs();

    DecoupledNetwork dec;
    Eigen::MatrixXcd Sinv(N, N);

    std::vector<Eigen::MatrixXd> Ksamples;
    Ksamples.reserve(grid.size());
    for (const auto& th : grid.points) Ksamples.push_back(sample_adjacency(Kexpr, th));

    if (spec.ring) {
        // conjugate DFT similarity puts lambda_l = (formula order l) on block l
        dec.S.resize(N, N);
        for (int j = 0; j < N; ++j)
            for (int l = 0; l < N; ++l)
                dec.S(j, l) = std::polar(1.0, -2.0 * M_PI * ((j * l) % N) / N);
        Sinv = dec.S.conjugate() / static_cast<double>(N);
        for (std::size_t p = 0; p < grid.size(); ++p) {
            std::span<const double> view{grid.points[p].data(),
                                         static_cast<std::size_t>(grid.points[p].size())};
            const double w = spec.ring_weight.eval(view);
            auto lam = circulant_spectrum(N, w, *spec.ring);
            Eigen::VectorXcd lv(N);
            for (int l = 0; l < N; ++l) lv[l] = lam[l];
            dec.lambdas.push_back(std::move(lv));
        }
    } else {
        // constant adjacency with distinct eigenvalues
        for (std::size_t p = 1; p < Ksamples.size(); ++p)
            if ((Ksamples[p] - Ksamples[0]).norm() > 1e-12 * (1.0 + Ksamples[0].norm()))
                throw ModelError(
                    "decouple: explicit adjacencies must be constant in theta "
                    "(use a ring descriptor for theta-dependent circulants)");
        Eigen::EigenSolver<Eigen::MatrixXd> es(Ksamples[0]);
        if (es.info() != Eigen::Success) throw ModelError("decouple: adjacency eigensolve failed");
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(es.eigenvectors());
        const auto& sv = svd.singularValues();
        if (!(sv[sv.size() - 1] > 1e-12 * sv[0]))
            throw ModelError("decouple: adjacency is not diagonalizable");
        dec.S = es.eigenvectors().inverse();
        Sinv = es.eigenvectors();
        Eigen::VectorXcd lv = es.eigenvalues();
        for (std::size_t p = 0; p < grid.size(); ++p) dec.lambdas.push_back(lv);
    }

    // distinctness hypothesis per grid point
    double lam_max = 0.0;
    for (const auto& lv : dec.lambdas)
        for (int l = 0; l < N; ++l) lam_max = std::max(lam_max, std::abs(lv[l]));
    const double tol = 1e-10 * (1.0 + lam_max);
    for (std::size_t p = 0; p < dec.lambdas.size(); ++p)
        for (int a = 0; a < N; ++a)
            for (int b = a + 1; b < N; ++b)
                if (std::abs(dec.lambdas[p][a] - dec.lambdas[p][b]) <= tol)
                    throw ModelError(
                        "decouple: repeated adjacency eigenvalues at grid point " +
                        std::to_string(p) + " (distinctness hypothesis violated)");

    // residual of the similarity on every grid point
    for (std::size_t p = 0; p < grid.size(); ++p) {
        Eigen::MatrixXcd D = (dec.S * Ksamples[p] * Sinv);
        for (int l = 0; l < N; ++l) D(l, l) -= dec.lambdas[p][l];
        const double kn = Ksamples[p].norm();
        dec.max_residual = std::max(dec.max_residual, kn > 0 ? D.norm() / kn : D.norm());
    }

    // per-block complex samples A + lambda_l bc
    dec.blocks.assign(N, {});
    for (int l = 0; l < N; ++l) dec.blocks[l].reserve(grid.size());
    for (std::size_t p = 0; p < grid.size(); ++p) {
        NodeSample node = sample_node(spec, grid.points[p]);
        Eigen::MatrixXd bc = node.b * node.c;
        for (int l = 0; l < N; ++l)
            dec.blocks[l].push_back(node.A.cast<std::complex<double>>() +
                                    dec.lambdas[p][l] * bc.cast<std::complex<double>>());
    }

    Eigen::VectorXcd bvec = Eigen::VectorXcd::Zero(N);
    if (spec.broadcast.size() == static_cast<Eigen::Index>(N))
        bvec = spec.broadcast.cast<std::complex<double>>();
    else
        bvec[0] = 1.0;
    dec.transformed_broadcast = dec.S * bvec;
    return dec;
}

RobustSyncReport check_robust_sync(const NetworkSpec& spec, const ParamGrid& grid,
                                   const Tolerances& tol) {
    spec.validate();
    RobustSyncReport rep;

    // adjacency-spectrum precheck: lambda_l(theta) sharing across (theta, l)
    const auto Kexpr = spec.adjacency_exprs();
    std::vector<Eigen::VectorXcd> adj_spec;
    adj_spec.reserve(grid.size());
    double lam_max = 0.0;
    for (const auto& th : grid.points) {
        Eigen::MatrixXd K = sample_adjacency(Kexpr, th);
        Eigen::EigenSolver<Eigen::MatrixXd> es(K, false);
        adj_spec.push_back(es.eigenvalues());
        for (int l = 0; l < spec.N; ++l)
            lam_max = std::max(lam_max, std::abs(es.eigenvalues()[l]));
    }
    const double tol_adj = tol.tol_spec_base * (1.0 + lam_max);

    rep.adjacency_spectrum.verdict = Verdict::Pass;
    rep.adjacency_spectrum.summary =
        "adjacency eigenvalue curves distinct and injective on the grid";
    {
        struct Occ {
            int p, l;
        };
        std::vector<Occ> occ;
        for (std::size_t p = 0; p < adj_spec.size(); ++p)
            for (int l = 0; l < spec.N; ++l) occ.push_back({static_cast<int>(p), l});
        std::vector<int> parent(occ.size());
        std::iota(parent.begin(), parent.end(), 0);
        std::function<int(int)> find = [&](int x) {
            while (parent[x] != x) x = parent[x] = parent[parent[x]];
            return x;
        };
        for (std::size_t a = 0; a < occ.size(); ++a)
            for (std::size_t b = a + 1; b < occ.size(); ++b)
                if (std::abs(adj_spec[occ[a].p][occ[a].l] - adj_spec[occ[b].p][occ[b].l]) <=
                    tol_adj) {
                    int ra = find(static_cast<int>(a)), rb = find(static_cast<int>(b));
                    if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
                }
        std::vector<std::vector<int>> members(occ.size());
        for (std::size_t a = 0; a < occ.size(); ++a) members[find(static_cast<int>(a))].push_back(static_cast<int>(a));
        for (const auto& cluster : members) {
            if (cluster.size() < 2) continue;
            std::vector<int> pts;
            bool same_point_pair = false;
            std::complex<double> center{0, 0};
            for (int a : cluster) {
                pts.push_back(occ[a].p);
                center += adj_spec[occ[a].p][occ[a].l];
            }
            center /= static_cast<double>(cluster.size());
            std::sort(pts.begin(), pts.end());
            same_point_pair = std::adjacent_find(pts.begin(), pts.end()) != pts.end();
            pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
            if (pts.size() >= 2 || same_point_pair) {
                rep.adjacency_spectrum.verdict = Verdict::Fail;
                rep.adjacency_spectrum.summary =
                    "adjacency eigenvalue shared across (theta, l) pairs; identical decoupled "
                    "blocks refute the necessary conditions";
                Witness w;
                w.kind = pts.size() >= 2 ? "shared-adjacency-eigenvalue"
                                         : "repeated-adjacency-eigenvalue";
                w.value = center;
                w.scalar = static_cast<double>(pts.size());
                for (std::size_t q = 0; q < std::min<std::size_t>(pts.size(), 8); ++q)
                    w.thetas.push_back(grid.points[pts[q]]);
                rep.adjacency_spectrum.witnesses.push_back(std::move(w));
            }
        }
    }

    // assembled-system diagnostics
    ParametricSystem sys = assemble(spec);
    SampledEnsemble ens = sample_ensemble(sys, grid);
    rep.base = run_diagnostics(sys, ens, tol);

    if (rep.adjacency_spectrum.failed()) {
        rep.block_simple.verdict = Verdict::NotApplicable;
        rep.block_simple.summary = "decoupling skipped: adjacency distinctness fails";
        rep.cross_disjoint = rep.block_simple;
        rep.overall = Classification::NecessaryViolated;
        return rep;
    }

    DecoupledNetwork dec = decouple(spec, grid);
    const int n = spec.node_dim();

    double block_lam_max = 0.0;
    std::vector<std::vector<Eigen::VectorXcd>> bspec(spec.N);
    for (int l = 0; l < spec.N; ++l) {
        bspec[l].reserve(grid.size());
        for (std::size_t p = 0; p < grid.size(); ++p) {
            Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(dec.blocks[l][p], false);
            bspec[l].push_back(es.eigenvalues());
            for (int k = 0; k < n; ++k)
                block_lam_max = std::max(block_lam_max, std::abs(es.eigenvalues()[k]));
        }
    }
    const double tol_blk = tol.tol_spec_base * (1.0 + block_lam_max);

    rep.block_simple.verdict = Verdict::Pass;
    rep.block_simple.summary = "block spectra simple for every (theta, l)";
    for (int l = 0; l < spec.N && !rep.block_simple.failed(); ++l)
        for (std::size_t p = 0; p < grid.size(); ++p) {
            double gap = std::numeric_limits<double>::infinity();
            for (int a = 0; a < n; ++a)
                for (int b = a + 1; b < n; ++b)
                    gap = std::min(gap, std::abs(bspec[l][p][a] - bspec[l][p][b]));
            if (n >= 2 && !(gap > tol_blk)) {
                rep.block_simple.verdict = Verdict::Fail;
                rep.block_simple.summary = "repeated block eigenvalue";
                Witness w;
                w.kind = "multiple-block-eigenvalue";
                w.value = bspec[l][p][0];
                w.scalar = gap;
                w.thetas.push_back(grid.points[p]);
                w.note = "block l=" + std::to_string(l) +
                         "; inferred: the adjacency eigenvalue crossing makes the block "
                         "polynomial acquire a double root";
                rep.block_simple.witnesses.push_back(std::move(w));
                break;
            }
        }

    rep.cross_disjoint.verdict = Verdict::Pass;
    rep.cross_disjoint.summary = "block spectra disjoint across distinct (theta, l) pairs";
    {
        struct Occ {
            int p, l, k;
        };
        std::vector<Occ> occ;
        for (int l = 0; l < spec.N; ++l)
            for (std::size_t p = 0; p < grid.size(); ++p)
                for (int k = 0; k < n; ++k) occ.push_back({static_cast<int>(p), l, k});
        // pairwise scan is O(K^2) but K = N * grid * n stays desk-scale
        bool done = false;
        for (std::size_t a = 0; a < occ.size() && !done; ++a)
            for (std::size_t b = a + 1; b < occ.size(); ++b) {
                if (occ[a].p == occ[b].p && occ[a].l == occ[b].l) continue;
                if (std::abs(bspec[occ[a].l][occ[a].p][occ[a].k] -
                             bspec[occ[b].l][occ[b].p][occ[b].k]) <= tol_blk) {
                    rep.cross_disjoint.verdict = Verdict::Fail;
                    rep.cross_disjoint.summary =
                        "two (theta, l) pairs share a block eigenvalue";
                    Witness w;
                    w.kind = "cross-shared-eigenvalue";
                    w.value = bspec[occ[a].l][occ[a].p][occ[a].k];
                    w.thetas.push_back(grid.points[occ[a].p]);
                    w.thetas.push_back(grid.points[occ[b].p]);
                    w.note = "blocks l=" + std::to_string(occ[a].l) + " and l=" +
                             std::to_string(occ[b].l);
                    rep.cross_disjoint.witnesses.push_back(std::move(w));
                    done = true;
                    break;
                }
            }
    }

    const bool main_ok = rep.base.main_i.passed() && rep.base.main_ii.passed() &&
                         rep.base.main_iii.passed() && rep.base.main_iv.passed();
    if (rep.base.overall == Classification::NecessaryViolated) {
        rep.overall = Classification::NecessaryViolated;
    } else if (main_ok && rep.block_simple.passed() && rep.cross_disjoint.passed()) {
        rep.overall = Classification::CertifiedSufficient;
    } else {
        rep.overall = Classification::Inconclusive;
    }
    return rep;
}

SyncResult sync_synthesize(const NetworkSpec& spec, const TargetProfile& node_target,
                           const Eigen::VectorXd& x0, std::optional<double> zoh_step,
                           const SynthesisConfig& cfg) {
    spec.validate();
    const int n = spec.node_dim();
    const int nN = n * spec.N;
    if (node_target.dim() != n) throw ModelError("sync: node target must have dimension n");
    if (x0.size() != nN) throw ModelError("sync: x0 must have dimension n*N");

    ParametricSystem sys = assemble(spec);
    const int count = cfg.grid_count > 0 ? cfg.grid_count : default_grid_count(spec.domain);
    ParamGrid grid = make_grid(spec.domain, count);
    SampledEnsemble ens = sample_ensemble(sys, grid);
    if (spec.mode == TimeMode::Continuous) {
        if (!zoh_step) throw ModelError("sync: continuous networks need a ZOH step");
        ens = discretize_zoh(ens, *zoh_step);
    }

    // replicated targets 1 (x) x*(theta)
    std::vector<Eigen::VectorXd> reps(grid.size());
    for (std::size_t p = 0; p < grid.size(); ++p) {
        Eigen::VectorXd xs = node_target.at(grid, p);
        reps[p].resize(nN);
        for (int i = 0; i < spec.N; ++i) reps[p].segment(i * n, n) = xs;
    }

    // free-response correction, transition powers cached across the schedule
    std::vector<Eigen::MatrixXd> Phi(grid.size(), Eigen::MatrixXd::Identity(nN, nN));
    int curT = 0;
    auto target_fn = [&](int /*D*/, int T) {
        if (T < curT) {
            for (auto& P : Phi) P = Eigen::MatrixXd::Identity(nN, nN);
            curT = 0;
        }
        for (; curT < T; ++curT)
            for (std::size_t p = 0; p < grid.size(); ++p) Phi[p] = ens.A[p] * Phi[p];
        std::vector<Eigen::VectorXd> out(grid.size());
        for (std::size_t p = 0; p < grid.size(); ++p) out[p] = reps[p] - Phi[p] * x0;
        return out;
    };

    SyncResult res;
    SynthesisResult sr = synthesize_horizon(ens, target_fn, cfg);
    res.control = sr.control;
    res.converged = sr.converged;

    // full target profile for the rollout report
    TargetProfile full_target = [&] {
        if (node_target.is_tabulated()) {
            std::vector<Eigen::VectorXd> pts = reps;
            return TargetProfile::table(std::move(pts));
        }
        std::vector<Expr> exprs;
        exprs.reserve(nN);
        for (int i = 0; i < spec.N; ++i)
            for (int k = 0; k < n; ++k) exprs.push_back(node_target.exprs[k]);
        return TargetProfile::expressions(std::move(exprs));
    }();

    std::vector<Eigen::VectorXd> inputs = control_to_inputs(res.control);
    Trajectory traj = rollout(ens, inputs, {x0});
    res.error = sup_error(traj, full_target, sys, ens, inputs, {x0}, cfg.revalidation_factor);
    return res;
}

std::optional<NetworkSpec> load_network_spec(const std::string& document) {
    json doc = json::parse(document, nullptr, false);
    if (!doc.is_object() || !doc.contains("network")) return std::nullopt;
    const json& net = doc.at("network");

    ParametricSystem shell = load_model(document);  // validates domain/mode sections
    NetworkSpec spec;
    spec.domain = shell.domain;
    spec.mode = shell.mode;
    spec.N = net.value("N", 0);
    const int d = spec.domain.d;

    auto parse_vec = [&](const json& j, const char* name) {
        std::vector<Expr> out;
        if (!j.is_array()) throw ModelError(std::string("network: ") + name + " must be an array");
        for (const auto& e : j) {
            std::string text = e.is_string() ? e.get<std::string>() : e.dump();
            out.push_back(parse_expr(text, d));
        }
        return out;
    };

    if (!net.contains("node") || !net.at("node").is_object())
        throw ModelError("network: missing node section {A, b, c}");
    const json& node = net.at("node");
    if (!node.contains("A") || !node.at("A").is_array())
        throw ModelError("network: node.A missing");
    for (const auto& row : node.at("A")) spec.node_A.push_back(parse_vec(row, "node.A row"));
    spec.node_b = parse_vec(node.at("b"), "node.b");
    spec.node_c = parse_vec(node.at("c"), "node.c");

    if (net.contains("variant")) {
        std::string v = net.at("variant").get<std::string>();
        if (v == "directed-ring")
            spec.ring = RingVariant::Directed;
        else if (v == "symmetric-ring")
            spec.ring = RingVariant::Symmetric;
        else
            throw ModelError("network: variant must be directed-ring or symmetric-ring");
        spec.ring_weight = parse_expr(net.value("weight", "theta"), d);
    } else if (net.contains("adjacency")) {
        for (const auto& row : net.at("adjacency"))
            spec.adjacency.push_back(parse_vec(row, "adjacency row"));
    } else {
        throw ModelError("network: need a ring variant or an explicit adjacency");
    }

    if (net.contains("broadcast")) {
        const auto& b = net.at("broadcast");
        spec.broadcast.resize(static_cast<int>(b.size()));
        for (int i = 0; i < spec.broadcast.size(); ++i) spec.broadcast[i] = b[i].get<double>();
    }
    spec.validate();
    return spec;
}

std::string ring_model_document(const NetworkSpec& spec) {
    spec.validate();
    ParametricSystem sys = assemble(spec);

    json doc;
    doc["system"] = {{"n", sys.n},
                     {"m", sys.m},
                     {"mode", sys.mode == TimeMode::Continuous ? "continuous" : "discrete"}};
    json intervals = json::array();
    for (const auto& box : spec.domain.boxes) {
        if (spec.domain.d == 1)
            intervals.push_back({box[0].lo, box[0].hi});
    }
    if (spec.domain.d == 1)
        doc["domain"] = {{"intervals", intervals}};
    else {
        json boxes = json::array();
        for (const auto& box : spec.domain.boxes) {
            json b = json::array();
            for (const auto& iv : box) b.push_back({iv.lo, iv.hi});
            boxes.push_back(b);
        }
        doc["domain"] = {{"boxes", boxes}};
    }

    auto matrix_json = [](const std::vector<std::vector<Expr>>& M) {
        json rows = json::array();
        for (const auto& r : M) {
            json row = json::array();
            for (const auto& e : r) row.push_back(e.str());
            rows.push_back(row);
        }
        return rows;
    };
    doc["A"] = matrix_json(sys.A);
    doc["B"] = matrix_json(sys.B);

    json node;
    node["A"] = matrix_json(spec.node_A);
    json bj = json::array(), cj = json::array();
    for (const auto& e : spec.node_b) bj.push_back(e.str());
    for (const auto& e : spec.node_c) cj.push_back(e.str());
    node["b"] = bj;
    node["c"] = cj;

    json net;
    net["N"] = spec.N;
    if (spec.ring) {
        net["variant"] =
            *spec.ring == RingVariant::Directed ? "directed-ring" : "symmetric-ring";
        net["weight"] = spec.ring_weight.str();
    }
    net["node"] = node;
    if (spec.broadcast.size() == spec.N) {
        json bb = json::array();
        for (int i = 0; i < spec.N; ++i) bb.push_back(spec.broadcast[i]);
        net["broadcast"] = bb;
    }
    doc["network"] = net;
    return doc.dump(2) + "\n";
}

}  // namespace ensctl
