#include "ensctl/diagnostics.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ensctl/assignment.hpp"

namespace ensctl {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

std::string theta_str(const Eigen::VectorXd& th) {
    std::string s = "(";
    for (int i = 0; i < th.size(); ++i) {
        if (i) s += ", ";
        s += std::to_string(th[i]);
    }
    return s + ")";
}

// union-find over eigenvalue occurrences
struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);  // ties to first-seen
    }
};

struct EigenClusters {
    // flat occurrence list: (point index, eigenvalue index)
    std::vector<std::pair<int, int>> occ;
    std::vector<int> root;  // cluster root per occurrence
};

EigenClusters cluster_eigenvalues(const SpectrumCloud& cloud, double tol_spec) {
    EigenClusters out;
    for (std::size_t p = 0; p < cloud.eigenvalues.size(); ++p)
        for (int k = 0; k < cloud.eigenvalues[p].size(); ++k)
            out.occ.emplace_back(static_cast<int>(p), k);
    UnionFind uf(out.occ.size());
    for (std::size_t a = 0; a < out.occ.size(); ++a) {
        auto va = cloud.eigenvalues[out.occ[a].first][out.occ[a].second];
        for (std::size_t b = a + 1; b < out.occ.size(); ++b) {
            auto vb = cloud.eigenvalues[out.occ[b].first][out.occ[b].second];
            if (std::abs(va - vb) <= tol_spec) uf.unite(static_cast<int>(a), static_cast<int>(b));
        }
    }
    out.root.resize(out.occ.size());
    for (std::size_t a = 0; a < out.occ.size(); ++a) out.root[a] = uf.find(static_cast<int>(a));
    return out;
}

}  // namespace

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Pass: return "pass";
        case Verdict::Fail: return "fail";
        case Verdict::Inconclusive: return "inconclusive";
        case Verdict::NotApplicable: return "not-applicable";
    }
    return "?";
}

const char* to_string(Classification c) {
    switch (c) {
        case Classification::CertifiedSufficient: return "certified-sufficient";
        case Classification::NecessaryViolated: return "necessary-violated";
        case Classification::Inconclusive: return "inconclusive";
    }
    return "?";
}

KalmanResult kalman_rank(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double rank_tol) {
    const int n = static_cast<int>(A.rows());
    const int m = static_cast<int>(B.cols());
    if (A.cols() != n || B.rows() != n) throw ModelError("kalman_rank: dimension mismatch");
    if (!A.allFinite() || !B.allFinite()) throw ModelError("kalman_rank: non-finite input");

    Eigen::MatrixXd K(n, n * m);
    Eigen::MatrixXd block = B;
    for (int k = 0; k < n; ++k) {
        K.middleCols(k * m, m) = block;
        if (k + 1 < n) block = A * block;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(K);
    KalmanResult res;
    res.singular_values = svd.singularValues();
    const double s0 = res.singular_values.size() ? res.singular_values[0] : 0.0;
    if (s0 > 0.0)
        for (int i = 0; i < res.singular_values.size(); ++i)
            if (res.singular_values[i] > rank_tol * s0) ++res.rank;
    return res;
}

std::vector<int> hermite_indices(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                 double rank_tol) {
    const int n = static_cast<int>(A.rows());
    const int m = static_cast<int>(B.cols());
    if (A.cols() != n || B.rows() != n) throw ModelError("hermite_indices: dimension mismatch");

    std::vector<int> K(m, 0);
    Eigen::MatrixXd Q(n, n);  // orthonormal basis of the selected span
    int r = 0;

    for (int j = 0; j < m && r < n; ++j) {
        Eigen::VectorXd v = B.col(j);
        for (int k = 0; k < n && r < n; ++k) {
            double norm = v.norm();
            if (!(norm > 0.0)) break;
            Eigen::VectorXd w = v / norm;
            // twice-is-enough re-orthogonalization
            w -= Q.leftCols(r) * (Q.leftCols(r).transpose() * w);
            w -= Q.leftCols(r) * (Q.leftCols(r).transpose() * w);
            double rem = w.norm();
            if (rem <= rank_tol) break;  // first dependent power ends the block
            Q.col(r++) = w / rem;
            ++K[j];
            v = A * v;
        }
    }
    return K;
}

SpectrumCloud spectrum_cloud(const SampledEnsemble& ens, double rank_tol) {
    if (ens.size() == 0) throw ModelError("spectrum_cloud: empty ensemble");
    SpectrumCloud cloud;
    const int n = ens.n();

    for (std::size_t p = 0; p < ens.size(); ++p) {
        Eigen::EigenSolver<Eigen::MatrixXd> es(ens.A[p]);
        if (es.info() != Eigen::Success)
            throw ModelError("spectrum_cloud: eigensolver failed at theta=" +
                             theta_str(ens.grid.points[p]));
        cloud.eigenvalues.push_back(es.eigenvalues());
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(es.eigenvectors());
        const auto& sv = svd.singularValues();
        double cond = kInf;
        if (sv.size() && sv[sv.size() - 1] > rank_tol * sv[0]) cond = sv[0] / sv[sv.size() - 1];
        cloud.eigvec_condition.push_back(cond);
        for (int k = 0; k < n; ++k)
            cloud.max_abs = std::max(cloud.max_abs, std::abs(es.eigenvalues()[k]));
    }

    // branch labels: canonical sort at the first point, then (d=1) continued
    // by minimal-total-distance assignment between consecutive points
    auto canonical = [n](const Eigen::VectorXcd& ev) {
        std::vector<int> idx(n);
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](int a, int b) {
            if (ev[a].real() != ev[b].real()) return ev[a].real() < ev[b].real();
            return ev[a].imag() < ev[b].imag();
        });
        return idx;
    };

    cloud.branch.resize(ens.size());
    cloud.branch[0] = canonical(cloud.eigenvalues[0]);
    if (ens.grid.d == 1) {
        cloud.continued_branches = true;
        for (std::size_t p = 0; p + 1 < ens.size(); ++p) {
            Eigen::MatrixXd cost(n, n);
            for (int b = 0; b < n; ++b)
                for (int j = 0; j < n; ++j)
                    cost(b, j) = std::abs(cloud.eigenvalues[p][cloud.branch[p][b]] -
                                          cloud.eigenvalues[p + 1][j]);
            cloud.branch[p + 1] = min_cost_assignment(cost);
        }
    } else {
        for (std::size_t p = 1; p < ens.size(); ++p)
            cloud.branch[p] = canonical(cloud.eigenvalues[p]);
    }
    return cloud;
}

HermiteProfile hermite_profile(const SampledEnsemble& ens, double rank_tol) {
    HermiteProfile prof;
    for (std::size_t p = 0; p < ens.size(); ++p)
        prof.per_point.push_back(hermite_indices(ens.A[p], ens.B[p], rank_tol));
    prof.constant = true;
    for (const auto& k : prof.per_point)
        if (k != prof.per_point.front()) {
            prof.constant = false;
            break;
        }
    return prof;
}

NecessaryOutcome check_necessary(const SampledEnsemble& ens, const SpectrumCloud& cloud,
                                 double tol_spec, double rank_tol) {
    NecessaryOutcome out;
    const int n = ens.n();
    const int m = ens.m();

    out.e1.verdict = Verdict::Pass;
    out.e1.summary = "reachable at every grid point";
    for (std::size_t p = 0; p < ens.size(); ++p) {
        KalmanResult kr = kalman_rank(ens.A[p], ens.B[p], rank_tol);
        if (kr.rank != n) {
            out.e1.verdict = Verdict::Fail;
            out.e1.summary = "Kalman rank defect on the grid";
            Witness w;
            w.kind = "rank-defect";
            w.scalar = kr.rank;
            w.thetas.push_back(ens.grid.points[p]);
            w.note = "rank " + std::to_string(kr.rank) + " < n = " + std::to_string(n);
            out.e1.witnesses.push_back(std::move(w));
            break;  // first failing point is the witness
        }
    }

    EigenClusters cl = cluster_eigenvalues(cloud, tol_spec);
    out.e2.verdict = Verdict::Pass;
    out.e2.summary = "no eigenvalue shared by m+1 distinct grid points (grid-certified)";
    std::vector<int> roots(cl.root);
    std::sort(roots.begin(), roots.end());
    roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
    for (int root : roots) {
        std::vector<int> pts;
        std::complex<double> center{0.0, 0.0};
        int count = 0;
        for (std::size_t a = 0; a < cl.occ.size(); ++a) {
            if (cl.root[a] != root) continue;
            pts.push_back(cl.occ[a].first);
            center += cloud.eigenvalues[cl.occ[a].first][cl.occ[a].second];
            ++count;
        }
        std::sort(pts.begin(), pts.end());
        pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
        if (static_cast<int>(pts.size()) >= m + 1) {
            out.e2.verdict = Verdict::Fail;
            out.e2.summary = "eigenvalue shared by at least m+1 distinct grid points";
            Witness w;
            w.kind = "shared-eigenvalue";
            w.value = center / static_cast<double>(count);
            w.scalar = static_cast<double>(pts.size());
            for (int p : pts) w.thetas.push_back(ens.grid.points[p]);
            out.e2.witnesses.push_back(std::move(w));
        }
    }
    return out;
}

MainOutcome check_main(const SampledEnsemble& ens, const SpectrumCloud& cloud,
                       const HermiteProfile& hermite, double tol_spec, double cond_max,
                       double rank_tol) {
    MainOutcome out;
    if (ens.grid.d != 1) {
        const char* why = "Theorem stated for P contained in R (d = 1)";
        for (CheckOutcome* c : {&out.i, &out.ii, &out.iii, &out.iv, &out.remark2}) {
            c->verdict = Verdict::NotApplicable;
            c->summary = why;
        }
        return out;
    }

    NecessaryOutcome nec = check_necessary(ens, cloud, tol_spec, rank_tol);
    out.i = nec.e1;

    out.ii.verdict = hermite.constant ? Verdict::Pass : Verdict::Fail;
    out.ii.summary = hermite.constant ? "Hermite indices constant on grid"
                                      : "Hermite indices vary across the grid";
    if (!hermite.constant) {
        for (std::size_t p = 1; p < hermite.per_point.size(); ++p) {
            if (hermite.per_point[p] != hermite.per_point.front()) {
                Witness w;
                w.kind = "hermite-jump";
                w.thetas.push_back(ens.grid.points[0]);
                w.thetas.push_back(ens.grid.points[p]);
                std::string a, b;
                for (int v : hermite.per_point.front()) a += std::to_string(v) + " ";
                for (int v : hermite.per_point[p]) b += std::to_string(v) + " ";
                w.note = "indices (" + a + ") vs (" + b + ")";
                out.ii.witnesses.push_back(std::move(w));
                break;
            }
        }
    }

    // (iii): no cluster may span two distinct grid points
    EigenClusters cl = cluster_eigenvalues(cloud, tol_spec);
    out.iii.verdict = Verdict::Pass;
    out.iii.summary = "spectra pairwise disjoint on the grid";
    {
        std::vector<int> roots(cl.root);
        std::sort(roots.begin(), roots.end());
        roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
        for (int root : roots) {
            std::vector<int> pts;
            std::complex<double> center{0.0, 0.0};
            int count = 0;
            for (std::size_t a = 0; a < cl.occ.size(); ++a) {
                if (cl.root[a] != root) continue;
                pts.push_back(cl.occ[a].first);
                center += cloud.eigenvalues[cl.occ[a].first][cl.occ[a].second];
                ++count;
            }
            std::sort(pts.begin(), pts.end());
            pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
            if (pts.size() >= 2) {
                out.iii.verdict = Verdict::Fail;
                out.iii.summary = "two grid points share an eigenvalue";
                Witness w;
                w.kind = "shared-eigenvalue";
                w.value = center / static_cast<double>(count);
                w.scalar = static_cast<double>(pts.size());
                w.thetas.push_back(ens.grid.points[pts[0]]);
                w.thetas.push_back(ens.grid.points[pts[1]]);
                out.iii.witnesses.push_back(std::move(w));
            }
        }
    }

    // (iv): per-point minimal pairwise gap certifies algebraic multiplicity one
    out.iv.verdict = Verdict::Pass;
    out.iv.summary = "eigenvalues simple at every grid point";
    for (std::size_t p = 0; p < ens.size(); ++p) {
        const auto& ev = cloud.eigenvalues[p];
        double gap = kInf;
        std::complex<double> at{0.0, 0.0};
        for (int a = 0; a < ev.size(); ++a)
            for (int b = a + 1; b < ev.size(); ++b)
                if (std::abs(ev[a] - ev[b]) < gap) {
                    gap = std::abs(ev[a] - ev[b]);
                    at = ev[a];
                }
        if (ev.size() >= 2 && !(gap > tol_spec)) {
            out.iv.verdict = Verdict::Fail;
            out.iv.summary = "repeated eigenvalue (gap below tolerance)";
            Witness w;
            w.kind = "multiple-eigenvalue";
            w.value = at;
            w.scalar = gap;
            w.thetas.push_back(ens.grid.points[p]);
            out.iv.witnesses.push_back(std::move(w));
        }
    }

    double max_cond = 0.0;
    for (double c : cloud.eigvec_condition) max_cond = std::max(max_cond, c);
    out.remark2.verdict = max_cond <= cond_max ? Verdict::Pass : Verdict::Fail;
    out.remark2.summary =
        "max eigenvector condition number over grid = " + std::to_string(max_cond) +
        "; the connectedness half of Remark 2 is informational only (spectrum cloud emitted)";
    out.remark2.witnesses.push_back(
        {.kind = "condition-number", .value = {}, .scalar = max_cond, .thetas = {}, .note = ""});
    return out;
}

CheckOutcome check_const_char_poly(const SampledEnsemble& ens, double coeff_tol) {
    CheckOutcome out;
    if (ens.grid.d != 1) {
        out.verdict = Verdict::NotApplicable;
        out.summary = "stated for a compact interval in R";
        return out;
    }
    const int n = ens.n();

    // Faddeev-LeVerrier: chi(z) = z^n + c_{n-1} z^{n-1} + ... + c_0
    auto char_coeffs = [n](const Eigen::MatrixXd& A) {
        Eigen::VectorXd c(n);
        Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
        double a = 1.0;
        for (int k = 1; k <= n; ++k) {
            M = A * M + a * Eigen::MatrixXd::Identity(n, n);
            a = -(A * M).trace() / k;
            c[n - k] = a;
        }
        return c;
    };

    std::vector<Eigen::VectorXd> coeffs;
    coeffs.reserve(ens.size());
    for (const auto& A : ens.A) coeffs.push_back(char_coeffs(A));

    out.verdict = Verdict::Pass;
    double a0_min = kInf, a0_max = -kInf;
    for (const auto& c : coeffs) {
        a0_min = std::min(a0_min, c[0]);
        a0_max = std::max(a0_max, c[0]);
    }
    for (int k = 1; k < n; ++k) {
        double lo = kInf, hi = -kInf;
        for (const auto& c : coeffs) {
            lo = std::min(lo, c[k]);
            hi = std::max(hi, c[k]);
        }
        if (hi - lo > coeff_tol) {
            out.verdict = Verdict::Fail;
            Witness w;
            w.kind = "varying-coefficient";
            w.scalar = hi - lo;
            w.note = "coefficient of z^" + std::to_string(k) + " varies by " +
                     std::to_string(hi - lo);
            out.witnesses.push_back(std::move(w));
        }
    }
    out.summary = out.verdict == Verdict::Pass
                      ? "only the constant characteristic coefficient varies (a0 range " +
                            std::to_string(a0_min) + " .. " + std::to_string(a0_max) + ")"
                      : "higher characteristic coefficients vary across the grid";
    return out;
}

CheckOutcome check_scaling_family(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                  const ParameterDomain& domain, double rank_tol,
                                  double tol_spec_base) {
    CheckOutcome out;
    if (domain.d != 1) {
        out.verdict = Verdict::NotApplicable;
        out.summary = "scaling-family theorems stated for P contained in R";
        return out;
    }
    const int n = static_cast<int>(A.rows());

    auto matrix_rank = [rank_tol](const Eigen::MatrixXd& M) {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
        const auto& sv = svd.singularValues();
        int r = 0;
        if (sv.size() && sv[0] > 0.0)
            for (int i = 0; i < sv.size(); ++i)
                if (sv[i] > rank_tol * sv[0]) ++r;
        return r;
    };

    const int rank_A = matrix_rank(A);
    const int rank_B = matrix_rank(B);

    if (domain.contains_zero()) {
        if (rank_A == n && rank_B == n) {
            out.verdict = Verdict::Pass;
            out.summary = "0 in P: rank A = rank B = n, uniformly ensemble controllable (iff)";
        } else {
            out.verdict = Verdict::Fail;
            out.summary = "0 in P: rank condition fails, not uniformly ensemble controllable";
            Witness w;
            w.kind = "rank-defect";
            w.scalar = std::min(rank_A, rank_B);
            w.note = "rank A = " + std::to_string(rank_A) + ", rank B = " + std::to_string(rank_B) +
                     ", n = " + std::to_string(n);
            out.witnesses.push_back(std::move(w));
        }
        return out;
    }

    // 0 not in P: necessary part first
    const int kal = kalman_rank(A, B, rank_tol).rank;
    if (kal != n || rank_A != n) {
        out.verdict = Verdict::Fail;
        out.summary = "0 not in P: (A,B) controllable and A invertible is necessary";
        Witness w;
        w.kind = kal != n ? "uncontrollable-pair" : "singular-A";
        w.scalar = kal != n ? kal : rank_A;
        out.witnesses.push_back(std::move(w));
        return out;
    }

    Eigen::EigenSolver<Eigen::MatrixXd> es(A);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(es.eigenvectors());
    const auto& sv = svd.singularValues();
    const bool diagonalizable = sv.size() && sv[sv.size() - 1] > rank_tol * sv[0];

    double theta_abs_max = 0.0, lam_abs_max = 0.0;
    for (const auto& box : domain.boxes)
        theta_abs_max = std::max({theta_abs_max, std::abs(box[0].lo), std::abs(box[0].hi)});
    for (int i = 0; i < n; ++i) lam_abs_max = std::max(lam_abs_max, std::abs(es.eigenvalues()[i]));
    const double tol = tol_spec_base * (1.0 + lam_abs_max * theta_abs_max);

    // distinct eigenvalues, clustered at tol
    std::vector<std::complex<double>> lams;
    for (int i = 0; i < n; ++i) {
        bool seen = false;
        for (const auto& l : lams)
            if (std::abs(l - es.eigenvalues()[i]) <= tol) {
                seen = true;
                break;
            }
        if (!seen) lams.push_back(es.eigenvalues()[i]);
    }

    bool disjoint = true;
    Witness overlap;
    const bool all_real = std::all_of(lams.begin(), lams.end(),
                                      [tol](const auto& l) { return std::abs(l.imag()) <= tol; });
    if (all_real) {
        for (std::size_t a = 0; a < lams.size() && disjoint; ++a)
            for (std::size_t b = a + 1; b < lams.size() && disjoint; ++b)
                for (const auto& boxa : domain.boxes) {
                    Interval ia{lams[a].real() * boxa[0].lo, lams[a].real() * boxa[0].hi};
                    if (ia.lo > ia.hi) std::swap(ia.lo, ia.hi);
                    for (const auto& boxb : domain.boxes) {
                        Interval ib{lams[b].real() * boxb[0].lo, lams[b].real() * boxb[0].hi};
                        if (ib.lo > ib.hi) std::swap(ib.lo, ib.hi);
                        if (ia.lo <= ib.hi + tol && ib.lo <= ia.hi + tol) {
                            disjoint = false;
                            overlap.kind = "interval-overlap";
                            overlap.value = lams[a];
                            overlap.note = "lambda_k P and lambda_l P intersect";
                            break;
                        }
                    }
                    if (!disjoint) break;
                }
    } else {
        // complex eigenvalues: compare the scaled point sets on a grid
        ParamGrid g = make_grid(domain, kDefaultGridCount1d);
        for (std::size_t a = 0; a < lams.size() && disjoint; ++a)
            for (std::size_t b = a + 1; b < lams.size() && disjoint; ++b)
                for (const auto& pa : g.points) {
                    for (const auto& pb : g.points)
                        if (std::abs(lams[a] * pa[0] - lams[b] * pb[0]) <= tol) {
                            disjoint = false;
                            overlap.kind = "pointset-overlap";
                            overlap.value = lams[a] * pa[0];
                            overlap.thetas = {pa, pb};
                            break;
                        }
                    if (!disjoint) break;
                }
    }

    if (diagonalizable && disjoint) {
        out.verdict = Verdict::Pass;
        out.summary = "0 not in P: A diagonalizable and lambda_k P pairwise disjoint";
    } else {
        out.verdict = Verdict::Inconclusive;
        out.summary = diagonalizable
                          ? "0 not in P: scaled spectra overlap; sufficient condition not met"
                          : "0 not in P: A not numerically diagonalizable";
        if (!diagonalizable) {
            Witness w;
            w.kind = "defective-A";
            out.witnesses.push_back(std::move(w));
        } else {
            out.witnesses.push_back(std::move(overlap));
        }
    }
    return out;
}

CheckOutcome dimension_gate(const ParameterDomain& domain, const SpectrumCloud& cloud,
                            double line_tol) {
    CheckOutcome out;
    if (domain.d >= 3) {
        out.verdict = Verdict::Fail;
        out.summary = "dim P = " + std::to_string(domain.d) +
                      " > 2: not uniformly ensemble controllable";
        Witness w;
        w.kind = "dimension";
        w.scalar = domain.d;
        out.witnesses.push_back(std::move(w));
        return out;
    }
    if (domain.d == 1) {
        out.verdict = Verdict::Pass;
        out.summary = "d = 1: gate vacuous";
        return out;
    }

    // d = 2: look for an eigenvalue branch inside a line through the origin
    const int n = static_cast<int>(cloud.eigenvalues.front().size());
    for (int b = 0; b < n; ++b) {
        double sxx = 0.0, sxy = 0.0, syy = 0.0, max_im = 0.0, max_abs = 0.0;
        for (std::size_t p = 0; p < cloud.eigenvalues.size(); ++p) {
            auto z = cloud.branch_value(b, p);
            sxx += z.real() * z.real();
            sxy += z.real() * z.imag();
            syy += z.imag() * z.imag();
            max_im = std::max(max_im, std::abs(z.imag()));
            max_abs = std::max(max_abs, std::abs(z));
        }
        // principal direction of the second-moment matrix about the origin
        const double tr = sxx + syy;
        const double det = sxx * syy - sxy * sxy;
        const double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
        const double lmax = tr / 2.0 + disc;
        double vx = sxy, vy = lmax - sxx;
        if (std::abs(vx) + std::abs(vy) == 0.0) {
            vx = 1.0;
            vy = 0.0;
        }
        const double vn = std::hypot(vx, vy);
        vx /= vn;
        vy /= vn;
        double max_dist = 0.0;
        for (std::size_t p = 0; p < cloud.eigenvalues.size(); ++p) {
            auto z = cloud.branch_value(b, p);
            max_dist = std::max(max_dist, std::abs(-vy * z.real() + vx * z.imag()));
        }
        if (max_dist <= line_tol || max_im <= line_tol) {
            out.verdict = Verdict::Fail;
            out.summary = "eigenvalue branch lies in a one-dimensional real subspace of C";
            Witness w;
            w.kind = max_im <= line_tol ? "real-branch" : "line-branch";
            w.scalar = std::min(max_dist, max_im);
            w.note = "branch " + std::to_string(b);
            out.witnesses.push_back(std::move(w));
            return out;
        }
    }
    out.verdict = Verdict::Inconclusive;
    out.summary = "d = 2 and no branch close to a line: theorem gives no conclusion";
    return out;
}

std::optional<ScalingFamily> detect_scaling_family(const SampledEnsemble& ens) {
    if (ens.grid.d != 1 || ens.size() < 2) return std::nullopt;

    double num = 0.0;
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(ens.n(), ens.n());
    for (std::size_t p = 0; p < ens.size(); ++p) {
        const double th = ens.grid.points[p][0];
        acc += th * ens.A[p];
        num += th * th;
    }
    if (num == 0.0) return std::nullopt;
    Eigen::MatrixXd A0 = acc / num;

    double scale = 1.0, resid = 0.0, bscale = 1.0 + ens.B.front().norm(), bresid = 0.0;
    for (std::size_t p = 0; p < ens.size(); ++p) {
        scale = std::max(scale, ens.A[p].norm());
        resid = std::max(resid, (ens.A[p] - ens.grid.points[p][0] * A0).norm());
        bresid = std::max(bresid, (ens.B[p] - ens.B.front()).norm());
    }
    if (resid > 1e-9 * scale || bresid > 1e-9 * bscale) return std::nullopt;
    return ScalingFamily{std::move(A0), ens.B.front()};
}

DiagnosticsReport run_diagnostics(const ParametricSystem& system, const SampledEnsemble& ens,
                                  const Tolerances& tol) {
    DiagnosticsReport rep;
    rep.tolerances = tol;

    SpectrumCloud cloud = spectrum_cloud(ens, tol.rank_tol);
    rep.tol_spec = tol.tol_spec_base * (1.0 + cloud.max_abs);
    rep.spectrum_points = cloud.eigenvalues;
    for (double c : cloud.eigvec_condition)
        rep.max_eigvec_condition = std::max(rep.max_eigvec_condition, c);

    NecessaryOutcome nec = check_necessary(ens, cloud, rep.tol_spec, tol.rank_tol);
    rep.e1 = nec.e1;
    rep.e2 = nec.e2;

    HermiteProfile hermite = hermite_profile(ens, tol.rank_tol);
    MainOutcome main = check_main(ens, cloud, hermite, rep.tol_spec, tol.cond_max, tol.rank_tol);
    rep.main_i = main.i;
    rep.main_ii = main.ii;
    rep.main_iii = main.iii;
    rep.main_iv = main.iv;
    rep.remark2 = main.remark2;

    rep.const_char_poly = check_const_char_poly(ens, tol.coeff_tol);

    rep.scaling_family.verdict = Verdict::NotApplicable;
    rep.scaling_family.summary = "family is not of the form (theta A, B) on the grid";
    if (auto fam = detect_scaling_family(ens)) {
        rep.scaling_detected = true;
        rep.scaling_family =
            check_scaling_family(fam->A0, fam->B0, system.domain, tol.rank_tol, tol.tol_spec_base);
    }

    rep.dim_gate = dimension_gate(system.domain, cloud, tol.line_tol);

    const bool nec_violated = rep.e1.failed() || rep.e2.failed() || rep.dim_gate.failed() ||
                              rep.scaling_family.failed();
    const bool ccp_applies = system.m == 1 && system.domain.boxes.size() == 1 &&
                             system.domain.d == 1 && rep.const_char_poly.passed() &&
                             rep.e1.passed() && rep.main_iii.passed();
    if (nec_violated) {
        rep.overall = Classification::NecessaryViolated;
    } else if (main.certified() || rep.scaling_family.passed() || ccp_applies) {
        rep.overall = Classification::CertifiedSufficient;
    } else {
        rep.overall = Classification::Inconclusive;
    }
    return rep;
}

}  // namespace ensctl
