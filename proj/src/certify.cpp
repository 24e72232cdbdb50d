#include "pstab/certify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "pstab/errors.hpp"

namespace pstab {

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::AsymptoticallyStable: return "asymptotically-stable";
        case Verdict::WeaklyAsymptoticallyStable: return "weakly-asymptotically-stable";
        case Verdict::LyapunovStable: return "lyapunov-stable";
        case Verdict::SpectrallyUnstable: return "spectrally-unstable";
        case Verdict::LinearlyUnstable: return "linearly-unstable";
        case Verdict::Inconclusive: return "inconclusive";
    }
    return "?";
}

const char* to_string(Grade g) {
    switch (g) {
        case Grade::Certified: return "certified";
        case Grade::Empirical: return "empirical";
        case Grade::Inconclusive: return "inconclusive";
    }
    return "?";
}

namespace {

constexpr double kRankRel = 1e-9;

double min_eig(const Mat& M) {
    if (M.rows() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Mat> es(M, Eigen::EigenvaluesOnly);
    return es.eigenvalues()[0];
}

}  // namespace

Mat kernel_basis(const std::vector<Vec>& gradients, int n) {
    if (gradients.empty()) return Mat::Identity(n, n);
    Mat G(gradients.size(), n);
    for (std::size_t i = 0; i < gradients.size(); ++i) G.row(i) = gradients[i].transpose();
    Eigen::JacobiSVD<Mat> svd(G, Eigen::ComputeFullV);
    const Vec& s = svd.singularValues();
    if (s.size() == 0 || s[0] <= 0.0) return Mat::Identity(n, n);
    int rank = 0;
    for (int i = 0; i < s.size(); ++i)
        if (s[i] > kRankRel * s[0]) ++rank;
    return svd.matrixV().rightCols(n - rank);
}

Mat multiplier_space(const std::vector<Vec>& gradients, int n) {
    const int m = int(gradients.size());
    if (m == 0) return Mat(0, 0);
    Mat G(n, m);
    for (int a = 0; a < m; ++a) G.col(a) = gradients[a];
    Eigen::JacobiSVD<Mat> svd(G, Eigen::ComputeFullV);
    const Vec& s = svd.singularValues();
    if (s.size() == 0 || s[0] <= 0.0) return Mat::Identity(m, m);
    int rank = 0;
    for (int i = 0; i < s.size(); ++i)
        if (s[i] > kRankRel * s[0]) ++rank;
    return svd.matrixV().rightCols(m - rank);
}

DefinitenessResult definiteness_search(const Mat& N, const std::vector<Mat>& hessians, const Mat& W,
                                       double margin_rel, std::uint64_t seed) {
    DefinitenessResult res;
    const int m = int(hessians.size());
    const int d = int(N.cols());
    const int w = int(W.cols());
    if (w == 0) {
        // l2 alone is definite; any critical combination, including the zero one, works
        res.success = true;
        res.direction = d > 0 ? Vec(Vec::Unit(d, 0)) : Vec(0);
        res.multipliers = d > 0 ? Vec(N.col(0)) : Vec(Vec::Zero(m));
        res.restricted_spectrum = Vec(0);
        return res;
    }
    if (d == 0) {
        res.direction = Vec(0);
        res.multipliers = Vec::Zero(m);
        return res;
    }
    std::vector<Mat> Mr(m);
    for (int a = 0; a < m; ++a) {
        Mat R = W.transpose() * hessians[a] * W;
        Mr[a] = 0.5 * (R + R.transpose());
    }
    std::vector<Mat> Mb(d, Mat::Zero(w, w));
    double scale = 0.0;
    for (int b = 0; b < d; ++b) {
        for (int a = 0; a < m; ++a) Mb[b] += N(a, b) * Mr[a];
        scale = std::max(scale, Mb[b].norm());
    }
    res.margin = margin_rel * scale;
    auto pencil = [&](const Vec& u) {
        Mat M = Mat::Zero(w, w);
        for (int b = 0; b < d; ++b) M += u[b] * Mb[b];
        return M;
    };
    auto objective = [&](const Vec& u) { return min_eig(pencil(u)); };

    Vec best_u = Vec::Unit(d, 0);
    double best = -std::numeric_limits<double>::infinity();
    auto consider = [&](const Vec& u) {
        Vec un = u.normalized();
        double f = objective(un);
        if (f > best) {
            best = f;
            best_u = un;
        }
    };
    if (d == 1) {
        consider(Vec::Constant(1, 1.0));
        consider(Vec::Constant(1, -1.0));
    } else if (d == 2) {
        const double deg = std::numbers::pi / 180.0;
        for (int k = 0; k < 360; ++k) consider(Vec(Eigen::Vector2d(std::cos(k * deg), std::sin(k * deg))));
        // golden-section refinement inside the best grid bracket
        double t0 = std::atan2(best_u[1], best_u[0]);
        double lo = t0 - deg, hi = t0 + deg;
        const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
        auto at = [](double t) { return Vec(Eigen::Vector2d(std::cos(t), std::sin(t))); };
        for (int it = 0; it < 60; ++it) {
            double a = hi - gr * (hi - lo), b = lo + gr * (hi - lo);
            if (objective(at(a)) > objective(at(b))) hi = b;
            else lo = a;
        }
        consider(at(0.5 * (lo + hi)));
    } else {
        QuasiRandom qr(d, seed);
        std::vector<Vec> starts;
        for (int b = 0; b < d && int(starts.size()) < 64; ++b) {
            starts.push_back(Vec::Unit(d, b));
            starts.push_back(-Vec::Unit(d, b));
        }
        while (starts.size() < 64) {
            Vec u = 2.0 * qr.next().array() - 1.0;
            if (u.norm() > 1e-3) starts.push_back(u.normalized());
        }
        for (Vec u : starts) {
            u.normalize();
            consider(u);
            for (int it = 1; it <= 300; ++it) {
                Eigen::SelfAdjointEigenSolver<Mat> es(pencil(u));
                Vec v = es.eigenvectors().col(0);
                Vec g(d);
                for (int b = 0; b < d; ++b) g[b] = v.dot(Mb[b] * v);
                // project onto the tangent space of the sphere
                g -= g.dot(u) * u;
                if (g.norm() < 1e-14) break;
                u = (u + (0.5 / std::sqrt(double(it))) * g.normalized()).normalized();
                consider(u);
            }
        }
    }
    res.direction = best_u;
    res.min_eigenvalue = best;
    Vec c = N * best_u;
    res.multipliers = c.norm() > 0 ? Vec(c / c.norm()) : c;
    Eigen::SelfAdjointEigenSolver<Mat> es(pencil(best_u), Eigen::EigenvaluesOnly);
    res.restricted_spectrum = es.eigenvalues();
    res.success = scale > 0.0 && best > res.margin;
    return res;
}

namespace {

struct FSample {
    bool ok = false;
    double g1 = 0.0, g2 = 0.0, d = 0.0;
};

std::vector<FSample> evaluate_F_samples(const PoissonSystem& sys, const Vec& ze, const Expression& F,
                                        double radius, int count, std::uint64_t seed) {
    std::vector<Vec> pts = sample_ball(ze, radius, 1e-6, count, seed);
    const double Fe = F.eval({ze.data(), std::size_t(ze.size())}, sys.params());
    std::vector<FSample> out(pts.size());
    parallel_for(pts.size(), [&](std::size_t i) {
        const Vec& z = pts[i];
        try {
            std::span<const double> zs(z.data(), z.size());
            Vec gF(z.size()), gH(z.size());
            double Fv = F.grad(zs, sys.params(), gF.data());
            sys.hamiltonian.expr.grad(zs, sys.params(), gH.data());
            double g1 = gF.dot(tensor_at(sys, z) * gH);
            out[i].d = Fv - Fe;
            out[i].g1 = g1;
            out[i].g2 = 2.0 * out[i].d * g1;
            out[i].ok = true;
        } catch (const DomainError&) {
        }
    });
    return out;
}

}  // namespace

FConditionReport check_condition_F(const PoissonSystem& sys, const Vec& ze, const Expression& F, double radius,
                                   int count, double slack, std::uint64_t seed) {
    FConditionReport r;
    r.F = F.str();
    r.radius = radius;
    auto samples = evaluate_F_samples(sys, ze, F, radius, count, seed);
    bool first = true, all_strict = true, all_pos = true, all_neg = true;
    for (const auto& s : samples) {
        if (!s.ok) {
            ++r.skipped;
            continue;
        }
        ++r.samples;
        if (first) {
            r.g1_min = r.g1_max = s.g1;
            r.g2_min = r.g2_max = s.g2;
            first = false;
        }
        r.g1_min = std::min(r.g1_min, s.g1);
        r.g1_max = std::max(r.g1_max, s.g1);
        r.g2_min = std::min(r.g2_min, s.g2);
        r.g2_max = std::max(r.g2_max, s.g2);
        bool bad_g2 = s.g2 > slack;
        bool bad_i = bad_g2 || (std::fabs(s.g2) <= slack && s.g1 > slack);
        bool bad_ii = bad_g2 || !(s.d > 0.0);
        r.violations_i += bad_i;
        r.violations_ii += bad_ii;
        if (!(s.g2 < -slack)) all_strict = false;
        if (!(s.d > 0.0)) all_pos = false;
        if (!(s.d < 0.0)) all_neg = false;
    }
    r.hypothesis_i = r.samples > 0 && r.violations_i == 0;
    r.hypothesis_ii = r.samples > 0 && r.violations_ii == 0;
    // a sign change of F - F(z_e) forces a zero of g2 away from z_e
    r.strict = r.samples > 0 && all_strict && (all_pos || all_neg || sys.dim() == 1);
    return r;
}

std::vector<FSuggestion> suggest_F(const PoissonSystem& sys, const EquilibriumPoint& ze,
                                   const LinearizationReport& lin) {
    std::vector<FSuggestion> out;
    const int n = sys.dim();
    const double ctol = SpectralTolerances{}.cluster * std::max(1.0, lin.norm);
    for (const auto& c : lin.clusters) {
        if (c.on_axis || c.value.real() >= 0.0 || std::fabs(c.value.imag()) > ctol) continue;
        double lam = -c.value.real();
        bool mirrored = false;
        for (const auto& o : lin.clusters)
            if (std::abs(o.value - cplx(lam, 0.0)) <= ctol) mirrored = true;
        if (mirrored) continue;
        Mat A = lin.L.transpose() + lam * Mat::Identity(n, n);
        Eigen::JacobiSVD<Mat> svd(A, Eigen::ComputeFullV);
        Vec v = svd.matrixV().col(n - 1);
        int big = 0;
        v.cwiseAbs().maxCoeff(&big);
        if (v[big] < 0) v = -v;
        v /= v[big];
        std::string text;
        for (int i = 0; i < n; ++i) {
            if (std::fabs(v[i]) < 1e-9) continue;
            char buf[64];
            if (std::fabs(v[i] - 1.0) < 1e-12) std::snprintf(buf, sizeof buf, "%s", sys.variables[i].c_str());
            else std::snprintf(buf, sizeof buf, "(%.17g)*%s", v[i], sys.variables[i].c_str());
            if (!text.empty()) text += " + ";
            text += buf;
        }
        FSuggestion s;
        s.text = text;
        s.expr = sys.parse_expr(text);
        s.rate = lam;
        out.push_back(std::move(s));
    }
    std::stable_sort(out.begin(), out.end(), [](const FSuggestion& a, const FSuggestion& b) { return a.rate > b.rate; });
    (void)ze;
    return out;
}

double LyapunovData::value(const PoissonSystem& sys, const Vec& z) const {
    std::span<const double> zs(z.data(), z.size());
    double l1 = 0.0, l2 = 0.0;
    for (std::size_t a = 0; a < functions.size(); ++a) {
        double dv = functions[a].eval(zs, sys.params()) - reference[a];
        l1 += multipliers[a] * dv;
        l2 += 0.5 * dv * dv;
    }
    return epsilon * l1 + l2;
}

LyapunovData build_lyapunov(const PoissonSystem& sys, const Vec& ze, const std::vector<Expression>& functions,
                            const Vec& multipliers, bool has_F, double margin_rel) {
    const int n = sys.dim();
    LyapunovData L;
    L.functions = functions;
    L.multipliers = multipliers;
    L.has_F = has_F;
    L.reference.resize(functions.size());
    Mat H1 = Mat::Zero(n, n), H2 = Mat::Zero(n, n);
    std::span<const double> zs(ze.data(), ze.size());
    for (std::size_t a = 0; a < functions.size(); ++a) {
        Vec g(n);
        Mat h(n, n);
        L.reference[a] = functions[a].hess(zs, sys.params(), g.data(), h.data());
        h = 0.5 * (h + h.transpose());
        H1 += multipliers[a] * h;
        H2 += g * g.transpose();
    }
    const double margin = margin_rel * std::max(H1.norm(), H2.norm());
    for (double eps = 1.0; eps >= std::ldexp(1.0, -40); eps *= 0.5) {
        Mat Hs = eps * H1 + H2;
        if (min_eig(Hs) > margin) {
            L.epsilon = eps;
            L.hessian = Hs;
            return L;
        }
    }
    throw InternalError("no Lyapunov epsilon found down to 2^-40; definiteness tolerance problem");
}

std::vector<std::string> default_conserved(const PoissonSystem& sys, const Vec& ze) {
    std::vector<std::string> names;
    for (const auto& c : sys.casimirs)
        if (c.scope == CasimirScope::Global || !c.domain || c.domain->contains(ze, 1e-12)) names.push_back(c.name);
    for (const auto& c : sys.conserved) names.push_back(c.name);
    return names;
}

EnergyCasimirCheck energy_casimir_check(const PoissonSystem& sys, const Vec& ze, const std::vector<Expression>& fns,
                                   const CertifyOptions& opts) {
    const int n = sys.dim();
    std::vector<Vec> grads;
    std::vector<Mat> hess;
    std::span<const double> zs(ze.data(), ze.size());
    for (const auto& f : fns) {
        Vec g(n);
        Mat h(n, n);
        f.hess(zs, sys.params(), g.data(), h.data());
        grads.push_back(g);
        hess.push_back(0.5 * (h + h.transpose()));
    }
    EnergyCasimirCheck r;
    r.N = multiplier_space(grads, n);
    r.W = kernel_basis(grads, n);
    r.def = definiteness_search(r.N, hess, r.W, opts.margin, opts.seed);
    double gscale = 0.0;
    Vec comb = Vec::Zero(n);
    for (std::size_t a = 0; a < grads.size(); ++a) {
        gscale = std::max(gscale, grads[a].norm());
        comb += r.def.multipliers[a] * grads[a];
    }
    r.critical_ok = comb.norm() <= opts.critical_tol * std::max(1.0, gscale);
    if (!r.critical_ok) r.def.success = false;
    return r;
}

namespace {

void fill_from(Certificate& c, const EnergyCasimirCheck& r) {
    c.multipliers = r.def.multipliers;
    c.W = r.W;
    c.restricted_spectrum = r.def.restricted_spectrum;
    c.multiplier_dim = int(r.N.cols());
}

}  // namespace

Certificate certify(const PoissonSystem& sys, const EquilibriumPoint& ze, const CertifyOptions& opts) {
    if (!(opts.radius > 0.0)) throw PreconditionError("sampling radius must be positive");
    Certificate cert;
    cert.leaf_rank = ze.leaf_rank;
    cert.linearization = linearize(sys, ze);
    const auto& lin = cert.linearization;
    if (lin.classification == LinearClass::SpectrallyUnstable) {
        cert.verdict = Verdict::SpectrallyUnstable;
        cert.grade = Grade::Certified;
        return cert;
    }

    std::vector<std::string> names = opts.conserved ? *opts.conserved : default_conserved(sys, ze.z);
    std::vector<Expression> fns{sys.hamiltonian.expr};
    cert.function_names = {sys.hamiltonian.name};
    for (const auto& nm : names) {
        const Expression* e = sys.find_function(nm);
        if (!e) throw NotFoundError("unknown conserved quantity '" + nm + "'");
        if (nm == sys.hamiltonian.name) continue;
        fns.push_back(*e);
        cert.function_names.push_back(nm);
    }

    EnergyCasimirCheck base = energy_casimir_check(sys, ze.z, fns, opts);
    fill_from(cert, base);
    bool lyapunov_ok = base.def.success;
    if (!base.critical_ok) cert.notes.push_back("multiplier combination is not critical within tolerance");
    if (base.N.cols() == 0 && base.W.cols() > 0)
        cert.notes.push_back("no critical combination of H and the conserved quantities");
    if (lyapunov_ok) {
        cert.verdict = Verdict::LyapunovStable;
        cert.grade = Grade::Certified;
        cert.lyapunov = build_lyapunov(sys, ze.z, fns, base.def.multipliers, false, opts.margin);
        cert.epsilon = cert.lyapunov->epsilon;
    }

    // F branch
    std::vector<std::pair<std::string, Expression>> candidates;
    if (opts.F) {
        if (*opts.F == "auto") {
            for (auto& s : suggest_F(sys, ze, lin)) candidates.emplace_back(s.text, s.expr);
            if (candidates.empty()) cert.notes.push_back("no F candidate suggested by the spectrum");
        } else {
            const Expression* e = sys.find_function(*opts.F);
            if (!e) throw NotFoundError("unknown function F '" + *opts.F + "'");
            candidates.emplace_back(*opts.F, *e);
        }
    }
    for (const auto& [fname, F] : candidates) {
        std::vector<Expression> fnsF = fns;
        fnsF.push_back(F);
        EnergyCasimirCheck withF = energy_casimir_check(sys, ze.z, fnsF, opts);
        FConditionReport rep = check_condition_F(sys, ze.z, F, opts.radius, opts.samples, opts.slack, opts.seed);
        if (!withF.def.success || !rep.holds()) {
            if (!cert.fcondition) {
                cert.fcondition = rep;
                cert.F_text = fname;
            }
            if (!withF.def.success) cert.notes.push_back("definiteness fails with F = " + fname);
            if (!rep.holds()) cert.notes.push_back("F hypothesis violated for F = " + fname);
            continue;
        }
        LyapunovData L = build_lyapunov(sys, ze.z, fnsF, withF.def.multipliers, true, opts.margin);
        // shrink epsilon until the sampled derivative of L_eps is non-positive
        const double mu = withF.def.multipliers[fnsF.size() - 1];
        auto samples = evaluate_F_samples(sys, ze.z, F, opts.radius, opts.samples, opts.seed);
        auto dot_ok = [&](double eps) {
            for (const auto& s : samples)
                if (s.ok && 0.5 * s.g2 + eps * mu * s.g1 > opts.slack) return false;
            return true;
        };
        while (!dot_ok(L.epsilon) && L.epsilon > std::ldexp(1.0, -40)) L.epsilon *= 0.5;
        if (!dot_ok(L.epsilon)) cert.notes.push_back("sampled derivative of L_eps stays positive somewhere");
        cert.F_text = fname;
        cert.fcondition = rep;
        fill_from(cert, withF);
        cert.lyapunov = L;
        cert.epsilon = L.epsilon;
        cert.function_names.push_back("F");
        cert.grade = opts.trusted_F ? Grade::Certified : Grade::Empirical;
        cert.verdict = Verdict::WeaklyAsymptoticallyStable;
        if (rep.strict) {
            if (ze.leaf_rank == 0) cert.verdict = Verdict::AsymptoticallyStable;
            else cert.notes.push_back("strict decrease sampled but the leaf through the point is not trivial; kept weak");
        }
        return cert;
    }
    if (lyapunov_ok) return cert;

    cert.lyapunov.reset();
    cert.epsilon.reset();
    bool lin_unstable = lin.classification == LinearClass::LinearlyUnstableDefectiveAxis ||
                        (lin.dw && lin.dw->linearly_unstable);
    if (lin_unstable) {
        cert.verdict = Verdict::LinearlyUnstable;
        cert.grade = Grade::Certified;
        cert.notes.push_back("linear instability only; nonlinear stability is undetermined");
    } else {
        cert.verdict = Verdict::Inconclusive;
        cert.grade = Grade::Inconclusive;
    }
    return cert;
}

}  // namespace pstab
