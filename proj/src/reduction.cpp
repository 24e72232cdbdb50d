#include "pstab/reduction.hpp"

#include <cmath>
#include <set>

#include "pstab/errors.hpp"
#include "pstab/simulate.hpp"

namespace pstab {

const char* to_string(IVerdict v) {
    switch (v) {
        case IVerdict::IStable: return "I-stable";
        case IVerdict::IUnstable: return "I-unstable";
        case IVerdict::Inconclusive: return "inconclusive";
    }
    return "?";
}

ReducedTensor::ReducedTensor(SystemPtr parent, SubmanifoldChart chart)
    : parent_(std::move(parent)), chart_(std::move(chart)) {}

Vec ReducedTensor::embed(const Vec& u) const {
    const int n = parent_->dim();
    Vec z(n);
    for (int i = 0; i < n; ++i) z[i] = chart_.embedding[i].eval({u.data(), std::size_t(u.size())}, parent_->params());
    return z;
}

Mat ReducedTensor::embedding_jacobian(const Vec& u) const {
    const int n = parent_->dim(), s = dim();
    Mat D(n, s);
    Vec g(s);
    for (int i = 0; i < n; ++i) {
        chart_.embedding[i].grad({u.data(), std::size_t(s)}, parent_->params(), g.data());
        D.row(i) = g.transpose();
    }
    return D;
}

namespace {

void require_full_rank(const Mat& D) {
    Eigen::JacobiSVD<Mat> svd(D);
    const Vec& sv = svd.singularValues();
    if (sv.size() == 0 || sv[0] <= 0.0 || sv[sv.size() - 1] <= 1e-9 * sv[0])
        throw PreconditionError("embedding Jacobian is rank deficient");
}

}  // namespace

Mat ReducedTensor::projector_A(const Vec& u) const {
    Mat D = embedding_jacobian(u);
    require_full_rank(D);
    Mat G = D.transpose() * D;
    return G.ldlt().solve(D.transpose());
}

Mat ReducedTensor::value(const Vec& u) const {
    Mat A = projector_A(u);
    Mat b = A * parent_->tensor->value(embed(u)) * A.transpose();
    return 0.5 * (b - b.transpose());
}

void ReducedTensor::derivatives(const Vec& u, Mat& b, std::vector<Mat>& db) const {
    const int n = parent_->dim(), s = dim();
    std::span<const double> us(u.data(), std::size_t(s));
    Mat D(n, s);
    std::vector<Mat> D2(n, Mat(s, s));
    Vec z(n), g(s);
    for (int i = 0; i < n; ++i) {
        z[i] = chart_.embedding[i].hess(us, parent_->params(), g.data(), D2[i].data());
        D.row(i) = g.transpose();
    }
    require_full_rank(D);
    Mat B;
    std::vector<Mat> dB;
    parent_->tensor->derivatives(z, B, dB);
    Mat G = D.transpose() * D;
    auto ldlt = G.ldlt();
    Mat A = ldlt.solve(D.transpose());
    b = A * B * A.transpose();
    b = 0.5 * (b - b.transpose());
    db.assign(s, Mat::Zero(s, s));
    for (int l = 0; l < s; ++l) {
        Mat dD(n, s);
        for (int i = 0; i < n; ++i) dD.row(i) = D2[i].col(l).transpose();
        Mat dG = dD.transpose() * D + D.transpose() * dD;
        Mat dA = -ldlt.solve(dG * A) + ldlt.solve(dD.transpose());
        Mat dBl = Mat::Zero(n, n);
        for (int k = 0; k < n; ++k) dBl += dB[k] * D(k, l);
        Mat r = dA * B * A.transpose() + A * dBl * A.transpose() + A * B * dA.transpose();
        db[l] = 0.5 * (r - r.transpose());
    }
}

SubmanifoldChart make_chart(const PoissonSystem& sys, std::string name, std::vector<std::string> vars,
                            std::vector<std::string> embedding, std::vector<std::string> generators,
                            std::vector<std::pair<std::string, std::string>> subcasimirs, std::optional<Box> box) {
    SubmanifoldChart c;
    c.name = std::move(name);
    std::set<std::string> seen;
    for (const auto& v : vars) {
        if (v.empty() || is_reserved_name(v)) throw SchemaError("chart variable name '" + v + "' is invalid");
        if (!seen.insert(v).second) throw SchemaError("duplicate chart variable '" + v + "'");
        for (const auto& p : sys.param_names)
            if (p == v) throw SchemaError("chart variable '" + v + "' shadows a parameter");
    }
    c.vars = std::move(vars);
    c.embedding_text = std::move(embedding);
    for (const auto& t : c.embedding_text) c.embedding.push_back(parse(t, c.vars, sys.param_names));
    c.generator_text = std::move(generators);
    for (const auto& t : c.generator_text) c.generators.push_back(sys.parse_expr(t));
    for (auto& [n, t] : subcasimirs) c.subcasimirs.push_back({n, t, sys.parse_expr(t)});
    c.box = std::move(box);
    return c;
}

Box chart_box(const SubmanifoldChart& chart) {
    if (chart.box) return *chart.box;
    Box b;
    b.lo = Vec::Constant(chart.vars.size(), -1.0);
    b.hi = Vec::Constant(chart.vars.size(), 1.0);
    return b;
}

ChartCheck validate_chart(const PoissonSystem& sys, const SubmanifoldChart& chart, int count, std::uint64_t seed) {
    ChartCheck cc;
    const int n = sys.dim(), s = int(chart.vars.size()), m = int(chart.generators.size());
    if (int(chart.embedding.size()) != n || m != n - s) {
        cc.problem = "chart shape does not match the system";
        return cc;
    }
    cc.embedding_min_sv = std::numeric_limits<double>::infinity();
    cc.generator_min_sv = std::numeric_limits<double>::infinity();
    auto rel_min_sv = [](const Mat& M) {
        Eigen::JacobiSVD<Mat> svd(M);
        const Vec& sv = svd.singularValues();
        if (sv.size() == 0 || sv[0] <= 0.0) return 0.0;
        return sv[sv.size() - 1] / sv[0];
    };
    for (const Vec& u : sample_box(chart_box(chart), count, seed)) {
        try {
            Vec z(n);
            Mat D(n, s);
            Vec g(s);
            for (int i = 0; i < n; ++i) {
                z[i] = chart.embedding[i].grad({u.data(), std::size_t(s)}, sys.params(), g.data());
                D.row(i) = g.transpose();
            }
            Mat Gd(m, n);
            Vec gz(n);
            double gmax = 0.0;
            for (int k = 0; k < m; ++k) {
                gmax = std::max(gmax, std::fabs(chart.generators[k].grad({z.data(), std::size_t(n)}, sys.params(), gz.data())));
                Gd.row(k) = gz.transpose();
            }
            cc.generator_max = std::max(cc.generator_max, gmax);
            cc.embedding_min_sv = std::min(cc.embedding_min_sv, rel_min_sv(D));
            if (m > 0) cc.generator_min_sv = std::min(cc.generator_min_sv, rel_min_sv(Gd));
            ++cc.samples;
        } catch (const DomainError&) {
        }
    }
    if (m == 0) cc.generator_min_sv = 1.0;
    if (cc.samples == 0) cc.problem = "no chart sample could be evaluated";
    else if (cc.generator_max > 1e-10) cc.problem = "generators do not vanish on the chart image";
    else if (cc.embedding_min_sv <= 1e-9) cc.problem = "embedding Jacobian is rank deficient";
    else if (cc.generator_min_sv <= 1e-9) cc.problem = "generator differentials are not independent";
    cc.ok = cc.problem.empty();
    return cc;
}

double quasi_poisson_residual(const PoissonSystem& sys, const SubmanifoldChart& chart, int count, std::uint64_t seed) {
    const int n = sys.dim(), s = int(chart.vars.size());
    double worst = 0.0;
    for (const Vec& u : sample_box(chart_box(chart), count, seed)) {
        try {
            Vec z(n);
            Mat D(n, s);
            Vec g(s);
            for (int i = 0; i < n; ++i) {
                z[i] = chart.embedding[i].grad({u.data(), std::size_t(s)}, sys.params(), g.data());
                D.row(i) = g.transpose();
            }
            Eigen::HouseholderQR<Mat> qr(D);
            Mat Q = qr.householderQ() * Mat::Identity(n, s);
            Mat B = tensor_at(sys, z);
            for (int c = 0; c < n; ++c) {
                Vec col = B.col(c);
                Vec perp = col - Q * (Q.transpose() * col);
                worst = std::max(worst, perp.norm() / std::max(1.0, col.norm()));
            }
        } catch (const DomainError&) {
        }
    }
    return worst;
}

SystemPtr reduce_chart(SystemPtr sys, const SubmanifoldChart& chart) {
    ChartCheck cc = validate_chart(*sys, chart);
    if (!cc.ok) throw PreconditionError("chart '" + chart.name + "' rejected: " + cc.problem);
    double qp = quasi_poisson_residual(*sys, chart);
    if (qp > kQuasiPoissonTol)
        throw PreconditionError("chart '" + chart.name + "' is not quasi-Poisson (residual " + std::to_string(qp) + ")");
    auto red = std::make_shared<PoissonSystem>();
    red->name = sys->name + "/" + chart.name;
    red->variables = chart.vars;
    red->param_names = sys->param_names;
    red->param_values = sys->param_values;
    red->tensor = std::make_shared<ReducedTensor>(sys, chart);
    auto pull = [&](const Expression& e) { return substitute(e, chart.embedding); };
    auto named = [&](const std::string& n, const Expression& e) {
        Expression r = pull(e);
        return NamedFunction{n, r.str(), r};
    };
    red->hamiltonian = named(sys->hamiltonian.name, sys->hamiltonian.expr);
    for (const auto& c : sys->casimirs) {
        // local domains live in ambient coordinates and do not transfer
        if (c.scope == CasimirScope::Local && c.domain) continue;
        NamedFunction f = named(c.name, c.expr);
        red->casimirs.push_back({f.name, f.text, f.expr, c.scope, std::nullopt});
    }
    for (const auto& c : chart.subcasimirs) {
        NamedFunction f = named(c.name, c.expr);
        red->casimirs.push_back({f.name, f.text, f.expr, CasimirScope::Global, std::nullopt});
    }
    for (const auto& c : sys->conserved) red->conserved.push_back(named(c.name, c.expr));
    for (const auto& c : sys->aux) red->aux.push_back(named(c.name, c.expr));
    red->box = chart.box;
    for (int k = 0; k < int(chart.vars.size()); ++k)
        for (int i = 0; i < sys->dim(); ++i)
            if (sys->variables[i] == chart.vars[k] && sys->periods.count(i)) red->periods[k] = sys->periods.at(i);
    red->reduced_parent = sys;
    red->reduced_chart = chart.name;
    return red;
}

SystemPtr reduce_chart(SystemPtr sys, const std::string& chart_name) {
    const SubmanifoldChart* c = sys->find_chart(chart_name);
    if (!c) throw NotFoundError("unknown chart '" + chart_name + "'");
    return reduce_chart(sys, *c);
}

Vec chart_preimage(const ReducedTensor& rt, const Vec& z, double tol) {
    const auto& chart = rt.chart();
    const auto& parent = *rt.parent();
    const int s = rt.dim();
    Vec u = chart_box(chart).center();
    for (int k = 0; k < s; ++k)
        for (int i = 0; i < parent.dim(); ++i)
            if (parent.variables[i] == chart.vars[k]) u[k] = z[i];
    for (int it = 0; it < 100; ++it) {
        Vec r = rt.embed(u) - z;
        if (r.norm() <= 1e-14 * std::max(1.0, z.norm())) break;
        u -= rt.projector_A(u) * r;
    }
    double res = (rt.embed(u) - z).norm();
    if (!(res <= tol * std::max(1.0, z.norm())))
        throw PreconditionError("point is not on the image of chart '" + chart.name + "'");
    return u;
}

ICertificate i_certify(SystemPtr sys, const std::string& chart_name, const Vec& ze, const ICertifyOptions& opts) {
    const SubmanifoldChart* chart = sys->find_chart(chart_name);
    if (!chart) throw NotFoundError("unknown chart '" + chart_name + "'");
    if (ze.size() != sys->dim()) throw PreconditionError("point has wrong dimension");
    for (std::size_t k = 0; k < chart->generators.size(); ++k) {
        double v = chart->generators[k].eval({ze.data(), std::size_t(ze.size())}, sys->params());
        if (std::fabs(v) > 1e-9)
            throw PreconditionError("point is off the vanishing set of chart '" + chart_name + "' (generator " +
                                    chart->generator_text[k] + " = " + std::to_string(v) + ")");
    }
    EquilibriumPoint eq = make_equilibrium(*sys, ze);
    if (!eq.converged) throw PreconditionError("point is not an equilibrium (residual " + std::to_string(eq.residual) + ")");

    ICertificate ic;
    ic.quasi_poisson = quasi_poisson_residual(*sys, *chart);

    // ambient path: H, Casimirs, sub-Casimirs and generators together
    std::vector<Expression> fns{sys->hamiltonian.expr};
    ic.ambient.function_names = {sys->hamiltonian.name};
    std::vector<std::string> names = opts.certify.conserved ? *opts.certify.conserved : default_conserved(*sys, ze);
    for (const auto& n : names) {
        const Expression* e = sys->find_function(n);
        if (!e) throw NotFoundError("unknown conserved quantity '" + n + "'");
        if (n == sys->hamiltonian.name) continue;
        fns.push_back(*e);
        ic.ambient.function_names.push_back(n);
    }
    for (const auto& f : chart->subcasimirs) {
        fns.push_back(f.expr);
        ic.ambient.function_names.push_back(f.name);
    }
    for (std::size_t k = 0; k < chart->generators.size(); ++k) {
        fns.push_back(chart->generators[k]);
        ic.ambient.function_names.push_back(chart->generator_text[k]);
    }
    ic.ambient.check = energy_casimir_check(*sys, ze, fns, opts.certify);
    ic.ambient.success = ic.ambient.check.def.success;

    // reduced path
    bool reduced_stable = false, reduced_certified = false;
    try {
        ic.reduced = reduce_chart(sys, *chart);
        const auto& rt = static_cast<const ReducedTensor&>(*ic.reduced->tensor);
        ic.preimage = chart_preimage(rt, ze);
        EquilibriumPoint req = make_equilibrium(*ic.reduced, ic.preimage);
        CertifyOptions ropts = opts.certify;
        ropts.conserved.reset();
        if (ropts.F && *ropts.F != "auto" && !ic.reduced->find_function(*ropts.F)) ropts.F.reset();
        ic.reduced_certificate = certify(*ic.reduced, req, ropts);
        const Verdict v = ic.reduced_certificate.verdict;
        reduced_stable = v == Verdict::LyapunovStable || v == Verdict::WeaklyAsymptoticallyStable ||
                         v == Verdict::AsymptoticallyStable;
        reduced_certified = reduced_stable && ic.reduced_certificate.grade == Grade::Certified;
    } catch (const PreconditionError& e) {
        ic.notes.push_back(std::string("reduced path unavailable: ") + e.what());
    }

    if (ic.reduced && ic.reduced_certificate.verdict == Verdict::SpectrallyUnstable) {
        ic.verdict = IVerdict::IUnstable;
        ic.grade = Grade::Certified;
        return ic;
    }
    if (ic.ambient.success || reduced_stable) {
        ic.verdict = IVerdict::IStable;
        ic.grade = (ic.ambient.success || reduced_certified) ? Grade::Certified : Grade::Empirical;
        return ic;
    }
    if (opts.probe && ic.reduced) {
        ProbeOptions po;
        po.radius = opts.probe_radius;
        po.samples = opts.probe_samples;
        po.horizon = opts.probe_horizon;
        po.seed = opts.certify.seed;
        ProbeReport pr = stability_probe(*ic.reduced, ic.preimage, nullptr, po);
        ic.probe_escaped = pr.kind == ProbeKind::Escape;
        if (*ic.probe_escaped) {
            ic.verdict = IVerdict::IUnstable;
            ic.grade = Grade::Empirical;
            ic.notes.push_back("escape observed for the restricted dynamics; instability is simulation evidence only");
            return ic;
        }
    }
    ic.verdict = IVerdict::Inconclusive;
    ic.grade = Grade::Inconclusive;
    return ic;
}

}  // namespace pstab
