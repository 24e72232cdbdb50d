#include "pstab/poisson.hpp"

#include <cmath>
#include <set>

#include "pstab/errors.hpp"

namespace pstab {

SymbolicTensor::SymbolicTensor(int n, std::vector<TensorEntry> entries, std::vector<double> params)
    : n_(n), entries_(std::move(entries)), params_(std::move(params)) {
    for (const auto& e : entries_) {
        if (e.i < 0 || e.j <= e.i || e.j >= n_)
            throw SchemaError("tensor entry (" + std::to_string(e.i) + "," + std::to_string(e.j) +
                              ") must satisfy 0 <= i < j < dim");
    }
}

Mat SymbolicTensor::value(const Vec& z) const {
    Mat B = Mat::Zero(n_, n_);
    for (const auto& e : entries_) {
        double v = e.expr.eval({z.data(), std::size_t(z.size())}, params_);
        B(e.i, e.j) += v;
        B(e.j, e.i) -= v;
    }
    return B;
}

void SymbolicTensor::derivatives(const Vec& z, Mat& B, std::vector<Mat>& dB) const {
    B = Mat::Zero(n_, n_);
    dB.assign(n_, Mat::Zero(n_, n_));
    Vec g(n_);
    for (const auto& e : entries_) {
        double v = e.expr.grad({z.data(), std::size_t(z.size())}, params_, g.data());
        B(e.i, e.j) += v;
        B(e.j, e.i) -= v;
        for (int l = 0; l < n_; ++l) {
            dB[l](e.i, e.j) += g[l];
            dB[l](e.j, e.i) -= g[l];
        }
    }
}

Box PoissonSystem::sampling_box() const {
    if (box) return *box;
    Box b;
    b.lo = Vec::Constant(dim(), -1.0);
    b.hi = Vec::Constant(dim(), 1.0);
    return b;
}

const Expression* PoissonSystem::find_function(const std::string& fname) const {
    if (fname == hamiltonian.name) return &hamiltonian.expr;
    for (const auto& c : casimirs)
        if (c.name == fname) return &c.expr;
    for (const auto& c : conserved)
        if (c.name == fname) return &c.expr;
    for (const auto& c : aux)
        if (c.name == fname) return &c.expr;
    return nullptr;
}

const SubmanifoldChart* PoissonSystem::find_chart(const std::string& cname) const {
    for (const auto& c : charts)
        if (c.name == cname) return &c;
    return nullptr;
}

void validate_system(const PoissonSystem& sys) {
    const int n = sys.dim();
    if (n < 1) throw SchemaError("system must have at least one variable");
    if (!sys.tensor || sys.tensor->dim() != n) throw SchemaError("tensor dimension does not match variables");
    if (sys.param_names.size() != sys.param_values.size()) throw SchemaError("parameter names and values differ in length");
    std::set<std::string> seen;
    auto check_name = [&](const std::string& s, const char* what) {
        if (s.empty()) throw SchemaError(std::string(what) + " name is empty");
        if (is_reserved_name(s)) throw SchemaError(std::string(what) + " name '" + s + "' is reserved");
        if (!seen.insert(s).second) throw SchemaError("duplicate name '" + s + "'");
    };
    for (const auto& v : sys.variables) check_name(v, "variable");
    for (const auto& p : sys.param_names) check_name(p, "parameter");
    std::set<std::string> fnames{sys.hamiltonian.name};
    if (sys.hamiltonian.expr.empty()) throw SchemaError("hamiltonian is missing");
    auto check_fn = [&](const std::string& s) {
        if (s.empty()) throw SchemaError("function name is empty");
        if (!fnames.insert(s).second) throw SchemaError("duplicate function name '" + s + "'");
    };
    for (const auto& c : sys.casimirs) {
        check_fn(c.name);
        if (c.domain && c.domain->dim() != n) throw SchemaError("casimir domain of '" + c.name + "' has wrong dimension");
    }
    for (const auto& c : sys.conserved) check_fn(c.name);
    for (const auto& c : sys.aux) check_fn(c.name);
    if (sys.box && sys.box->dim() != n) throw SchemaError("box has wrong dimension");
    for (const auto& ch : sys.charts) {
        const int s = int(ch.vars.size());
        if (s < 1 || s > n) throw SchemaError("chart '" + ch.name + "' must have between 1 and dim variables");
        if (int(ch.embedding.size()) != n) throw SchemaError("chart '" + ch.name + "' embedding needs dim components");
        if (int(ch.generators.size()) != n - s)
            throw SchemaError("chart '" + ch.name + "' needs exactly dim - " + std::to_string(s) + " generators");
        if (ch.box && ch.box->dim() != s) throw SchemaError("chart '" + ch.name + "' box has wrong dimension");
    }
    if (sys.darboux_weinstein) {
        const auto& dw = *sys.darboux_weinstein;
        if (dw.pairs < 0 || dw.transverse < 0 || 2 * dw.pairs + dw.transverse != n)
            throw SchemaError("darboux_weinstein split must satisfy 2*pairs + transverse = dim");
        const int m = 2 * dw.pairs;
        Mat J = Mat::Zero(m, m);
        J.topRightCorner(dw.pairs, dw.pairs).setIdentity();
        J.bottomLeftCorner(dw.pairs, dw.pairs) = -Mat::Identity(dw.pairs, dw.pairs);
        for (const Vec& z : sample_box(sys.sampling_box(), 64, kDefaultSeed)) {
            Mat B;
            try {
                B = sys.tensor->value(z);
            } catch (const DomainError&) {
                continue;
            }
            if (m == 0) break;
            double err = (B.topLeftCorner(m, m) - J).cwiseAbs().maxCoeff();
            if (dw.transverse > 0) err = std::max(err, B.topRightCorner(m, dw.transverse).cwiseAbs().maxCoeff());
            if (err > 1e-12) throw SchemaError("darboux_weinstein flag rejected: symplectic block is not canonical");
        }
    }
}

Mat tensor_at(const PoissonSystem& sys, const Vec& z) { return sys.tensor->value(z); }

double bracket_eval(const PoissonSystem& sys, const Expression& F, const Expression& G, const Vec& z) {
    std::span<const double> zs(z.data(), z.size());
    Vec gf = F.grad(zs, sys.params());
    Vec gg = G.grad(zs, sys.params());
    return gf.dot(tensor_at(sys, z) * gg);
}

Vec hamiltonian_vf(const PoissonSystem& sys, const Vec& z) {
    Vec gh = sys.hamiltonian.expr.grad({z.data(), std::size_t(z.size())}, sys.params());
    return tensor_at(sys, z) * gh;
}

Mat vf_jacobian(const PoissonSystem& sys, const Vec& z) {
    const int n = sys.dim();
    Mat B;
    std::vector<Mat> dB;
    sys.tensor->derivatives(z, B, dB);
    Vec g(n);
    Mat H(n, n);
    sys.hamiltonian.expr.hess({z.data(), std::size_t(n)}, sys.params(), g.data(), H.data());
    H = 0.5 * (H + H.transpose());
    Mat L = B * H;
    for (int j = 0; j < n; ++j) L.col(j) += dB[j] * g;
    return L;
}

double jacobi_residual(const PoissonSystem& sys, const Vec& z) {
    const int n = sys.dim();
    Mat B;
    std::vector<Mat> dB;
    sys.tensor->derivatives(z, B, dB);
    double worst = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                double s = 0.0;
                for (int l = 0; l < n; ++l)
                    s += B(l, i) * dB[l](j, k) + B(l, j) * dB[l](k, i) + B(l, k) * dB[l](i, j);
                worst = std::max(worst, std::fabs(s));
            }
    return worst;
}

double jacobi_residual_sampled(const PoissonSystem& sys, const Box& box, int count, std::uint64_t seed) {
    double worst = 0.0;
    for (const Vec& z : sample_box(box, count, seed)) {
        try {
            worst = std::max(worst, jacobi_residual(sys, z));
        } catch (const DomainError&) {
        }
    }
    return worst;
}

double casimir_residual(const PoissonSystem& sys, const Expression& C, const Vec& z) {
    Vec gc = C.grad({z.data(), std::size_t(z.size())}, sys.params());
    return (tensor_at(sys, z) * gc).norm();
}

int numerical_rank(const Mat& M, double rel, double abs_floor) {
    if (M.size() == 0) return 0;
    Eigen::JacobiSVD<Mat> svd(M);
    const Vec& s = svd.singularValues();
    if (s.size() == 0 || s[0] <= abs_floor) return 0;
    int r = 0;
    for (int i = 0; i < s.size(); ++i)
        if (s[i] > rel * s[0]) ++r;
    return r;
}

EquilibriumPoint make_equilibrium(const PoissonSystem& sys, const Vec& z, double tol) {
    EquilibriumPoint e;
    e.z = z;
    e.residual = hamiltonian_vf(sys, z).norm();
    e.converged = e.residual <= tol;
    e.leaf_rank = numerical_rank(tensor_at(sys, z));
    return e;
}

EquilibriumPoint find_equilibrium(const PoissonSystem& sys, const Vec& seed, double tol, int max_iter) {
    const int n = sys.dim();
    Vec z = seed;
    Vec f = hamiltonian_vf(sys, z);
    double r = f.norm();
    double mu = 1.0;
    int it = 0;
    // Levenberg-Marquardt with damping proportional to the residual norm
    for (; it < max_iter && r > tol; ++it) {
        Mat J = vf_jacobian(sys, z);
        Mat A = J.transpose() * J;
        Vec rhs = -J.transpose() * f;
        bool accepted = false;
        for (int tries = 0; tries < 30 && !accepted; ++tries) {
            double lambda = mu * r;
            Vec step = (A + lambda * Mat::Identity(n, n)).ldlt().solve(rhs);
            if (!step.allFinite()) {
                mu *= 4.0;
                continue;
            }
            Vec zt = z + step;
            Vec ft;
            try {
                ft = hamiltonian_vf(sys, zt);
            } catch (const DomainError&) {
                mu *= 4.0;
                continue;
            }
            double rt = ft.norm();
            if (rt < r) {
                z = zt;
                f = ft;
                r = rt;
                mu = std::max(mu / 2.0, 1e-8);
                accepted = true;
            } else {
                mu *= 4.0;
            }
        }
        if (!accepted) break;
    }
    EquilibriumPoint e;
    e.z = z;
    e.residual = r;
    e.converged = r <= tol;
    e.iterations = it;
    e.leaf_rank = numerical_rank(tensor_at(sys, z));
    return e;
}

}  // namespace pstab
