#include "pstab/spectral.hpp"

#include <algorithm>
#include <cmath>

#include "pstab/errors.hpp"

namespace pstab {

const char* to_string(LinearClass c) {
    switch (c) {
        case LinearClass::SpectrallyUnstable: return "spectrally-unstable";
        case LinearClass::SpectrallyStable: return "spectrally-stable";
        case LinearClass::LinearlyUnstableDefectiveAxis: return "linearly-unstable-defective-axis";
        case LinearClass::LinearlyStable: return "linearly-stable";
    }
    return "?";
}

const char* to_string(Passing p) {
    switch (p) {
        case Passing::None: return "none";
        case Passing::Uncoupled: return "uncoupled";
        case Passing::Coupled: return "coupled";
        case Passing::PDefective: return "P-defective";
    }
    return "?";
}

Mat DWBlocks::assembled() const {
    const int m = int(S.rows()), r = int(P.rows());
    Mat L = Mat::Zero(m + r, m + r);
    if (m > 0) L.topLeftCorner(m, m) = S;
    if (m > 0 && r > 0) L.topRightCorner(m, r) = Q;
    if (r > 0) L.bottomRightCorner(r, r) = P;
    return L;
}

std::vector<cplx> eigenvalues(const Mat& M, bool* converged) {
    std::vector<cplx> ev;
    if (M.rows() == 0) {
        if (converged) *converged = true;
        return ev;
    }
    Eigen::EigenSolver<Mat> es(M, false);
    bool ok = es.info() == Eigen::Success;
    if (converged) *converged = ok;
    if (ok) {
        for (int i = 0; i < es.eigenvalues().size(); ++i) ev.push_back(es.eigenvalues()[i]);
    } else {
        // partial spectrum from the diagonal of the (unconverged) Schur form
        Eigen::RealSchur<Mat> rs(M.rows());
        rs.setMaxIterations(1000);
        rs.compute(M, false);
        const Mat& T = rs.matrixT();
        for (int i = 0; i < T.rows(); ++i) ev.push_back(T(i, i));
    }
    std::sort(ev.begin(), ev.end(), [](cplx a, cplx b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    return ev;
}

std::vector<EigenCluster> cluster_spectrum(const Mat& M, const std::vector<cplx>& ev,
                                           const SpectralTolerances& tol) {
    const int n = int(M.rows());
    const double norm = M.norm();
    const double ctol = tol.cluster * std::max(1.0, norm);
    std::vector<int> owner(ev.size(), -1);
    std::vector<EigenCluster> out;
    for (std::size_t i = 0; i < ev.size(); ++i) {
        if (owner[i] >= 0) continue;
        std::vector<std::size_t> members{i};
        owner[i] = int(out.size());
        // transitive closure of the closeness relation
        for (std::size_t k = 0; k < members.size(); ++k)
            for (std::size_t j = 0; j < ev.size(); ++j)
                if (owner[j] < 0 && std::abs(ev[j] - ev[members[k]]) <= ctol) {
                    owner[j] = owner[i];
                    members.push_back(j);
                }
        cplx mean = 0.0;
        for (std::size_t m : members) mean += ev[m];
        mean /= double(members.size());
        EigenCluster c;
        c.value = mean;
        c.algebraic = int(members.size());
        c.on_axis = std::fabs(mean.real()) <= tol.axis * norm;
        if (c.on_axis) c.value = cplx(0.0, mean.imag());
        if (std::fabs(c.value.imag()) <= tol.axis * norm) c.value = cplx(c.value.real(), 0.0);
        Eigen::MatrixXcd A = M.cast<cplx>() - c.value * Eigen::MatrixXcd::Identity(n, n);
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(A);
        int rank = 0;
        for (int s = 0; s < svd.singularValues().size(); ++s)
            if (svd.singularValues()[s] > tol.rank * norm) ++rank;
        c.geometric = std::min(n - rank, c.algebraic);
        if (c.geometric < 1) c.geometric = 1;
        out.push_back(c);
    }
    return out;
}

LinearizationReport analyze_matrix(const Mat& L, const SpectralTolerances& tol) {
    LinearizationReport r;
    r.L = L;
    r.norm = L.norm();
    r.eigenvalues = eigenvalues(L, &r.converged);
    r.clusters = cluster_spectrum(L, r.eigenvalues, tol);
    bool unstable = false, defective_axis = false;
    for (const auto& c : r.clusters) {
        if (c.geometric < c.algebraic) {
            r.diagonalizable = false;
            if (c.on_axis) defective_axis = true;
        }
        if (!c.on_axis && c.value.real() > 0.0) unstable = true;
    }
    if (unstable) r.classification = LinearClass::SpectrallyUnstable;
    else if (defective_axis) r.classification = LinearClass::LinearlyUnstableDefectiveAxis;
    else if (!r.converged) r.classification = LinearClass::SpectrallyStable;
    else r.classification = LinearClass::LinearlyStable;
    return r;
}

LinearizationReport linearize(const PoissonSystem& sys, const EquilibriumPoint& ze, const SpectralTolerances& tol) {
    if (!(ze.residual <= 1e-10))
        throw PreconditionError("point is not an equilibrium (residual " + std::to_string(ze.residual) + ")");
    LinearizationReport r = analyze_matrix(vf_jacobian(sys, ze.z), tol);
    if (sys.darboux_weinstein) {
        try {
            r.dw = dw_blocks(sys, ze.z);
            classify_passing(*r.dw, tol);
        } catch (const PreconditionError&) {
            // the point is not a chart origin of the declared split
            r.dw.reset();
        }
    }
    return r;
}

DWBlocks dw_blocks(const PoissonSystem& sys, const Vec& ze) {
    if (!sys.darboux_weinstein) throw PreconditionError("system has no darboux_weinstein split");
    const int ns = sys.darboux_weinstein->pairs;
    const int m = 2 * ns;
    const int r = sys.darboux_weinstein->transverse;
    const int n = sys.dim();
    Mat B;
    std::vector<Mat> dB;
    sys.tensor->derivatives(ze, B, dB);
    if (r > 0 && B.bottomRightCorner(r, r).cwiseAbs().maxCoeff() > 1e-9)
        throw PreconditionError("transverse tensor does not vanish at the point");
    Vec g(n);
    Mat H(n, n);
    sys.hamiltonian.expr.hess({ze.data(), std::size_t(n)}, sys.params(), g.data(), H.data());
    H = 0.5 * (H + H.transpose());
    Mat J = Mat::Zero(m, m);
    J.topRightCorner(ns, ns).setIdentity();
    J.bottomLeftCorner(ns, ns) = -Mat::Identity(ns, ns);
    DWBlocks b;
    b.S = J * H.topLeftCorner(m, m);
    b.Q = J * H.topRightCorner(m, r);
    b.P = Mat::Zero(r, r);
    for (int k = 0; k < r; ++k)
        for (int l = 0; l < r; ++l) {
            double s = 0.0;
            for (int p = 0; p < r; ++p) s += dB[m + l](m + k, m + p) * g[m + p];
            b.P(k, l) = s;
        }
    return b;
}

void classify_passing(DWBlocks& b, const SpectralTolerances& tol) {
    const int m = int(b.S.rows()), r = int(b.P.rows());
    b.passings.clear();
    b.p_defective = false;
    b.linearly_unstable = false;
    if (r == 0) return;
    LinearizationReport pr = analyze_matrix(b.P, tol);
    if (!pr.diagonalizable) {
        b.p_defective = true;
        for (const auto& c : pr.clusters) {
            PassingInfo pi;
            pi.mu = c.value;
            pi.label = Passing::PDefective;
            b.passings.push_back(pi);
            if (c.geometric < c.algebraic && c.on_axis) b.linearly_unstable = true;
        }
        return;
    }
    std::vector<cplx> sev = eigenvalues(b.S);
    const double scale = std::max(1.0, b.S.norm() + b.P.norm());
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> ces(b.P.cast<cplx>(), true);
    for (int j = 0; j < r; ++j) {
        PassingInfo pi;
        pi.mu = ces.eigenvalues()[j];
        Eigen::VectorXcd v = ces.eigenvectors().col(j);
        bool shared = false;
        for (cplx s : sev)
            if (std::abs(s - pi.mu) <= tol.cluster * scale) shared = true;
        if (!shared || m == 0) {
            pi.label = Passing::None;
            b.passings.push_back(pi);
            continue;
        }
        Eigen::MatrixXcd A = b.S.cast<cplx>() - pi.mu * Eigen::MatrixXcd::Identity(m, m);
        Eigen::VectorXcd rhs = b.Q.cast<cplx>() * v;
        double rn = rhs.norm();
        if (rn == 0.0) {
            pi.label = Passing::Uncoupled;
            pi.w = Eigen::VectorXcd::Zero(m);
            b.passings.push_back(pi);
            continue;
        }
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
        svd.setThreshold(1e-10);
        Eigen::VectorXcd w = svd.solve(rhs);
        pi.residual = (A * w - rhs).norm() / rn;
        pi.w = w;
        if (pi.residual <= tol.passing) {
            pi.label = Passing::Uncoupled;
        } else {
            pi.label = Passing::Coupled;
            b.linearly_unstable = true;
        }
        b.passings.push_back(pi);
    }
}

}  // namespace pstab
