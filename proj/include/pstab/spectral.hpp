#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "pstab/poisson.hpp"

namespace pstab {

using cplx = std::complex<double>;

enum class LinearClass { SpectrallyUnstable, SpectrallyStable, LinearlyUnstableDefectiveAxis, LinearlyStable };
const char* to_string(LinearClass c);

struct EigenCluster {
    cplx value;
    int algebraic = 0;
    int geometric = 0;
    bool on_axis = false;
};

enum class Passing { None, Uncoupled, Coupled, PDefective };
const char* to_string(Passing p);

struct PassingInfo {
    cplx mu;
    Passing label = Passing::None;
    double residual = 0.0;
    Eigen::VectorXcd w;
};

struct DWBlocks {
    Mat S, P, Q;
    std::vector<PassingInfo> passings;
    bool p_defective = false;
    bool linearly_unstable = false;
    /// [[S, Q], [0, P]]
    Mat assembled() const;
};

struct SpectralTolerances {
    double axis = 1e-9;       // |Re| <= axis * |L| counts as imaginary axis
    double rank = 1e-8;       // nullity threshold relative to |L|
    double cluster = 1e-5;    // eigenvalues closer than cluster * max(1,|L|) are merged
    double passing = 1e-8;    // least-squares residual for uncoupled passing
};

struct LinearizationReport {
    Mat L;
    std::vector<cplx> eigenvalues;
    std::vector<EigenCluster> clusters;
    bool diagonalizable = true;
    bool converged = true;
    double norm = 0.0;
    LinearClass classification = LinearClass::LinearlyStable;
    std::optional<DWBlocks> dw;
};

/// Eigenvalues of a dense real matrix, sorted by real then imaginary part.
std::vector<cplx> eigenvalues(const Mat& M, bool* converged = nullptr);
std::vector<EigenCluster> cluster_spectrum(const Mat& M, const std::vector<cplx>& ev,
                                           const SpectralTolerances& tol = {});

LinearizationReport analyze_matrix(const Mat& L, const SpectralTolerances& tol = {});
LinearizationReport linearize(const PoissonSystem& sys, const EquilibriumPoint& ze,
                              const SpectralTolerances& tol = {});
DWBlocks dw_blocks(const PoissonSystem& sys, const Vec& ze);
void classify_passing(DWBlocks& blocks, const SpectralTolerances& tol = {});

}  // namespace pstab
