#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pstab/poisson.hpp"
#include "pstab/spectral.hpp"

namespace pstab {

enum class Verdict {
    AsymptoticallyStable,
    WeaklyAsymptoticallyStable,
    LyapunovStable,
    SpectrallyUnstable,
    LinearlyUnstable,
    Inconclusive
};
enum class Grade { Certified, Empirical, Inconclusive };

const char* to_string(Verdict v);
const char* to_string(Grade g);


struct CertifyOptions {
    /// Conserved quantities besides H; nullopt selects every applicable Casimir and conserved function.
    std::optional<std::vector<std::string>> conserved;
    /// Name of an auxiliary function, or "auto" to try suggested linear forms.
    std::optional<std::string> F;
    bool trusted_F = false;
    double radius = 0.1;
    int samples = 4000;
    double critical_tol = 1e-9;
    double margin = 1e-8;
    double slack = 1e-12;
    std::uint64_t seed = kDefaultSeed;
};

/// Orthonormal basis (columns) of the common kernel of the given row vectors.
Mat kernel_basis(const std::vector<Vec>& gradients, int n);
/// Basis (columns) of {c : sum_a c_a grad_a = 0}.
Mat multiplier_space(const std::vector<Vec>& gradients, int n);

struct DefinitenessResult {
    bool success = false;
    Vec direction;          // coordinates in the multiplier basis
    Vec multipliers;        // one per function
    Vec restricted_spectrum;
    double min_eigenvalue = 0.0;
    double margin = 0.0;
};

DefinitenessResult definiteness_search(const Mat& multiplier_basis, const std::vector<Mat>& hessians,
                                       const Mat& W, double margin_rel = 1e-8,
                                       std::uint64_t seed = kDefaultSeed);

/// Multiplier space, W and definiteness search for a fixed list of conserved functions.
struct EnergyCasimirCheck {
    Mat N;
    Mat W;
    DefinitenessResult def;
    bool critical_ok = true;
};

EnergyCasimirCheck energy_casimir_check(const PoissonSystem& sys, const Vec& ze, const std::vector<Expression>& fns,
                                        const CertifyOptions& opts = {});

struct FConditionReport {
    std::string F;
    int samples = 0;
    int skipped = 0;
    double radius = 0.0;
    double g2_min = 0.0, g2_max = 0.0;
    double g1_min = 0.0, g1_max = 0.0;
    int violations_i = 0;
    int violations_ii = 0;
    bool hypothesis_i = false;
    bool hypothesis_ii = false;
    bool strict = false;
    bool holds() const { return hypothesis_i || hypothesis_ii; }
};

FConditionReport check_condition_F(const PoissonSystem& sys, const Vec& ze, const Expression& F,
                                   double radius = 0.1, int count = 4000, double slack = 1e-12,
                                   std::uint64_t seed = kDefaultSeed);

struct FSuggestion {
    std::string text;
    Expression expr;
    double rate = 0.0;  // the contraction rate lambda of eigenvalue -lambda
};

std::vector<FSuggestion> suggest_F(const PoissonSystem& sys, const EquilibriumPoint& ze,
                                   const LinearizationReport& lin);

struct LyapunovData {
    std::vector<Expression> functions;  // H, C_1..C_k and F when present
    Vec multipliers;
    Vec reference;
    double epsilon = 1.0;
    Mat hessian;
    bool has_F = false;
    double value(const PoissonSystem& sys, const Vec& z) const;
};

LyapunovData build_lyapunov(const PoissonSystem& sys, const Vec& ze, const std::vector<Expression>& functions,
                            const Vec& multipliers, bool has_F, double margin_rel = 1e-8);

struct Certificate {
    Verdict verdict = Verdict::Inconclusive;
    Grade grade = Grade::Inconclusive;
    std::vector<std::string> function_names;
    Vec multipliers;
    Mat W;
    Vec restricted_spectrum;
    int multiplier_dim = 0;
    std::optional<double> epsilon;
    std::optional<FConditionReport> fcondition;
    std::optional<LyapunovData> lyapunov;
    std::string F_text;
    LinearizationReport linearization;
    int leaf_rank = 0;
    std::vector<std::string> notes;
};

/// Names of the conserved quantities used when none are requested.
std::vector<std::string> default_conserved(const PoissonSystem& sys, const Vec& ze);

Certificate certify(const PoissonSystem& sys, const EquilibriumPoint& ze, const CertifyOptions& opts = {});

}  // namespace pstab
