#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pstab/expr.hpp"
#include "pstab/sampling.hpp"

namespace pstab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct NamedFunction {
    std::string name;
    std::string text;
    Expression expr;
};

enum class CasimirScope { Global, Local };

struct Casimir {
    std::string name;
    std::string text;
    Expression expr;
    CasimirScope scope = CasimirScope::Global;
    std::optional<Box> domain;
};

struct TensorEntry {
    int i = 0, j = 0;
    std::string text;
    Expression expr;
};

struct DarbouxWeinstein {
    int pairs = 0;
    int transverse = 0;
};

/// Antisymmetric bivector field evaluated on demand.
class TensorField {
public:
    virtual ~TensorField() = default;
    virtual int dim() const = 0;
    virtual Mat value(const Vec& z) const = 0;
    /// B(z) and dB[l](i,j) = d B^{ij} / d z^l.
    virtual void derivatives(const Vec& z, Mat& B, std::vector<Mat>& dB) const = 0;
};

/// Upper-triangular expression entries; the lower half is filled by antisymmetry.
class SymbolicTensor : public TensorField {
public:
    SymbolicTensor(int n, std::vector<TensorEntry> entries, std::vector<double> params);
    int dim() const override { return n_; }
    Mat value(const Vec& z) const override;
    void derivatives(const Vec& z, Mat& B, std::vector<Mat>& dB) const override;
    const std::vector<TensorEntry>& entries() const { return entries_; }

private:
    int n_;
    std::vector<TensorEntry> entries_;
    std::vector<double> params_;
};

struct SubmanifoldChart {
    std::string name;
    std::vector<std::string> vars;
    std::vector<std::string> embedding_text;
    std::vector<Expression> embedding;  // n expressions in chart variables
    std::vector<std::string> generator_text;
    std::vector<Expression> generators;  // n - s ambient expressions
    std::vector<NamedFunction> subcasimirs;
    std::optional<Box> box;  // validation box in chart coordinates
};

class PoissonSystem;
using SystemPtr = std::shared_ptr<const PoissonSystem>;

class PoissonSystem {
public:
    std::string name;
    std::vector<std::string> variables;
    std::vector<std::string> param_names;
    std::vector<double> param_values;
    std::shared_ptr<const TensorField> tensor;
    NamedFunction hamiltonian;
    std::vector<Casimir> casimirs;
    std::vector<NamedFunction> conserved;
    std::vector<NamedFunction> aux;
    std::vector<SubmanifoldChart> charts;
    std::optional<DarbouxWeinstein> darboux_weinstein;
    std::optional<Box> box;
    std::map<int, double> periods;

    // set when the tensor comes from a chart reduction
    SystemPtr reduced_parent;
    std::string reduced_chart;

    int dim() const { return int(variables.size()); }
    std::span<const double> params() const { return param_values; }
    Expression parse_expr(const std::string& text) const { return parse(text, variables, param_names); }
    Box sampling_box() const;

    /// Looks up H, a Casimir, conserved or auxiliary function by name.
    const Expression* find_function(const std::string& name) const;
    const SubmanifoldChart* find_chart(const std::string& name) const;
};

/// Checks names, dimensions, chart shapes and the Darboux-Weinstein split.
void validate_system(const PoissonSystem& sys);

Mat tensor_at(const PoissonSystem& sys, const Vec& z);
double bracket_eval(const PoissonSystem& sys, const Expression& F, const Expression& G, const Vec& z);
Vec hamiltonian_vf(const PoissonSystem& sys, const Vec& z);
/// Jacobian of the Hamiltonian vector field, exact.
Mat vf_jacobian(const PoissonSystem& sys, const Vec& z);
double jacobi_residual(const PoissonSystem& sys, const Vec& z);
double jacobi_residual_sampled(const PoissonSystem& sys, const Box& box, int count = 200,
                               std::uint64_t seed = kDefaultSeed);
double casimir_residual(const PoissonSystem& sys, const Expression& C, const Vec& z);

int numerical_rank(const Mat& M, double rel = 1e-9, double abs_floor = 1e-12);

struct EquilibriumPoint {
    Vec z;
    double residual = 0.0;
    int leaf_rank = 0;
    bool converged = false;
    int iterations = 0;
};

EquilibriumPoint find_equilibrium(const PoissonSystem& sys, const Vec& seed, double tol = 1e-10,
                                  int max_iter = 200);
/// Wraps an already known point without iterating.
EquilibriumPoint make_equilibrium(const PoissonSystem& sys, const Vec& z, double tol = 1e-10);

}  // namespace pstab
