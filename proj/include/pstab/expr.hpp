#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace pstab {

enum class NodeKind { Constant, Variable, Parameter, Unary, Binary, Power };
enum class UnaryOp { Neg, Sin, Cos, Tan, Exp, Log, Sqrt, Atan, Abs };
enum class BinaryOp { Add, Sub, Mul, Div };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
    NodeKind kind = NodeKind::Constant;
    double value = 0.0;        // constant value, or exponent for Power
    bool integer_exponent = false;
    int index = -1;            // variable / parameter slot
    std::string name;          // variable / parameter name
    UnaryOp uop = UnaryOp::Neg;
    BinaryOp bop = BinaryOp::Add;
    NodePtr a, b;
};

NodePtr make_constant(double v);
NodePtr make_variable(int index, std::string name);
NodePtr make_parameter(int index, std::string name);
NodePtr make_unary(UnaryOp op, NodePtr a);
NodePtr make_binary(BinaryOp op, NodePtr a, NodePtr b);
NodePtr make_power(NodePtr base, double exponent);

const char* unary_name(UnaryOp op);
std::string to_string(const Node& n);
bool structurally_equal(const Node& x, const Node& y);

class Program;

/// Immutable expression; compiled once on construction.
class Expression {
public:
    Expression() = default;
    explicit Expression(NodePtr root);

    bool empty() const { return !root_; }
    const Node& root() const { return *root_; }
    const NodePtr& node() const { return root_; }
    std::string str() const;

    double eval(std::span<const double> z, std::span<const double> params = {}) const;
    /// Value plus gradient with respect to the n variables.
    double grad(std::span<const double> z, std::span<const double> params, double* g) const;
    Eigen::VectorXd grad(std::span<const double> z, std::span<const double> params = {}) const;
    /// Value, gradient and symmetric Hessian.
    double hess(std::span<const double> z, std::span<const double> params, double* g, double* h) const;
    Eigen::MatrixXd hess(std::span<const double> z, std::span<const double> params = {}) const;

    /// Highest variable index referenced plus one.
    int variable_extent() const;
    bool depends_on_variables() const { return variable_extent() > 0; }

private:
    NodePtr root_;
    std::shared_ptr<const Program> prog_;
};

Expression parse(std::string_view text, const std::vector<std::string>& vars,
                 const std::vector<std::string>& params = {});

/// Evaluate a variable-free expression text (parameters allowed).
double parse_constant(std::string_view text, const std::vector<std::string>& params = {},
                      std::span<const double> values = {});

/// Replace every variable i by replacement[i]; parameters are kept.
Expression substitute(const Expression& e, const std::vector<Expression>& replacement);

bool is_reserved_name(std::string_view name);

}  // namespace pstab
