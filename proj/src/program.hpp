#pragma once

#include <vector>

#include "pstab/expr.hpp"

namespace pstab {

enum class Op : unsigned char {
    Const, Var, Param, Neg, Sin, Cos, Tan, Exp, Log, Sqrt, Atan, Abs, Add, Sub, Mul, Div, PowInt, PowReal
};

struct Instr {
    Op op;
    int idx;
    double c;
    const Node* src;
};

/// Postfix program for a single expression tree; the tree is kept alive by the program.
class Program {
public:
    explicit Program(NodePtr root);

    double eval(const double* z, const double* p) const;
    double grad(const double* z, const double* p, int n, double* g) const;
    double hess(const double* z, const double* p, int n, double* g, double* h) const;

    int variable_extent() const { return var_extent_; }
    int parameter_extent() const { return param_extent_; }

private:
    void emit(const Node& n, int depth);

    NodePtr root_;
    std::vector<Instr> code_;
    int max_stack_ = 0;
    int var_extent_ = 0;
    int param_extent_ = 0;
};

}  // namespace pstab
