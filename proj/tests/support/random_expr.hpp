#pragma once

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "pstab/expr.hpp"

namespace testing_support {

// Random trees over n variables whose operations stay finite on [-1,1]^n.
inline pstab::NodePtr random_node(std::mt19937_64& rng, int n, int depth) {
    using namespace pstab;
    std::uniform_int_distribution<int> pick(0, 9);
    std::uniform_real_distribution<double> coef(-2.0, 2.0);
    if (depth <= 0) {
        if (pick(rng) < 7) {
            int i = std::uniform_int_distribution<int>(0, n - 1)(rng);
            static const char* names[] = {"x", "y", "z", "w"};
            return make_variable(i, names[i]);
        }
        return make_constant(std::round(coef(rng) * 100) / 100);
    }
    auto sub = [&] { return random_node(rng, n, depth - 1); };
    auto one_plus_sq = [&](NodePtr a) {
        return make_binary(BinaryOp::Add, make_constant(1.0), make_power(a, 2));
    };
    switch (std::uniform_int_distribution<int>(0, 11)(rng)) {
        case 0: return make_binary(BinaryOp::Add, sub(), sub());
        case 1: return make_binary(BinaryOp::Sub, sub(), sub());
        case 2: return make_binary(BinaryOp::Mul, sub(), sub());
        case 3: return make_binary(BinaryOp::Div, sub(), one_plus_sq(sub()));
        case 4: return make_unary(UnaryOp::Sin, sub());
        case 5: return make_unary(UnaryOp::Cos, sub());
        case 6: return make_unary(UnaryOp::Atan, sub());
        case 7: return make_unary(UnaryOp::Exp, make_unary(UnaryOp::Sin, sub()));
        case 8: return make_unary(UnaryOp::Log, one_plus_sq(sub()));
        case 9: return make_unary(UnaryOp::Sqrt, one_plus_sq(sub()));
        case 10: return make_power(sub(), std::uniform_int_distribution<int>(2, 3)(rng));
        default: return make_unary(UnaryOp::Neg, sub());
    }
}

inline pstab::Expression random_expression(std::mt19937_64& rng, int n, int depth) {
    return pstab::Expression(random_node(rng, n, depth));
}

inline std::vector<double> random_point(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> z(n);
    for (auto& v : z) v = u(rng);
    return z;
}

inline Eigen::VectorXd fd_gradient(const pstab::Expression& e, std::vector<double> z, double h) {
    Eigen::VectorXd g(z.size());
    for (size_t i = 0; i < z.size(); ++i) {
        double c = z[i];
        z[i] = c + h;
        double fp = e.eval(z);
        z[i] = c - h;
        double fm = e.eval(z);
        z[i] = c;
        g[i] = (fp - fm) / (2 * h);
    }
    return g;
}

inline Eigen::MatrixXd fd_hessian(const pstab::Expression& e, std::vector<double> z, double h) {
    const int n = int(z.size());
    Eigen::MatrixXd H(n, n);
    auto f = [&](int i, double di, int j, double dj) {
        std::vector<double> w = z;
        w[i] += di;
        w[j] += dj;
        return e.eval(w);
    };
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            H(i, j) = (f(i, h, j, h) - f(i, h, j, -h) - f(i, -h, j, h) + f(i, -h, j, -h)) / (4 * h * h);
    return H;
}

}  // namespace testing_support
