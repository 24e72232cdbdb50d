#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "pstab/errors.hpp"
#include "pstab/expr.hpp"
#include "random_expr.hpp"

using namespace pstab;

namespace {
const std::vector<std::string> xyz = {"x", "y", "z"};

double ev(const std::string& s, std::vector<double> z, std::vector<std::string> p = {}, std::vector<double> pv = {}) {
    return parse(s, xyz, p).eval(z, pv);
}
}  // namespace

TEST(Expr, Arithmetic) {
    EXPECT_DOUBLE_EQ(ev("1 + 2*3", {0, 0, 0}), 7.0);
    EXPECT_DOUBLE_EQ(ev("(1 + 2)*3", {0, 0, 0}), 9.0);
    EXPECT_DOUBLE_EQ(ev("x - y - z", {1, 2, 3}), -4.0);
    EXPECT_DOUBLE_EQ(ev("x/y/z", {8, 2, 2}), 2.0);
    EXPECT_DOUBLE_EQ(ev("2^3^2", {0, 0, 0}), 512.0);
    EXPECT_DOUBLE_EQ(ev("-x^2", {3, 0, 0}), -9.0);
    EXPECT_DOUBLE_EQ(ev("x^-2", {2, 0, 0}), 0.25);
    EXPECT_DOUBLE_EQ(ev("x^0.5", {4, 0, 0}), 2.0);
    EXPECT_DOUBLE_EQ(ev("1.5e1", {0, 0, 0}), 15.0);
}

TEST(Expr, Functions) {
    EXPECT_NEAR(ev("sin(x)^2 + cos(x)^2", {0.7, 0, 0}), 1.0, 1e-15);
    EXPECT_NEAR(ev("exp(log(y))", {0, 2.5, 0}), 2.5, 1e-15);
    EXPECT_NEAR(ev("sqrt(z)", {0, 0, 9}), 3.0, 1e-15);
    EXPECT_NEAR(ev("atan(1)*4", {0, 0, 0}), M_PI, 1e-15);
    EXPECT_NEAR(ev("abs(x) + tan(0)", {-2, 0, 0}), 2.0, 1e-15);
    EXPECT_NEAR(ev("pi", {0, 0, 0}), M_PI, 0);
}

TEST(Expr, Parameters) {
    EXPECT_DOUBLE_EQ(ev("a*x + b", {2, 0, 0}, {"a", "b"}, {3, 1}), 7.0);
    EXPECT_DOUBLE_EQ(parse_constant("2*k", {"k"}, std::vector<double>{4.0}), 8.0);
}

TEST(Expr, SyntaxErrorOffset) {
    try {
        parse("x +* y", xyz);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.offset(), 3u);
    }
    EXPECT_THROW(parse("(x + y", xyz), ParseError);
    EXPECT_THROW(parse("x y", xyz), ParseError);
    EXPECT_THROW(parse("", xyz), ParseError);
    EXPECT_THROW(parse("2x", xyz), ParseError);
    EXPECT_THROW(parse("x**2", xyz), ParseError);
    EXPECT_THROW(parse("x^y", xyz), ParseError);
}

TEST(Expr, UnknownIdentifier) {
    try {
        parse("x + w", xyz);
        FAIL();
    } catch (const UnknownIdentifierError& e) {
        EXPECT_EQ(e.name(), "w");
    }
    EXPECT_THROW(parse("foo(x)", xyz), Error);
}

TEST(Expr, DomainErrors) {
    auto e = parse("log(x)", xyz);
    EXPECT_THROW(e.eval(std::vector<double>{-1, 0, 0}), DomainError);
    EXPECT_THROW(parse("1/x", xyz).eval(std::vector<double>{0, 0, 0}), DomainError);
    EXPECT_THROW(parse("sqrt(y)", xyz).eval(std::vector<double>{0, -1, 0}), DomainError);
    EXPECT_THROW(parse("y^0.5", xyz).eval(std::vector<double>{0, -1, 0}), DomainError);
    EXPECT_DOUBLE_EQ(parse("y^3", xyz).eval(std::vector<double>{0, -2, 0}), -8.0);
    try {
        parse("x + log(y)", xyz).eval(std::vector<double>{0, -2, 0});
        FAIL();
    } catch (const DomainError& d) {
        EXPECT_NE(d.subexpression().find("log"), std::string::npos);
    }
}

TEST(Expr, ReservedNames) {
    EXPECT_TRUE(is_reserved_name("sin"));
    EXPECT_TRUE(is_reserved_name("pi"));
    EXPECT_FALSE(is_reserved_name("theta"));
}

TEST(Expr, GradientClosedForm) {
    auto e = parse("x^2*y + sin(z)", xyz);
    std::vector<double> z = {1.5, -0.5, 0.3};
    Eigen::VectorXd g = e.grad(z);
    EXPECT_NEAR(g[0], 2 * 1.5 * -0.5, 1e-15);
    EXPECT_NEAR(g[1], 1.5 * 1.5, 1e-15);
    EXPECT_NEAR(g[2], std::cos(0.3), 1e-15);
    Eigen::MatrixXd H = e.hess(z);
    EXPECT_NEAR(H(0, 0), 2 * -0.5, 1e-15);
    EXPECT_NEAR(H(0, 1), 3.0, 1e-15);
    EXPECT_NEAR(H(1, 0), 3.0, 1e-15);
    EXPECT_NEAR(H(2, 2), -std::sin(0.3), 1e-15);
    EXPECT_NEAR(H(1, 1), 0.0, 0);
}

TEST(Expr, GradientMatchesFiniteDifferences) {
    std::mt19937_64 rng(7);
    for (int k = 0; k < 200; ++k) {
        Expression e = testing_support::random_expression(rng, 3, 4);
        std::vector<double> z = testing_support::random_point(rng, 3);
        Eigen::VectorXd g = e.grad(z);
        Eigen::VectorXd fd = testing_support::fd_gradient(e, z, 1e-5);
        for (int i = 0; i < 3; ++i)
            EXPECT_LE(std::abs(g[i] - fd[i]), 1e-6 * std::max(1.0, std::abs(fd[i]))) << e.str();
    }
}

TEST(Expr, HessianMatchesFiniteDifferences) {
    std::mt19937_64 rng(11);
    for (int k = 0; k < 100; ++k) {
        Expression e = testing_support::random_expression(rng, 3, 3);
        std::vector<double> z = testing_support::random_point(rng, 3);
        Eigen::MatrixXd H = e.hess(z);
        Eigen::MatrixXd fd = testing_support::fd_hessian(e, z, 1e-4);
        EXPECT_LE((H - H.transpose()).norm(), 1e-12);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                EXPECT_LE(std::abs(H(i, j) - fd(i, j)), 1e-5 * std::max(1.0, std::abs(fd(i, j)))) << e.str();
    }
}

TEST(Expr, PrintRoundTrip) {
    std::mt19937_64 rng(3);
    for (int k = 0; k < 200; ++k) {
        Expression e = testing_support::random_expression(rng, 3, 4);
        Expression back = parse(e.str(), xyz);
        std::vector<double> z = testing_support::random_point(rng, 3);
        double a = e.eval(z), b = back.eval(z);
        EXPECT_NEAR(a, b, 1e-12 * std::max(1.0, std::abs(a))) << e.str();
    }
    for (const char* s : {"x - (y - z)", "x/(y*z)", "-(x + y)^2", "(-x)^3", "x^-2", "(x + y)^0.5", "-x^2"}) {
        Expression e = parse(s, xyz);
        Expression back = parse(e.str(), xyz);
        EXPECT_TRUE(structurally_equal(e.root(), back.root())) << s << " -> " << e.str();
    }
}

TEST(Expr, Substitute) {
    auto e = parse("x*y + z", xyz);
    std::vector<std::string> uv = {"u", "v"};
    std::vector<Expression> rep = {parse("u + v", uv), parse("u - v", uv), parse("2", uv)};
    Expression s = substitute(e, rep);
    EXPECT_DOUBLE_EQ(s.eval(std::vector<double>{3, 1}), 4 * 2 + 2);
}

TEST(Expr, VariableExtent) {
    EXPECT_EQ(parse("y + 1", xyz).variable_extent(), 2);
    EXPECT_FALSE(parse("2*pi", xyz).depends_on_variables());
}
