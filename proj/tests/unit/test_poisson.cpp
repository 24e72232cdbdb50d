#include <gtest/gtest.h>

#include <cmath>

#include "pstab/errors.hpp"
#include "pstab/gallery.hpp"
#include "pstab/poisson.hpp"
#include "pstab/system_def.hpp"

using namespace pstab;

namespace {

SystemPtr rigid_body() {
    SystemDef s;
    s.name = "rigid_body";
    s.variables = {"x", "y", "z"};
    s.entries = {{0, 1, "-z"}, {0, 2, "y"}, {1, 2, "-x"}};
    s.hamiltonian = "0.5*(x^2/I1 + y^2/I2 + z^2/I3)";
    s.parameters = {{"I1", 1.0}, {"I2", 2.0}, {"I3", 3.0}};
    s.casimirs = {{"C", "0.5*(x^2 + y^2 + z^2)", false, std::nullopt}};
    return build_system(s);
}

Vec v3(double a, double b, double c) { return Vec{{a, b, c}}; }

}  // namespace

TEST(Poisson, TensorAntisymmetric) {
    auto sys = rigid_body();
    Mat B = tensor_at(*sys, v3(1, 2, 3));
    EXPECT_LE((B + B.transpose()).norm(), 0.0);
    EXPECT_DOUBLE_EQ(B(0, 1), -3);
    EXPECT_DOUBLE_EQ(B(1, 0), 3);
}

TEST(Poisson, BracketOfCoordinates) {
    auto sys = rigid_body();
    Vec z = v3(0.3, -0.7, 1.1);
    auto x = sys->parse_expr("x"), y = sys->parse_expr("y"), zz = sys->parse_expr("z");
    EXPECT_DOUBLE_EQ(bracket_eval(*sys, x, y, z), -1.1);
    EXPECT_DOUBLE_EQ(bracket_eval(*sys, y, x, z), 1.1);
    EXPECT_DOUBLE_EQ(bracket_eval(*sys, zz, zz, z), 0.0);
}

TEST(Poisson, HamiltonianVectorFieldIsEuler) {
    auto sys = rigid_body();
    Vec z = v3(0.3, -0.7, 1.1);
    Vec X = hamiltonian_vf(*sys, z);
    // B v = z x v
    Vec omega = v3(0.3 / 1, -0.7 / 2, 1.1 / 3);
    Eigen::Vector3d ref = Eigen::Vector3d(z).cross(Eigen::Vector3d(omega));
    EXPECT_LE((X - Vec(ref)).norm(), 1e-15);
}

TEST(Poisson, JacobianMatchesFiniteDifferences) {
    auto sys = rigid_body();
    Vec z = v3(0.3, -0.7, 1.1);
    Mat J = vf_jacobian(*sys, z);
    const double h = 1e-6;
    for (int i = 0; i < 3; ++i) {
        Vec e = Vec::Zero(3);
        e[i] = h;
        Vec col = (hamiltonian_vf(*sys, z + e) - hamiltonian_vf(*sys, z - e)) / (2 * h);
        EXPECT_LE((J.col(i) - col).norm(), 1e-8);
    }
}

TEST(Poisson, JacobiAndCasimirResiduals) {
    auto sys = rigid_body();
    EXPECT_LE(jacobi_residual(*sys, v3(0.3, -0.7, 1.1)), 1e-14);
    EXPECT_LE(jacobi_residual_sampled(*sys, sys->sampling_box(), 100), 1e-12);
    EXPECT_LE(casimir_residual(*sys, sys->casimirs[0].expr, v3(0.3, -0.7, 1.1)), 1e-15);
    EXPECT_GT(casimir_residual(*sys, sys->parse_expr("x"), v3(0.3, -0.7, 1.1)), 0.1);
}

TEST(Poisson, BrokenTensorFailsJacobi) {
    SystemDef s;
    s.name = "broken";
    s.variables = {"x", "y", "z"};
    s.entries = {{0, 1, "1"}, {1, 2, "y"}};
    s.hamiltonian = "x";
    auto sys = build_system(s);
    EXPECT_GT(jacobi_residual(*sys, v3(0.1, 0.2, 0.3)), 0.5);
}

TEST(Poisson, NumericalRank) {
    Mat M = Mat::Zero(3, 3);
    EXPECT_EQ(numerical_rank(M), 0);
    M(0, 1) = 1;
    M(1, 0) = -1;
    EXPECT_EQ(numerical_rank(M), 2);
    M(0, 2) = 1e-13;
    EXPECT_EQ(numerical_rank(M), 2);
}

TEST(Poisson, FindEquilibrium) {
    auto sys = rigid_body();
    auto eq = find_equilibrium(*sys, v3(0.01, 0.02, 1.0));
    ASSERT_TRUE(eq.converged);
    EXPECT_LE(hamiltonian_vf(*sys, eq.z).norm(), 1e-10);
    EXPECT_EQ(eq.leaf_rank, 2);
    auto known = make_equilibrium(*sys, v3(0, 0, 1));
    EXPECT_TRUE(known.converged);
    EXPECT_EQ(known.residual, 0.0);
}

TEST(Poisson, FindFunction) {
    auto sys = rigid_body();
    EXPECT_NE(sys->find_function("H"), nullptr);
    EXPECT_NE(sys->find_function("C"), nullptr);
    EXPECT_EQ(sys->find_function("nope"), nullptr);
}

TEST(Poisson, ValidationRejectsBadSystems) {
    SystemDef s;
    s.name = "bad";
    s.variables = {"x", "x"};
    s.entries = {{0, 1, "1"}};
    s.hamiltonian = "x";
    EXPECT_THROW(build_system(s), Error);
    s.variables = {"x", "sin"};
    EXPECT_THROW(build_system(s), Error);
    s.variables = {"x", "y"};
    s.entries = {{1, 0, "1"}};
    EXPECT_THROW(build_system(s), Error);
    s.entries = {{0, 2, "1"}};
    EXPECT_THROW(build_system(s), Error);
    s.entries = {{0, 1, "q"}};
    EXPECT_THROW(build_system(s), UnknownIdentifierError);
}

TEST(Poisson, DescribeRoundTrip) {
    auto sys = rigid_body();
    SystemDef back = describe_system(*sys);
    auto again = build_system(back);
    Vec z = v3(0.2, 0.4, -0.9);
    EXPECT_EQ(tensor_at(*sys, z), tensor_at(*again, z));
    EXPECT_EQ(hamiltonian_vf(*sys, z), hamiltonian_vf(*again, z));
}

TEST(Poisson, AntisymmetryAndLeibniz) {
    auto sys = rigid_body();
    auto F = sys->parse_expr("sin(x)*y + z^2");
    auto G = sys->parse_expr("exp(y)*z");
    auto K = sys->parse_expr("x*y - z");
    auto GK = sys->parse_expr("exp(y)*z*(x*y - z)");
    Vec z = v3(0.3, -0.2, 0.8);
    EXPECT_NEAR(bracket_eval(*sys, F, G, z), -bracket_eval(*sys, G, F, z), 1e-15);
    double lhs = bracket_eval(*sys, F, GK, z);
    double rhs = bracket_eval(*sys, F, G, z) * K.eval({z.data(), 3}) + G.eval({z.data(), 3}) * bracket_eval(*sys, F, K, z);
    EXPECT_NEAR(lhs, rhs, 1e-13);
}
