#include <gtest/gtest.h>

#include <cmath>

#include "pstab/certify.hpp"
#include "pstab/errors.hpp"
#include "pstab/gallery.hpp"
#include "pstab/system_def.hpp"

using namespace pstab;

namespace {
Vec vec(std::initializer_list<double> v) {
    Vec z(v.size());
    std::copy(v.begin(), v.end(), z.data());
    return z;
}

Certificate run(const GalleryEntry& g, const Vec& z, std::optional<std::string> F = std::nullopt) {
    CertifyOptions o;
    o.F = F;
    return certify(*g.system, make_equilibrium(*g.system, z), o);
}
}  // namespace

TEST(Certify, KernelAndMultiplierSpaces) {
    Mat W = kernel_basis({vec({1, 0, 0})}, 3);
    ASSERT_EQ(W.cols(), 2);
    EXPECT_LE((W.transpose() * W - Mat::Identity(2, 2)).norm(), 1e-14);
    EXPECT_LE(W.row(0).norm(), 1e-15);
    Mat N = multiplier_space({vec({0, 0, 0}), vec({0, 0, 2})}, 3);
    ASSERT_EQ(N.cols(), 1);
    EXPECT_NEAR(std::abs(N(0, 0)), 1.0, 1e-14);
    EXPECT_NEAR(N(1, 0), 0.0, 1e-14);
    EXPECT_EQ(multiplier_space({vec({1, 0}), vec({0, 1})}, 2).cols(), 0);
}

TEST(Certify, DefinitenessSearchFindsMixedCombination) {
    // H1 = diag(1,-1), H2 = diag(-1,3): 0.5 H1 + 0.5 H2 = diag(0,1) not definite, 0.75 H1 + 0.25 H2 is.
    Mat basis = Mat::Identity(2, 2);
    Mat H1 = vec({1, -1}).asDiagonal(), H2 = vec({-1, 3}).asDiagonal();
    auto r = definiteness_search(basis, {H1, H2}, Mat::Identity(2, 2));
    ASSERT_TRUE(r.success);
    Mat M = r.multipliers[0] * H1 + r.multipliers[1] * H2;
    Eigen::SelfAdjointEigenSolver<Mat> es(M);
    double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
    EXPECT_TRUE(lo > 0 || hi < 0);
}

TEST(Certify, DefinitenessSearchFailsOnIndefinitePencil) {
    Mat H1 = vec({1, -1}).asDiagonal(), H2 = vec({-1, 1}).asDiagonal();
    auto r = definiteness_search(Mat::Identity(2, 2), {H1, H2}, Mat::Identity(2, 2));
    EXPECT_FALSE(r.success);
}

TEST(Certify, TodaVerdicts) {
    auto g = gallery_load("toda2");
    auto c = run(g, vec({0, 1}), "F");
    EXPECT_EQ(c.verdict, Verdict::WeaklyAsymptoticallyStable);
    EXPECT_EQ(c.grade, Grade::Empirical);
    ASSERT_TRUE(c.fcondition.has_value());
    EXPECT_TRUE(c.fcondition->holds());
    auto u = run(g, vec({0, -1}), "F");
    EXPECT_EQ(u.verdict, Verdict::SpectrallyUnstable);
    EXPECT_EQ(u.grade, Grade::Certified);
}

TEST(Certify, ConditionFOnToda) {
    auto g = gallery_load("toda2");
    auto F = g.system->parse_expr("x");
    // {F,H} = -2 x y <= 0 near (0,1); {{F,H},H} keeps the sign fixed
    auto rep = check_condition_F(*g.system, vec({0, 1}), F, 0.1, 500);
    EXPECT_TRUE(rep.holds());
    EXPECT_GT(rep.samples, 0);
}

TEST(Certify, RigidAxisMultipliers) {
    auto g = gallery_load("rigid_axis");
    auto c = run(g, vec({0, 0, 1}));
    EXPECT_EQ(c.verdict, Verdict::LyapunovStable);
    EXPECT_EQ(c.grade, Grade::Certified);
    ASSERT_EQ(c.multipliers.size(), 2);
    double cosine = std::abs(c.multipliers[1]) / c.multipliers.norm();
    EXPECT_GE(cosine, 1 - 1e-9);
    Vec s = c.restricted_spectrum.cwiseAbs();
    std::sort(s.data(), s.data() + s.size());
    ASSERT_EQ(s.size(), 2);
    EXPECT_NEAR(s[0] / std::abs(c.multipliers[1]), 1.0, 1e-9);
    EXPECT_NEAR(s[1] / std::abs(c.multipliers[1]), 1.0, 1e-9);
}

TEST(Certify, TorusUsesLocalCasimir) {
    auto g = gallery_load("torus_alpha");
    auto names = default_conserved(*g.system, vec({0, 0, 0}));
    ASSERT_EQ(names.size(), 1u);
    EXPECT_EQ(names[0], "C");
    auto c = run(g, vec({0, 0, 0}));
    EXPECT_EQ(c.verdict, Verdict::LyapunovStable);
    EXPECT_EQ(c.grade, Grade::Certified);
    // Hessian of H is diag(1, 0, 2) restricted to the orthonormal kernel of dC = (alpha, 1, 0)
    const double alpha = (1 + std::sqrt(5.0)) / 2;
    Vec s = c.restricted_spectrum;
    std::sort(s.data(), s.data() + s.size());
    ASSERT_EQ(s.size(), 2);
    EXPECT_NEAR(s[0], 1 / (1 + alpha * alpha), 1e-9);
    EXPECT_NEAR(s[1], 2.0, 1e-9);
}

TEST(Certify, ChaplyginReduced) {
    auto g = gallery_load("chaplygin_reduced");
    auto u = run(g, vec({0, -1}));
    EXPECT_EQ(u.verdict, Verdict::SpectrallyUnstable);
    auto s = run(g, vec({0, 1}), "F");
    EXPECT_EQ(s.verdict, Verdict::WeaklyAsymptoticallyStable);
    auto lin = linearize(*g.system, make_equilibrium(*g.system, vec({0, 1})));
    auto sug = suggest_F(*g.system, make_equilibrium(*g.system, vec({0, 1})), lin);
    ASSERT_FALSE(sug.empty());
    Vec gr = sug[0].expr.grad(std::vector<double>{0.3, 0.7});
    EXPECT_NEAR(gr[1], 0.0, 1e-12);
    EXPECT_GT(std::abs(gr[0]), 1e-6);
}

TEST(Certify, AutoFOption) {
    auto g = gallery_load("chaplygin_reduced");
    auto c = run(g, vec({0, 1}), "auto");
    EXPECT_EQ(c.verdict, Verdict::WeaklyAsymptoticallyStable);
}

TEST(Certify, UnknownFunctionIsRejected) {
    auto g = gallery_load("toda2");
    EXPECT_THROW(run(g, vec({0, 1}), "nope"), Error);
}

TEST(Certify, NonEquilibriumIsRejected) {
    auto g = gallery_load("toda2");
    EXPECT_THROW(run(g, vec({1, 1})), PreconditionError);
}

TEST(Certify, WheelsSweepSign) {
    auto g = gallery_load("wheels");
    auto c0 = run(g, vec({0, 0, 0}));
    EXPECT_EQ(c0.verdict, Verdict::LyapunovStable);
    EXPECT_EQ(c0.grade, Grade::Certified);
}

TEST(Certify, InvariantUnderCasimirRescaling) {
    for (double scale : {-3.0, 0.01, 250.0}) {
        SystemDef s;
        s.name = "rb";
        s.variables = {"x", "y", "z"};
        s.entries = {{0, 1, "-z"}, {0, 2, "y"}, {1, 2, "-x"}};
        s.hamiltonian = "0.5*(x^2 + y^2/2 + z^2/3)";
        s.casimirs = {{"C", std::to_string(scale) + "*(x^2 + y^2 + z^2) + 7", false, std::nullopt}};
        auto sys = build_system(s);
        for (auto z : {vec({1, 0, 0}), vec({0, 1, 0}), vec({0, 0, 1})}) {
            auto c = certify(*sys, make_equilibrium(*sys, z));
            Verdict want = z[1] == 1 ? Verdict::SpectrallyUnstable : Verdict::LyapunovStable;
            EXPECT_EQ(c.verdict, want) << scale << " " << z.transpose();
        }
    }
}

TEST(Certify, LyapunovValueIsMinimalAtEquilibrium) {
    auto g = gallery_load("rigid_axis");
    auto c = run(g, vec({0, 0, 1}));
    ASSERT_TRUE(c.lyapunov.has_value());
    double v0 = c.lyapunov->value(*g.system, vec({0, 0, 1}));
    for (auto d : {vec({0.01, 0, 0}), vec({0, -0.02, 0}), vec({0.01, 0.01, 0.0})})
        EXPECT_GT(c.lyapunov->value(*g.system, vec({0, 0, 1}) + d), v0);
}
