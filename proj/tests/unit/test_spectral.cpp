#include <gtest/gtest.h>

#include <algorithm>

#include "pstab/gallery.hpp"
#include "pstab/spectral.hpp"

using namespace pstab;

namespace {
Vec vec(std::initializer_list<double> v) {
    Vec z(v.size());
    std::copy(v.begin(), v.end(), z.data());
    return z;
}
}  // namespace

TEST(Spectral, EigenvaluesSorted) {
    Mat M(3, 3);
    M << 0, -2, 0, 2, 0, 0, 0, 0, -1;
    auto ev = eigenvalues(M);
    ASSERT_EQ(ev.size(), 3u);
    EXPECT_NEAR(ev[0].real(), -1, 1e-14);
    EXPECT_NEAR(ev[1].imag(), -2, 1e-14);
    EXPECT_NEAR(ev[2].imag(), 2, 1e-14);
}

TEST(Spectral, Classification) {
    Mat A(2, 2);
    A << 1, 0, 0, -1;
    EXPECT_EQ(analyze_matrix(A).classification, LinearClass::SpectrallyUnstable);
    A << 0, 1, -1, 0;
    EXPECT_EQ(analyze_matrix(A).classification, LinearClass::LinearlyStable);
    A << 0, 1, 0, 0;
    auto r = analyze_matrix(A);
    EXPECT_EQ(r.classification, LinearClass::LinearlyUnstableDefectiveAxis);
    EXPECT_FALSE(r.diagonalizable);
    ASSERT_EQ(r.clusters.size(), 1u);
    EXPECT_EQ(r.clusters[0].algebraic, 2);
    EXPECT_EQ(r.clusters[0].geometric, 1);
    A << -1, 0, 0, 0;
    EXPECT_EQ(analyze_matrix(A).classification, LinearClass::LinearlyStable);
}

TEST(Spectral, TodaLinearization) {
    auto g = gallery_load("toda2");
    for (double b : {0.5, 1.0, 2.0, -1.0}) {
        auto lin = linearize(*g.system, make_equilibrium(*g.system, vec({0, b})));
        std::vector<double> re;
        for (auto& e : lin.eigenvalues) re.push_back(e.real());
        std::sort(re.begin(), re.end());
        std::vector<double> want = {-2 * b, 0.0};
        std::sort(want.begin(), want.end());
        EXPECT_NEAR(re[0], want[0], 1e-9);
        EXPECT_NEAR(re[1], want[1], 1e-9);
        EXPECT_EQ(lin.classification, b > 0 ? LinearClass::LinearlyStable : LinearClass::SpectrallyUnstable);
    }
}

TEST(Spectral, ChaplyginDefectiveTripleZero) {
    auto g = gallery_load("chaplygin3");
    auto lin = linearize(*g.system, make_equilibrium(*g.system, vec({0.3, 0.1, 0})));
    Mat want(3, 3);
    want << 0, 0, -0.3, 0, 0, 1, 0, 0, 0;
    EXPECT_EQ(lin.L, want);
    EXPECT_EQ(lin.classification, LinearClass::LinearlyUnstableDefectiveAxis);
    ASSERT_EQ(lin.clusters.size(), 1u);
    EXPECT_EQ(lin.clusters[0].algebraic, 3);
    EXPECT_EQ(lin.clusters[0].geometric, 2);
}

TEST(Spectral, DarbouxWeinsteinBlocks) {
    struct Case {
        const char* id;
        Passing label;
        bool unstable;
    };
    for (auto c : {Case{"dw_coupled", Passing::Coupled, true}, Case{"dw_uncoupled", Passing::Uncoupled, false},
                   Case{"dw_none", Passing::None, false}}) {
        auto g = gallery_load(c.id);
        Vec z = Vec::Zero(3);
        auto blocks = dw_blocks(*g.system, z);
        classify_passing(blocks);
        Passing got = blocks.passings.empty() ? Passing::None : blocks.passings[0].label;
        EXPECT_EQ(got, c.label) << c.id;
        EXPECT_EQ(blocks.linearly_unstable, c.unstable) << c.id;
        // block triangular form reproduces the spectrum of the direct linearization
        auto direct = eigenvalues(vf_jacobian(*g.system, z));
        auto viaDW = eigenvalues(blocks.assembled());
        ASSERT_EQ(direct.size(), viaDW.size());
        for (size_t i = 0; i < direct.size(); ++i) EXPECT_LE(std::abs(direct[i] - viaDW[i]), 1e-8) << c.id;
    }
}

TEST(Spectral, CoupledPassingForcesInstability) {
    auto g = gallery_load("dw_coupled");
    SpectralTolerances tol;
    auto lin = linearize(*g.system, make_equilibrium(*g.system, Vec::Zero(3)), tol);
    ASSERT_TRUE(lin.dw.has_value());
    EXPECT_TRUE(lin.dw->linearly_unstable);
    EXPECT_NE(lin.classification, LinearClass::LinearlyStable);
}
