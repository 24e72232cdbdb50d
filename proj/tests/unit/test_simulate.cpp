#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "pstab/gallery.hpp"
#include "pstab/simulate.hpp"
#include "pstab/system_def.hpp"

using namespace pstab;

namespace {
Vec vec(std::initializer_list<double> v) {
    Vec z(v.size());
    std::copy(v.begin(), v.end(), z.data());
    return z;
}

SystemPtr oscillator() {
    SystemDef s;
    s.name = "osc";
    s.variables = {"q", "p"};
    s.entries = {{0, 1, "1"}};
    s.hamiltonian = "0.5*(q^2 + p^2)";
    return build_system(s);
}
}  // namespace

TEST(Simulate, Rk4MatchesRotation) {
    auto sys = oscillator();
    IntegrateOptions o;
    o.t_end = 2.0;
    o.dt = 1e-3;
    auto tr = integrate(*sys, vec({1, 0}), o);
    Vec z = tr.z.back();
    EXPECT_NEAR(tr.t.back(), 2.0, 1e-12);
    EXPECT_NEAR(z[0], std::cos(2.0), 1e-10);
    EXPECT_NEAR(z[1], -std::sin(2.0), 1e-10);
}

TEST(Simulate, Rk4FourthOrderDrift) {
    auto sys = oscillator();
    std::vector<double> err;
    for (double h : {0.1, 0.05, 0.025}) {
        IntegrateOptions o;
        o.t_end = 4.0;
        o.dt = h;
        auto tr = integrate(*sys, vec({1, 0}), o);
        auto d = drift_report(tr);
        ASSERT_FALSE(d.empty());
        err.push_back(d[0].max_relative);
    }
    EXPECT_GT(std::log2(err[0] / err[1]), 3.5);
    EXPECT_GT(std::log2(err[1] / err[2]), 3.5);
}

TEST(Simulate, AdaptiveMeetsTolerance) {
    auto g = gallery_load("chaplygin_reduced");
    IntegrateOptions o;
    o.t_end = 5.0;
    o.adaptive_tol = 1e-10;
    auto tr = integrate(*g.system, vec({0.2, 0.5}), o);
    EXPECT_NEAR(tr.t.back(), 5.0, 1e-12);
    for (auto& d : drift_report(tr)) EXPECT_LE(d.max_relative, 1e-8) << d.name;
}

TEST(Simulate, Rk45ErrorEstimateShrinks) {
    auto sys = oscillator();
    Vec e1, e2;
    rk45_step(*sys, vec({1, 0}), 0.2, e1);
    rk45_step(*sys, vec({1, 0}), 0.1, e2);
    EXPECT_GT(e1.norm(), e2.norm() * 16);
}

TEST(Simulate, WheelsConserveCasimir) {
    auto g = gallery_load("wheels");
    IntegrateOptions o;
    o.t_end = 3.0;
    o.dt = 0.01;
    auto tr = integrate(*g.system, vec({0.3, 0.2, 0.1}), o);
    ASSERT_EQ(tr.names.size(), 2u);
    for (auto& d : drift_report(tr)) EXPECT_LE(d.max_relative, 1e-9) << d.name;
}

TEST(Simulate, Csv) {
    auto sys = oscillator();
    IntegrateOptions o;
    o.t_end = 0.1;
    o.dt = 0.01;
    o.record_every = 5;
    auto tr = integrate(*sys, vec({1, 0}), o);
    std::ostringstream os;
    write_csv(tr, os);
    std::string s = os.str();
    EXPECT_EQ(s.rfind("t,q,p,H", 0), 0u) << s.substr(0, 30);
    EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 4);
}

TEST(Simulate, ProbeKinds) {
    auto g = gallery_load("toda2");
    ProbeOptions o;
    o.samples = 8;
    o.horizon = 50;
    EXPECT_EQ(stability_probe(*g.system, vec({0, -1}), nullptr, o).kind, ProbeKind::Escape);
    EXPECT_NE(stability_probe(*g.system, vec({0, 1}), nullptr, o).kind, ProbeKind::Escape);
    auto r = gallery_load("rigid_axis");
    EXPECT_EQ(stability_probe(*r.system, vec({0, 0, 1}), nullptr, o).kind, ProbeKind::Containment);
}
