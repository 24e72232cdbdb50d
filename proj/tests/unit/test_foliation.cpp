#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "pstab/foliation.hpp"
#include "pstab/gallery.hpp"

using namespace pstab;

namespace {
Vec vec(std::initializer_list<double> v) {
    Vec z(v.size());
    std::copy(v.begin(), v.end(), z.data());
    return z;
}
Box cube(int n, double r) { return Box{Vec::Constant(n, -r), Vec::Constant(n, r)}; }
}  // namespace

TEST(Grid, IndexingAndWrap) {
    Grid g(Box{vec({0, -1}), vec({2, 1})}, {4, 2}, {{0, 2.0}});
    EXPECT_EQ(g.cells(), 8);
    for (long i = 0; i < g.cells(); ++i) {
        EXPECT_EQ(g.index(g.coords(i)), i);
        EXPECT_EQ(g.cell_of(g.center(i)), i);
    }
    EXPECT_EQ(g.cell_of(vec({2.25, 0.5})), g.cell_of(vec({0.25, 0.5})));
    EXPECT_EQ(g.cell_of(vec({0.5, 1.5})), -1);
    Vec d = g.displacement(vec({1.9, 0}), vec({0.1, 0}));
    EXPECT_NEAR(d[0], 0.2, 1e-14);
}

TEST(Grid, DilateAndDistance) {
    Grid g(cube(2, 1), {5, 5});
    std::vector<char> m(g.cells(), 0);
    m[g.index({2, 2})] = 1;
    auto d1 = g.dilate(m, 1);
    EXPECT_EQ(std::count(d1.begin(), d1.end(), 1), 9);
    auto dist = g.distance(m, 10);
    EXPECT_EQ(dist[g.index({0, 0})], 2);
    EXPECT_EQ(dist[g.index({2, 2})], 0);
}

TEST(Foliation, SymplecticPlaneHasOneLeaf) {
    auto g = gallery_load("chaplygin_ideal");
    auto fol = label_leaves(g.system, cube(2, 1), {8, 8});
    EXPECT_EQ(fol.leaves(), 1);
    EXPECT_EQ(long(fol.footprint[0].size()), fol.grid.cells());
}

TEST(Foliation, RigidAxisCylinders) {
    // rigid_axis leaves are the cylinders x^2 + y^2 = const
    auto g = gallery_load("rigid_axis");
    auto fol = label_leaves(g.system, cube(3, 1), {8, 8, 8});
    auto a = trace_leaf(fol, vec({0.5, 0.1, 0.3}));
    auto b = trace_leaf(fol, vec({-0.1, 0.5, 0.3}));
    EXPECT_EQ(a, b);
    auto c = trace_leaf(fol, vec({0.9, 0.1, 0.3}));
    EXPECT_NE(a, c);
    // on the axis B vanishes
    auto s = trace_leaf(fol, vec({0, 0, 0.3}));
    EXPECT_EQ(s.size(), 1u);
}

TEST(Foliation, LevelCellsOfCasimir) {
    auto g = gallery_load("patrick_a");
    Grid grid(cube(3, 1), {16, 16, 16});
    auto A = *g.system->find_function("A");
    auto cells = level_cells(*g.system, grid, {A}, vec({0, 0, 0}));
    long n = std::count(cells.begin(), cells.end(), 1);
    EXPECT_GT(n, 0);
    EXPECT_LT(n, grid.cells());
    EXPECT_EQ(cells[grid.cell_of(vec({0.01, 0.01, 0.5}))], 1);
}

TEST(Foliation, PatrickIsolation) {
    for (double a : {0.5, 1.5}) {
        auto g = gallery_load("patrick_a", {{"a", a}});
        Grid grid(cube(3, 1), {32, 32, 32});
        std::vector<Expression> fns = {*g.system->find_function("h"), *g.system->find_function("A")};
        auto r = level_set_isolation(*g.system, vec({0, 0, 0}), fns, grid);
        EXPECT_EQ(r.verdict, a < 1 ? Isolation::IsolatedAtScale : Isolation::NotIsolatedAtScale) << a;
    }
}

TEST(Foliation, SameLeafConnectsAlongFlows) {
    auto g = gallery_load("rigid_axis");
    Grid grid(cube(3, 1), {16, 16, 16});
    EXPECT_TRUE(same_leaf(*g.system, grid, vec({0.5, 0, 0.2}), vec({0, 0.5, 0.2})));
    EXPECT_TRUE(same_leaf(*g.system, grid, vec({0.5, 0, 0.2}), vec({0, -0.5, 0.7})));
    EXPECT_FALSE(same_leaf(*g.system, grid, vec({0.5, 0, 0.2}), vec({0.8, 0, 0.2})));
}

TEST(Foliation, T2OfRegularPointIsABandAroundItsLeaf) {
    auto g = gallery_load("rigid_axis");
    auto fol = label_leaves(g.system, cube(3, 1), {24, 24, 24});
    Vec z = vec({0.5, 0.1, 0.3});
    auto t2 = t2bar_approx(fol, z);
    const double rho0 = std::hypot(z[0], z[1]), h = fol.grid.step()[0];
    for (long c = 0; c < fol.grid.cells(); ++c) {
        Vec p = fol.grid.center(c);
        double d = std::abs(std::hypot(p[0], p[1]) - rho0);
        if (d > 5 * h) EXPECT_FALSE(t2.cells[c]) << p.transpose();
        if (d < 0.5 * h) EXPECT_TRUE(t2.cells[c]) << p.transpose();
    }
    EXPECT_TRUE(t2.idempotent);
}

TEST(Foliation, CellsCsv) {
    auto g = gallery_load("chaplygin_ideal");
    auto fol = label_leaves(g.system, cube(2, 1), {4, 4});
    std::ostringstream os;
    write_cells_csv(fol, nullptr, os);
    std::string s = os.str();
    EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 17);
    EXPECT_EQ(s.rfind("theta,p_theta,leaf", 0), 0u) << s.substr(0, 40);
}
