#include <gtest/gtest.h>

#include "pstab/errors.hpp"
#include "pstab/gallery.hpp"
#include "pstab/reduction.hpp"
#include "pstab/sysjson.hpp"

using namespace pstab;

namespace {
const char* kOsc = R"J({
  "name": "osc",
  "dim": 2,
  "variables": ["q", "p"],
  "parameters": {"w": 2.0},
  "tensor": {"entries": [{"i": 0, "j": 1, "expr": "1"}]},
  "hamiltonian": "0.5*(p^2 + w^2*q^2)",
  "aux": {"F": "q"}
})J";
}

TEST(SysJson, LoadsMinimalDocument) {
    auto sys = load_system_json(kOsc);
    EXPECT_EQ(sys->dim(), 2);
    EXPECT_EQ(sys->param_values[0], 2.0);
    Vec X = hamiltonian_vf(*sys, Vec{{1.0, 0.0}});
    EXPECT_DOUBLE_EQ(X[1], -4.0);
    EXPECT_NE(sys->find_function("F"), nullptr);
}

TEST(SysJson, SchemaErrorsCarryPath) {
    auto expect_schema = [](const std::string& doc, const std::string& fragment) {
        try {
            load_system_json(doc);
            ADD_FAILURE() << "accepted: " << doc;
        } catch (const SchemaError& e) {
            EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
        }
    };
    expect_schema("[1]", "");
    expect_schema(R"({"name":"a","variables":["q","p"],"tensor":{"entries":[{"i":0,"j":1}]},"hamiltonian":"q"})",
                  "tensor.entries[0]");
    expect_schema(R"({"name":"a","dim":3,"variables":["q","p"],"tensor":{"entries":[]},"hamiltonian":"q"})", "dim");
    expect_schema(R"({"name":"a","variables":["q","p"],"tensor":{"entries":[]},"hamiltonian":"q","bogus":1})",
                  "bogus");
    EXPECT_THROW(load_system_json("{not json"), SchemaError);
}

TEST(SysJson, ExpressionErrorsSurface) {
    std::string doc = R"({"name":"a","variables":["q","p"],"tensor":{"entries":[{"i":0,"j":1,"expr":"1"}]},"hamiltonian":"q +* p"})";
    EXPECT_THROW(load_system_json(doc), ParseError);
}

TEST(SysJson, ReducedSystemRoundTrip) {
    auto g = gallery_load("chaplygin3");
    auto red = reduce_chart(g.system, "S");
    std::string text = system_to_json(*red);
    auto back = load_system_json(text);
    ASSERT_TRUE(back->reduced_parent);
    EXPECT_EQ(back->reduced_chart, "S");
    Vec u{{0.3, -0.2}};
    EXPECT_LE((tensor_at(*back, u) - tensor_at(*red, u)).norm(), 1e-15);
}

TEST(SysJson, MissingFile) {
    EXPECT_THROW(load_system_file("/nonexistent/system.json"), Error);
}
