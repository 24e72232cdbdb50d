#include <gtest/gtest.h>

#include "pstab/errors.hpp"
#include "pstab/gallery.hpp"
#include "pstab/sysjson.hpp"

using namespace pstab;

class GalleryEntries : public ::testing::TestWithParam<std::string> {};

TEST_P(GalleryEntries, ExpectationsReproduce) {
    auto g = gallery_load(GetParam());
    ASSERT_FALSE(g.expected.empty());
    for (const auto& e : g.expected) {
        auto r = check_expectation(g, e);
        EXPECT_TRUE(r.pass) << e.kind << " " << e.value << " observed " << r.observed;
    }
}

TEST_P(GalleryEntries, JacobiHolds) {
    auto g = gallery_load(GetParam());
    EXPECT_LE(jacobi_residual_sampled(*g.system, g.system->sampling_box(), 200), 1e-10);
}

TEST_P(GalleryEntries, JsonRoundTrip) {
    auto g = gallery_load(GetParam());
    auto back = load_system_json(system_to_json(*g.system));
    EXPECT_EQ(system_to_json(*back), system_to_json(*g.system));
}

INSTANTIATE_TEST_SUITE_P(All, GalleryEntries, ::testing::ValuesIn(gallery_ids()),
                         [](const auto& info) { return info.param; });

TEST(Gallery, Overrides) {
    auto g = gallery_load("patrick_a", {{"a", 0.3}});
    bool found = false;
    for (auto& [k, v] : g.parameters)
        if (k == "a") found = v == 0.3;
    EXPECT_TRUE(found);
    EXPECT_THROW(gallery_load("patrick_a", {{"b", 1}}), Error);
    EXPECT_THROW(gallery_load("nope"), NotFoundError);
    EXPECT_THROW(gallery_load("wheels", {{"R", 0.4}}), Error);
}

TEST(Gallery, ParamList) {
    auto p = parse_param_list("a=1.5, b=-2");
    ASSERT_EQ(p.size(), 2u);
    EXPECT_EQ(p[1].first, "b");
    EXPECT_EQ(p[1].second, -2);
    EXPECT_TRUE(parse_param_list("").empty());
    EXPECT_THROW(parse_param_list("a"), Error);
    EXPECT_THROW(parse_param_list("a=x"), Error);
}

TEST(Gallery, SourcesLabelled) {
    int published = 0;
    for (auto& id : gallery_ids())
        for (auto& e : gallery_load(id).expected) published += e.source == Source::Published;
    EXPECT_GT(published, 10);
    EXPECT_STREQ(to_string(Source::Derived), "derived");
}
