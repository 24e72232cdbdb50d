#include <gtest/gtest.h>

#include <json.hpp>
#include <algorithm>
#include <string>

#include "pstab/pstab.h"

using nlohmann::json;

namespace {

struct Str {
    char* p = nullptr;
    ~Str() { pstab_string_free(p); }
    json parse() const { return json::parse(p); }
};

struct Sys {
    pstab_system* p = nullptr;
    ~Sys() { pstab_system_free(p); }
};

}  // namespace

TEST(CApi, VersionAndNames) {
    EXPECT_STRNE(pstab_version(), "");
    EXPECT_STREQ(pstab_status_name(PSTAB_OK), "ok");
    EXPECT_STRNE(pstab_status_name(PSTAB_ERR_PARSE), pstab_status_name(PSTAB_ERR_SCHEMA));
}

TEST(CApi, GalleryListAndLoad) {
    Str list;
    ASSERT_EQ(pstab_gallery_list(&list.p), PSTAB_OK);
    auto j = list.parse();
    EXPECT_GE(j.size(), 12u);
    Sys s;
    ASSERT_EQ(pstab_gallery_load("toda2", nullptr, &s.p), PSTAB_OK);
    EXPECT_EQ(pstab_system_dim(s.p), 2);
    Sys bad;
    EXPECT_EQ(pstab_gallery_load("nope", nullptr, &bad.p), PSTAB_ERR_NOT_FOUND);
    EXPECT_NE(std::string(pstab_last_error()).find("nope"), std::string::npos);
    EXPECT_EQ(bad.p, nullptr);
}

TEST(CApi, ErrorCodes) {
    Sys s;
    EXPECT_EQ(pstab_system_load_json("{", &s.p), PSTAB_ERR_SCHEMA);
    const char* bad_expr =
        R"({"name":"a","variables":["q","p"],"tensor":{"entries":[{"i":0,"j":1,"expr":"1"}]},"hamiltonian":"q +* p"})";
    EXPECT_EQ(pstab_system_load_json(bad_expr, &s.p), PSTAB_ERR_PARSE);
    const char* unknown =
        R"({"name":"a","variables":["q","p"],"tensor":{"entries":[{"i":0,"j":1,"expr":"1"}]},"hamiltonian":"w"})";
    EXPECT_EQ(pstab_system_load_json(unknown, &s.p), PSTAB_ERR_UNKNOWN_IDENTIFIER);
    EXPECT_EQ(pstab_system_load_json(nullptr, &s.p), PSTAB_ERR_INVALID_ARGUMENT);
    EXPECT_EQ(pstab_system_load_file("/nonexistent.json", &s.p), PSTAB_ERR_NOT_FOUND);

    ASSERT_EQ(pstab_gallery_load("toda2", nullptr, &s.p), PSTAB_OK);
    double z[2] = {1, 1};
    Str r;
    EXPECT_EQ(pstab_analyze(s.p, z, 2, nullptr, &r.p), PSTAB_ERR_PRECONDITION);
    EXPECT_EQ(pstab_analyze(s.p, z, 3, nullptr, &r.p), PSTAB_ERR_INVALID_ARGUMENT);
    double ok[2] = {0, 1};
    EXPECT_EQ(pstab_analyze(s.p, ok, 2, R"({"bogus": 1})", &r.p), PSTAB_ERR_SCHEMA);
    EXPECT_EQ(pstab_certify(s.p, ok, 2, R"({"F": "nope"})", &r.p), PSTAB_ERR_NOT_FOUND);
    EXPECT_STRNE(pstab_last_error(), "");
    EXPECT_EQ(pstab_analyze(s.p, ok, 2, nullptr, &r.p), PSTAB_OK);
    EXPECT_STREQ(pstab_last_error(), "");
}

TEST(CApi, CertifyToda) {
    Sys s;
    ASSERT_EQ(pstab_gallery_load("toda2", nullptr, &s.p), PSTAB_OK);
    double z[2] = {0, 1};
    Str r;
    ASSERT_EQ(pstab_certify(s.p, z, 2, R"({"F": "F", "probe": true, "probe_samples": 8, "probe_horizon": 50})", &r.p),
              PSTAB_OK);
    auto j = r.parse();
    EXPECT_EQ(j["certificate"]["verdict"], "weakly-asymptotically-stable");
    EXPECT_EQ(j["status"], "ok");
    EXPECT_EQ(j["tool"], "pstab");
    EXPECT_TRUE(j.contains("wall_time_s"));
    EXPECT_NE(j["probe"]["kind"], "escape");

    double u[2] = {0, -1};
    Str r2;
    ASSERT_EQ(pstab_certify(s.p, u, 2, nullptr, &r2.p), PSTAB_OK);
    auto k = r2.parse();
    EXPECT_EQ(k["certificate"]["verdict"], "spectrally-unstable");
    EXPECT_EQ(k["status"], "unstable");
}

TEST(CApi, JsonRoundTripGivesSameCertificate) {
    Sys g;
    ASSERT_EQ(pstab_gallery_load("rigid_axis", nullptr, &g.p), PSTAB_OK);
    Str text;
    ASSERT_EQ(pstab_system_to_json(g.p, &text.p), PSTAB_OK);
    Sys back;
    ASSERT_EQ(pstab_system_load_json(text.p, &back.p), PSTAB_OK);
    double z[3] = {0, 0, 1};
    Str a, b;
    ASSERT_EQ(pstab_certify(g.p, z, 3, nullptr, &a.p), PSTAB_OK);
    ASSERT_EQ(pstab_certify(back.p, z, 3, nullptr, &b.p), PSTAB_OK);
    auto ja = a.parse(), jb = b.parse();
    EXPECT_EQ(ja["certificate"], jb["certificate"]);
}

TEST(CApi, ReduceAndICertify) {
    Sys s;
    ASSERT_EQ(pstab_gallery_load("chaplygin3", nullptr, &s.p), PSTAB_OK);
    Sys red;
    Str rep;
    ASSERT_EQ(pstab_reduce(s.p, "S", &red.p, &rep.p), PSTAB_OK);
    EXPECT_EQ(pstab_system_dim(red.p), 2);
    EXPECT_EQ(rep.parse()["reduction"]["quasi_poisson"], true);
    Sys none;
    Str rep2;
    EXPECT_EQ(pstab_reduce(s.p, "T", &none.p, &rep2.p), PSTAB_ERR_NOT_FOUND);
    double z[3] = {0, 0, 0};
    Str ic;
    ASSERT_EQ(pstab_icertify(s.p, "S", z, 3, nullptr, &ic.p), PSTAB_OK);
    EXPECT_EQ(ic.parse()["reduction"]["verdict"], "I-unstable");
}

TEST(CApi, SimulateCsv) {
    Sys s;
    ASSERT_EQ(pstab_gallery_load("wheels", nullptr, &s.p), PSTAB_OK);
    double z[3] = {0.3, 0.2, 0};
    Str csv, rep;
    ASSERT_EQ(pstab_simulate(s.p, z, 3, R"({"t": 1, "dt": 0.01})", &csv.p, &rep.p), PSTAB_OK);
    std::string c = csv.p;
    EXPECT_EQ(c.rfind("t,theta,phi,p", 0), 0u);
    auto j = rep.parse();
    for (auto& d : j["simulation"]["drift"]) EXPECT_LE(d["max_relative"].get<double>(), 1e-9);
}

TEST(CApi, FoliationIsolation) {
    Sys s;
    ASSERT_EQ(pstab_gallery_load("patrick_a", "a=0.5", &s.p), PSTAB_OK);
    Str rep, cells;
    ASSERT_EQ(pstab_foliation(s.p, R"({"res": 24, "isolate": true, "functions": ["h","A"], "point": [0,0,0]})",
                              &rep.p, &cells.p),
              PSTAB_OK);
    auto j = rep.parse();
    EXPECT_EQ(j["foliation"]["isolation"]["verdict"], "isolated-at-scale");
    EXPECT_EQ(j["status"], "ok");
    EXPECT_EQ(cells.p, nullptr);

    Str rep2, cells2;
    ASSERT_EQ(pstab_foliation(s.p, R"({"res": 4, "cells": true})", &rep2.p, &cells2.p), PSTAB_OK);
    ASSERT_NE(cells2.p, nullptr);
    std::string c = cells2.p;
    EXPECT_EQ(std::count(c.begin(), c.end(), '\n'), 65);
}

TEST(CApi, GalleryExpectedCheck) {
    Str out;
    ASSERT_EQ(pstab_gallery_expected("toda2", nullptr, R"({"check": true})", &out.p), PSTAB_OK);
    auto j = out.parse();
    EXPECT_EQ(j["all_pass"], true);
    Str none;
    EXPECT_EQ(pstab_gallery_expected("wheels", "R=0.1", nullptr, &none.p), PSTAB_ERR_SCHEMA);
}

TEST(CApi, Threads) {
    EXPECT_EQ(pstab_set_threads(1), PSTAB_OK);
    EXPECT_EQ(pstab_set_threads(-1), PSTAB_ERR_INVALID_ARGUMENT);
    EXPECT_EQ(pstab_set_threads(0), PSTAB_OK);
}
