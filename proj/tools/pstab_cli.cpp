#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pstab/pstab.h"

namespace {

using json = nlohmann::ordered_json;

enum Exit { kOk = 0, kUsage = 1, kUnstable = 2, kInconsistent = 3 };

struct Failure {
    int code;
    std::string message;
};

struct CString {
    char* p = nullptr;
    ~CString() { pstab_string_free(p); }
    std::string str() const { return p ? std::string(p) : std::string(); }
};

struct System {
    pstab_system* p = nullptr;
    ~System() { pstab_system_free(p); }
};

void check(pstab_status s) {
    if (s == PSTAB_OK) return;
    std::string msg = std::string(pstab_status_name(s)) + ": " + pstab_last_error();
    throw Failure{s == PSTAB_ERR_INTERNAL ? kInconsistent : kUsage, msg};
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(item);
    return out;
}

double to_double(const std::string& s) {
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (s.empty() || *end != '\0') throw Failure{kUsage, "not a number: '" + s + "'"};
    return v;
}

std::vector<double> parse_point(const std::string& s) {
    std::vector<double> out;
    for (const auto& t : split(s, ',')) out.push_back(to_double(t));
    if (out.empty()) throw Failure{kUsage, "empty point"};
    return out;
}

void load(const std::string& path, System& sys) {
    if (path.rfind("gallery:", 0) == 0) {
        std::string rest = path.substr(8), params;
        auto q = rest.find('?');
        if (q != std::string::npos) {
            params = rest.substr(q + 1);
            rest = rest.substr(0, q);
        }
        check(pstab_gallery_load(rest.c_str(), params.empty() ? nullptr : params.c_str(), &sys.p));
        return;
    }
    check(pstab_system_load_file(path.c_str(), &sys.p));
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw Failure{kUsage, "cannot write '" + path + "'"};
    out << text;
    if (!text.empty() && text.back() != '\n') out << '\n';
}

/// Writes or prints the report and maps its status to an exit code.
int emit(const std::string& report, const std::string& out, const std::string& summary_key) {
    json r = json::parse(report);
    if (out.empty()) {
        std::cout << report << '\n';
    } else {
        write_file(out, report);
        std::cout << summary_key << ": ";
        const json* node = &r;
        for (const auto& part : split(summary_key, '.')) {
            if (!node->contains(part)) {
                node = nullptr;
                break;
            }
            node = &(*node)[part];
        }
        std::cout << (node ? (node->is_string() ? node->get<std::string>() : node->dump()) : "-") << '\n';
    }
    const std::string status = r.value("status", "ok");
    if (status == "inconsistent") {
        std::cerr << "inconsistency: the probe contradicts the certificate\n";
        return kInconsistent;
    }
    return status == "unstable" ? kUnstable : kOk;
}

std::string join(const std::vector<std::string>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
    return s;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stability certification for Poisson systems"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(pstab_version()));
    int threads = 0;
    std::uint64_t seed = 0;
    bool seed_set = false;
    app.add_option("--threads", threads, "Cap on worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
    app.add_option_function<std::uint64_t>("--seed", [&](const std::uint64_t& v) { seed = v; seed_set = true; },
                                           "Seed of the quasi-random sampling");

    std::string sys_path, point, out, chart;

    auto* analyze = app.add_subcommand("analyze", "Linearize at an equilibrium");
    bool dw = false;
    analyze->add_option("system", sys_path, "System definition JSON")->required();
    analyze->add_option("--point", point, "Comma separated coordinates")->required();
    analyze->add_flag("--dw", dw, "Include the S/P/Q blocks");
    analyze->add_option("--out", out, "Report file");

    auto* certify = app.add_subcommand("certify", "Energy-Casimir certificate");
    std::string conserved, F;
    double radius = 0.1;
    int samples = 4000;
    bool trusted = false, probe_too = false;
    certify->add_option("system", sys_path)->required();
    certify->add_option("--point", point)->required();
    certify->add_option("--conserved", conserved, "Comma separated conserved quantities");
    certify->add_option("--F", F, "Auxiliary function name or 'auto'");
    certify->add_option("--radius", radius, "Sampling radius for the F hypotheses")->check(CLI::PositiveNumber);
    certify->add_option("--samples", samples, "Sample count")->check(CLI::PositiveNumber);
    certify->add_flag("--trusted-F", trusted, "Treat the F hypothesis as proven");
    certify->add_flag("--probe", probe_too, "Cross-check with a simulation probe");
    certify->add_option("--out", out);

    auto* reduce = app.add_subcommand("reduce", "Restrict to a quasi-Poisson chart");
    reduce->add_option("system", sys_path)->required();
    reduce->add_option("--chart", chart)->required();
    std::string report_path;
    reduce->add_option("--out", out, "Reduced system JSON");
    reduce->add_option("--report", report_path, "Reduction report JSON");

    auto* icertify = app.add_subcommand("icertify", "I-stability through a chart");
    icertify->add_option("system", sys_path)->required();
    icertify->add_option("--chart", chart)->required();
    icertify->add_option("--point", point)->required();
    icertify->add_option("--out", out);

    auto* simulate = app.add_subcommand("simulate", "Integrate a trajectory");
    double t_end = 1.0, dt = 1e-3, adaptive = 0.0;
    std::string functions;
    simulate->add_option("system", sys_path)->required();
    simulate->add_option("--point", point)->required();
    simulate->add_option("--t", t_end, "End time")->required()->check(CLI::PositiveNumber);
    simulate->add_option("--dt", dt, "Step (initial step when adaptive)")->check(CLI::PositiveNumber);
    auto* adaptive_opt = simulate->add_option("--adaptive", adaptive, "RK45 tolerance")->check(CLI::PositiveNumber);
    simulate->add_option("--functions", functions, "Recorded functions");
    simulate->add_option("--out", out, "Trajectory CSV")->required();
    simulate->add_option("--report", report_path, "Drift report JSON");

    auto* probe = app.add_subcommand("probe", "Empirical stability probe");
    double horizon = 200.0;
    int nprobe = 16;
    double pradius = 0.05;
    probe->add_option("system", sys_path)->required();
    probe->add_option("--point", point)->required();
    probe->add_option("--radius", pradius)->check(CLI::PositiveNumber);
    probe->add_option("--n", nprobe)->check(CLI::PositiveNumber);
    probe->add_option("--horizon", horizon)->check(CLI::PositiveNumber);
    probe->add_option("--F", F, "Auxiliary function for the monotonicity check");
    probe->add_option("--out", out);

    auto* foliation = app.add_subcommand("foliation", "Grid foliation, T2 sets and level-set isolation");
    std::string box;
    int res = 32;
    bool t2 = false, isolate = false, separation = false;
    foliation->add_option("system", sys_path)->required();
    foliation->add_option("--box", box, "a:b,c:d,...");
    foliation->add_option("--res", res, "Cells per axis")->required()->check(CLI::PositiveNumber);
    foliation->add_flag("--t2", t2, "T2-bar approximation at --point");
    foliation->add_option("--point", point);
    foliation->add_flag("--isolate", isolate, "Level-set isolation at --point");
    foliation->add_option("--functions", functions, "Functions for --isolate");
    foliation->add_flag("--separation", separation, "Casimir separation check");
    foliation->add_option("--out", out, "Cells CSV");
    foliation->add_option("--report", report_path, "Report JSON (stdout when absent)");

    auto* gallery = app.add_subcommand("gallery", "Built-in examples");
    gallery->require_subcommand(1);
    auto* glist = gallery->add_subcommand("list", "List entries");
    auto* gexport = gallery->add_subcommand("export", "Write an entry as a system definition");
    auto* gexpected = gallery->add_subcommand("expected", "Pinned results of an entry");
    std::string gid, gparams;
    bool gcheck = false;
    gexport->add_option("id", gid)->required();
    gexport->add_option("--params", gparams, "k=v,...");
    gexport->add_option("--out", out);
    gexpected->add_option("id", gid)->required();
    gexpected->add_option("--params", gparams, "k=v,...");
    gexpected->add_flag("--check", gcheck, "Recompute every pinned result");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        check(pstab_set_threads(threads));
        auto with_seed = [&](json& o) {
            if (seed_set) o["seed"] = seed;
        };
        System sys;
        CString report, extra;

        if (*analyze) {
            load(sys_path, sys);
            auto z = parse_point(point);
            json o = {{"dw", dw}};
            with_seed(o);
            check(pstab_analyze(sys.p, z.data(), int(z.size()), o.dump().c_str(), &report.p));
            return emit(report.str(), out, "linearization.classification");
        }
        if (*certify) {
            load(sys_path, sys);
            auto z = parse_point(point);
            json o = {{"radius", radius}, {"samples", samples}, {"trusted_F", trusted}, {"probe", probe_too}};
            if (!conserved.empty()) o["conserved"] = split(conserved, ',');
            if (!F.empty()) o["F"] = F;
            with_seed(o);
            check(pstab_certify(sys.p, z.data(), int(z.size()), o.dump().c_str(), &report.p));
            return emit(report.str(), out, "certificate.verdict");
        }
        if (*reduce) {
            load(sys_path, sys);
            System red;
            check(pstab_reduce(sys.p, chart.c_str(), &red.p, &report.p));
            CString doc;
            check(pstab_system_to_json(red.p, &doc.p));
            if (out.empty()) std::cout << doc.str() << '\n';
            else write_file(out, doc.str());
            if (!report_path.empty()) write_file(report_path, report.str());
            else if (!out.empty()) std::cout << report.str() << '\n';
            return kOk;
        }
        if (*icertify) {
            load(sys_path, sys);
            auto z = parse_point(point);
            json o = json::object();
            with_seed(o);
            check(pstab_icertify(sys.p, chart.c_str(), z.data(), int(z.size()), o.dump().c_str(), &report.p));
            return emit(report.str(), out, "reduction.verdict");
        }
        if (*simulate) {
            load(sys_path, sys);
            auto z = parse_point(point);
            json o = {{"t", t_end}, {"dt", dt}};
            if (adaptive_opt->count()) o["adaptive"] = adaptive;
            if (!functions.empty()) o["functions"] = split(functions, ',');
            check(pstab_simulate(sys.p, z.data(), int(z.size()), o.dump().c_str(), &extra.p, &report.p));
            write_file(out, extra.str());
            if (!report_path.empty()) write_file(report_path, report.str());
            else std::cout << report.str() << '\n';
            return kOk;
        }
        if (*probe) {
            load(sys_path, sys);
            auto z = parse_point(point);
            json o = {{"radius", pradius}, {"n", nprobe}, {"horizon", horizon}};
            if (!F.empty()) o["F"] = F;
            with_seed(o);
            check(pstab_probe(sys.p, z.data(), int(z.size()), o.dump().c_str(), &report.p));
            return emit(report.str(), out, "probe.kind");
        }
        if (*foliation) {
            load(sys_path, sys);
            json o = {{"res", res}, {"t2", t2}, {"isolate", isolate}, {"separation", separation}};
            if (!box.empty()) {
                json b = json::array();
                for (const auto& part : split(box, ',')) {
                    auto ab = split(part, ':');
                    if (ab.size() != 2) throw Failure{kUsage, "box entries must look like a:b"};
                    b.push_back(json::array({to_double(ab[0]), to_double(ab[1])}));
                }
                o["box"] = b;
            }
            if (!point.empty()) o["point"] = parse_point(point);
            if (!functions.empty()) o["functions"] = split(functions, ',');
            o["cells"] = !out.empty();
            with_seed(o);
            check(pstab_foliation(sys.p, o.dump().c_str(), &report.p, out.empty() ? nullptr : &extra.p));
            if (!out.empty()) write_file(out, extra.str());
            return emit(report.str(), report_path, "foliation.isolation.verdict");
        }
        if (*glist) {
            check(pstab_gallery_list(&report.p));
            for (const auto& e : json::parse(report.str())) {
                std::vector<std::string> ps;
                for (auto it = e["parameters"].begin(); it != e["parameters"].end(); ++it)
                    ps.push_back(it.key() + "=" + it.value().dump());
                std::cout << e["id"].get<std::string>() << "\t" << join(ps) << "\t"
                          << e["description"].get<std::string>() << '\n';
            }
            return kOk;
        }
        if (*gexport) {
            check(pstab_gallery_load(gid.c_str(), gparams.empty() ? nullptr : gparams.c_str(), &sys.p));
            check(pstab_system_to_json(sys.p, &report.p));
            if (out.empty()) std::cout << report.str() << '\n';
            else write_file(out, report.str());
            return kOk;
        }
        if (*gexpected) {
            json o = {{"check", gcheck}};
            check(pstab_gallery_expected(gid.c_str(), gparams.empty() ? nullptr : gparams.c_str(), o.dump().c_str(),
                                         &report.p));
            std::cout << report.str() << '\n';
            if (gcheck && !json::parse(report.str()).value("all_pass", false)) return kInconsistent;
            return kOk;
        }
    } catch (const Failure& f) {
        std::cerr << "error: " << f.message << '\n';
        return f.code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInconsistent;
    }
    return kUsage;
}
