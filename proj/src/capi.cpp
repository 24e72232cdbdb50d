#include "pstab/pstab.h"

#include <chrono>
#include <cstring>
#include <set>
#include <sstream>

#include "pstab/certify.hpp"
#include "pstab/errors.hpp"
#include "pstab/foliation.hpp"
#include "pstab/gallery.hpp"
#include "pstab/reduction.hpp"
#include "pstab/simulate.hpp"
#include "pstab/spectral.hpp"
#include "pstab/sysjson.hpp"
#include "report.hpp"

struct pstab_system {
    pstab::SystemPtr sys;
};

namespace {

using namespace pstab;
using json = report::json;

thread_local std::string g_last_error;

class ArgumentError : public Error {
public:
    using Error::Error;
};

char* dup(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

template <class F>
pstab_status guarded(F&& body) {
    try {
        body();
        g_last_error.clear();
        return PSTAB_OK;
    } catch (const ArgumentError& e) {
        g_last_error = e.what();
        return PSTAB_ERR_INVALID_ARGUMENT;
    } catch (const ParseError& e) {
        g_last_error = e.what();
        return PSTAB_ERR_PARSE;
    } catch (const UnknownIdentifierError& e) {
        g_last_error = e.what();
        return PSTAB_ERR_UNKNOWN_IDENTIFIER;
    } catch (const DomainError& e) {
        g_last_error = e.what();
        return PSTAB_ERR_DOMAIN;
    } catch (const SchemaError& e) {
        g_last_error = e.what();
        return PSTAB_ERR_SCHEMA;
    } catch (const PreconditionError& e) {
        g_last_error = e.what();
        return PSTAB_ERR_PRECONDITION;
    } catch (const ConvergenceError& e) {
        g_last_error = e.what();
        return PSTAB_ERR_CONVERGENCE;
    } catch (const NotFoundError& e) {
        g_last_error = e.what();
        return PSTAB_ERR_NOT_FOUND;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return PSTAB_ERR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown failure";
        return PSTAB_ERR_INTERNAL;
    }
}

/// Options document with a whitelist of keys.
class Options {
public:
    Options(const char* text, std::set<std::string> allowed) {
        if (text && *text) {
            try {
                j_ = json::parse(text);
            } catch (const json::parse_error& e) {
                throw SchemaError(std::string("options are not valid JSON: ") + e.what());
            }
        }
        if (j_.is_null()) j_ = json::object();
        if (!j_.is_object()) throw SchemaError("options must be a JSON object");
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!allowed.count(it.key())) throw SchemaError("unknown option '" + it.key() + "'");
    }
    bool has(const char* k) const { return j_.contains(k) && !j_[k].is_null(); }
    const json& raw() const { return j_; }
    const json& at(const char* k) const { return j_.at(k); }

    double num(const char* k, double def) const {
        if (!has(k)) return def;
        if (!j_[k].is_number()) throw SchemaError(std::string("option '") + k + "' must be a number");
        return j_[k].get<double>();
    }
    int integer(const char* k, int def) const {
        if (!has(k)) return def;
        if (!j_[k].is_number_integer()) throw SchemaError(std::string("option '") + k + "' must be an integer");
        return j_[k].get<int>();
    }
    bool flag(const char* k, bool def = false) const {
        if (!has(k)) return def;
        if (!j_[k].is_boolean()) throw SchemaError(std::string("option '") + k + "' must be true or false");
        return j_[k].get<bool>();
    }
    std::string str(const char* k, const std::string& def = {}) const {
        if (!has(k)) return def;
        if (!j_[k].is_string()) throw SchemaError(std::string("option '") + k + "' must be a string");
        return j_[k].get<std::string>();
    }
    std::vector<std::string> strings(const char* k) const {
        std::vector<std::string> out;
        if (!has(k)) return out;
        if (!j_[k].is_array()) throw SchemaError(std::string("option '") + k + "' must be an array of strings");
        for (const auto& v : j_[k]) {
            if (!v.is_string()) throw SchemaError(std::string("option '") + k + "' must be an array of strings");
            out.push_back(v.get<std::string>());
        }
        return out;
    }
    std::uint64_t seed() const {
        if (!has("seed")) return kDefaultSeed;
        if (!j_["seed"].is_number_unsigned()) throw SchemaError("option 'seed' must be a non-negative integer");
        return j_["seed"].get<std::uint64_t>();
    }

private:
    json j_;
};

const PoissonSystem& need(const pstab_system* s) {
    if (!s || !s->sys) throw ArgumentError("system handle is null");
    return *s->sys;
}

Vec point(const PoissonSystem& sys, const double* z, int n) {
    if (!z) throw ArgumentError("point is null");
    if (n != sys.dim())
        throw ArgumentError("point has " + std::to_string(n) + " components, system has " + std::to_string(sys.dim()));
    Vec v(n);
    for (int i = 0; i < n; ++i) {
        if (!std::isfinite(z[i])) throw ArgumentError("point components must be finite");
        v[i] = z[i];
    }
    return v;
}

template <class T>
void set_out(T** out, T* value) {
    if (out) *out = value;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void finish(json& r, std::chrono::steady_clock::time_point t0, char** out) {
    r["wall_time_s"] = seconds_since(t0);
    if (!out) throw ArgumentError("report output pointer is null");
    *out = dup(r.dump(2));
}

EquilibriumPoint equilibrium(const PoissonSystem& sys, const Vec& z, double tol) {
    EquilibriumPoint ze = make_equilibrium(sys, z, tol);
    if (!ze.converged)
        throw PreconditionError("point is not an equilibrium: |X_H| = " + std::to_string(ze.residual) +
                                " exceeds " + std::to_string(tol));
    return ze;
}

CertifyOptions certify_options(const Options& o) {
    CertifyOptions c;
    if (o.has("conserved")) c.conserved = o.strings("conserved");
    if (o.has("F")) c.F = o.str("F");
    c.trusted_F = o.flag("trusted_F");
    c.radius = o.num("radius", c.radius);
    c.samples = o.integer("samples", c.samples);
    c.critical_tol = o.num("critical_tol", c.critical_tol);
    c.margin = o.num("margin", c.margin);
    c.seed = o.seed();
    if (!(c.radius > 0)) throw SchemaError("radius must be positive");
    if (c.samples < 1) throw SchemaError("samples must be positive");
    return c;
}

json certify_echo(const CertifyOptions& c) {
    json o = {{"F", c.F ? json(*c.F) : json(nullptr)},
              {"trusted_F", c.trusted_F},
              {"radius", c.radius},
              {"samples", c.samples}};
    o["conserved"] = c.conserved ? json(*c.conserved) : json(nullptr);
    return o;
}

bool claims_stability(Verdict v) {
    return v == Verdict::LyapunovStable || v == Verdict::WeaklyAsymptoticallyStable ||
           v == Verdict::AsymptoticallyStable;
}

ProbeOptions probe_options(const Options& o, const char* radius, const char* samples, const char* horizon) {
    ProbeOptions p;
    p.radius = o.num(radius, p.radius);
    p.samples = o.integer(samples, p.samples);
    p.horizon = o.num(horizon, p.horizon);
    p.dt = o.num("dt", p.dt);
    p.seed = o.seed();
    if (!(p.radius > 0) || p.samples < 1 || !(p.horizon > 0) || !(p.dt > 0))
        throw SchemaError("probe radius, samples, horizon and dt must be positive");
    return p;
}

std::vector<int> resolution(const Options& o, int n) {
    if (!o.has("res")) throw SchemaError("foliation needs 'res'");
    const json& r = o.at("res");
    std::vector<int> res;
    if (r.is_number_integer()) res.assign(n, r.get<int>());
    else if (r.is_array()) {
        for (const auto& v : r) {
            if (!v.is_number_integer()) throw SchemaError("res entries must be integers");
            res.push_back(v.get<int>());
        }
    } else {
        throw SchemaError("res must be an integer or an array of integers");
    }
    if (int(res.size()) != n) throw SchemaError("res needs one entry per variable");
    for (int k : res)
        if (k < 1 || k > 4096) throw SchemaError("res entries must lie in [1, 4096]");
    return res;
}

Box box_option(const Options& o, const PoissonSystem& sys) {
    if (!o.has("box")) return sys.sampling_box();
    const json& b = o.at("box");
    const int n = sys.dim();
    if (!b.is_array() || int(b.size()) != n) throw SchemaError("box needs one [lo, hi] pair per variable");
    Box box;
    box.lo.resize(n);
    box.hi.resize(n);
    for (int k = 0; k < n; ++k) {
        if (!b[k].is_array() || b[k].size() != 2 || !b[k][0].is_number() || !b[k][1].is_number())
            throw SchemaError("box entries must be [lo, hi]");
        box.lo[k] = b[k][0].get<double>();
        box.hi[k] = b[k][1].get<double>();
        if (!(box.lo[k] < box.hi[k])) throw SchemaError("box entries need lo < hi");
    }
    return box;
}

Vec vec_option(const Options& o, const char* k, int n) {
    const json& a = o.at(k);
    if (!a.is_array() || int(a.size()) != n) throw SchemaError(std::string("option '") + k + "' needs dim numbers");
    Vec v(n);
    for (int i = 0; i < n; ++i) {
        if (!a[i].is_number()) throw SchemaError(std::string("option '") + k + "' needs numbers");
        v[i] = a[i].get<double>();
    }
    return v;
}

std::vector<Expression> named_functions(const PoissonSystem& sys, const std::vector<std::string>& names) {
    std::vector<Expression> out;
    for (const auto& n : names) {
        const Expression* e = sys.find_function(n);
        if (!e) throw NotFoundError("unknown function '" + n + "'");
        out.push_back(*e);
    }
    return out;
}

}  // namespace

extern "C" {

const char* pstab_version(void) { return PSTAB_VERSION; }

const char* pstab_status_name(pstab_status s) {
    switch (s) {
        case PSTAB_OK: return "ok";
        case PSTAB_ERR_INVALID_ARGUMENT: return "invalid-argument";
        case PSTAB_ERR_PARSE: return "parse-error";
        case PSTAB_ERR_UNKNOWN_IDENTIFIER: return "unknown-identifier";
        case PSTAB_ERR_DOMAIN: return "domain-error";
        case PSTAB_ERR_SCHEMA: return "schema-error";
        case PSTAB_ERR_PRECONDITION: return "precondition-failed";
        case PSTAB_ERR_CONVERGENCE: return "no-convergence";
        case PSTAB_ERR_NOT_FOUND: return "not-found";
        case PSTAB_ERR_INTERNAL: return "internal-error";
    }
    return "unknown-status";
}

const char* pstab_last_error(void) { return g_last_error.c_str(); }

void pstab_string_free(char* s) { std::free(s); }

pstab_status pstab_set_threads(int k) {
    return guarded([&] {
        if (k < 0) throw ArgumentError("thread count must be non-negative");
        set_thread_limit(k);
    });
}

pstab_status pstab_system_load_json(const char* text, pstab_system** out) {
    return guarded([&] {
        if (!text || !out) throw ArgumentError("null argument");
        *out = new pstab_system{load_system_json(text)};
    });
}

pstab_status pstab_system_load_file(const char* path, pstab_system** out) {
    return guarded([&] {
        if (!path || !out) throw ArgumentError("null argument");
        *out = new pstab_system{load_system_file(path)};
    });
}

void pstab_system_free(pstab_system* sys) { delete sys; }

int pstab_system_dim(const pstab_system* sys) { return sys && sys->sys ? sys->sys->dim() : -1; }

pstab_status pstab_system_to_json(const pstab_system* s, char** out) {
    return guarded([&] {
        if (!out) throw ArgumentError("null argument");
        *out = dup(system_to_json(need(s)));
    });
}

pstab_status pstab_gallery_list(char** out) {
    return guarded([&] {
        if (!out) throw ArgumentError("null argument");
        json list = json::array();
        for (const auto& id : gallery_ids()) {
            GalleryEntry g = gallery_load(id);
            json params = json::object();
            for (const auto& [k, v] : g.parameters) params[k] = v;
            list.push_back({{"id", id}, {"description", g.description}, {"parameters", params},
                            {"expectations", g.expected.size()}});
        }
        *out = dup(list.dump(2));
    });
}

pstab_status pstab_gallery_load(const char* id, const char* params, pstab_system** out) {
    return guarded([&] {
        if (!id || !out) throw ArgumentError("null argument");
        *out = new pstab_system{gallery_load(id, params ? parse_param_list(params) : decltype(parse_param_list("")){}).system};
    });
}

pstab_status pstab_gallery_expected(const char* id, const char* params, const char* options_json, char** out) {
    return guarded([&] {
        if (!id || !out) throw ArgumentError("null argument");
        Options o(options_json, {"check"});
        GalleryEntry g = gallery_load(id, params ? parse_param_list(params) : decltype(parse_param_list("")){});
        const bool check = o.flag("check");
        json rows = json::array();
        bool all = true;
        for (const auto& e : g.expected) {
            json row = report::expectation(e);
            if (check) {
                ExpectationResult r = check_expectation(g, e);
                row["observed"] = r.observed;
                row["pass"] = r.pass;
                all = all && r.pass;
            }
            rows.push_back(row);
        }
        json doc = {{"id", id}, {"expected", rows}};
        if (check) doc["all_pass"] = all;
        *out = dup(doc.dump(2));
    });
}

pstab_status pstab_analyze(const pstab_system* s, const double* z, int n, const char* options_json, char** out) {
    return guarded([&] {
        auto t0 = std::chrono::steady_clock::now();
        const PoissonSystem& sys = need(s);
        Options o(options_json, {"dw", "equilibrium_tol", "seed"});
        Vec zv = point(sys, z, n);
        const double tol = o.num("equilibrium_tol", 1e-10);
        EquilibriumPoint ze = equilibrium(sys, zv, tol);
        LinearizationReport lin = linearize(sys, ze);
        if (o.flag("dw") && !lin.dw) {
            DWBlocks b = dw_blocks(sys, zv);  // surfaces the reason the blocks are unavailable
            classify_passing(b);
            lin.dw = b;
        }
        json r = report::envelope("analyze", sys, o.seed());
        r["input"] = {{"point", report::vec(zv)},
                      {"options", {{"dw", o.flag("dw")}}},
                      {"tolerances",
                       {{"equilibrium", tol}, {"axis", SpectralTolerances{}.axis}, {"rank", SpectralTolerances{}.rank}}}};
        r["equilibrium"] = {{"residual", ze.residual}, {"leaf_rank", ze.leaf_rank}};
        r["linearization"] = report::linearization(lin);
        if (!o.flag("dw")) r["linearization"].erase("dw");
        r["status"] = lin.classification == LinearClass::SpectrallyUnstable ? "unstable" : "ok";
        finish(r, t0, out);
    });
}

pstab_status pstab_certify(const pstab_system* s, const double* z, int n, const char* options_json, char** out) {
    return guarded([&] {
        auto t0 = std::chrono::steady_clock::now();
        const PoissonSystem& sys = need(s);
        Options o(options_json, {"conserved", "F", "trusted_F", "radius", "samples", "critical_tol", "margin", "seed",
                                 "probe", "probe_radius", "probe_samples", "probe_horizon", "dt", "equilibrium_tol"});
        Vec zv = point(sys, z, n);
        CertifyOptions c = certify_options(o);
        const double tol = o.num("equilibrium_tol", 1e-10);
        EquilibriumPoint ze = equilibrium(sys, zv, tol);
        Certificate cert = certify(sys, ze, c);
        json r = report::envelope("certify", sys, c.seed);
        r["input"] = {{"point", report::vec(zv)},
                      {"options", certify_echo(c)},
                      {"tolerances",
                       {{"equilibrium", tol}, {"critical", c.critical_tol}, {"margin", c.margin}, {"slack", c.slack}}}};
        r["linearization"] = report::linearization(cert.linearization);
        r["certificate"] = report::certificate(cert);
        std::string status = cert.verdict == Verdict::SpectrallyUnstable ? "unstable" : "ok";
        if (o.flag("probe")) {
            ProbeOptions p = probe_options(o, "probe_radius", "probe_samples", "probe_horizon");
            ProbeReport pr = stability_probe(sys, zv, cert.lyapunov ? &*cert.lyapunov : nullptr, p);
            r["probe"] = report::probe(pr);
            if (claims_stability(cert.verdict) && pr.escaped > 0) status = "inconsistent";
        }
        r["status"] = status;
        finish(r, t0, out);
    });
}

pstab_status pstab_reduce(const pstab_system* s, const char* chart, pstab_system** reduced_out, char** out) {
    return guarded([&] {
        auto t0 = std::chrono::steady_clock::now();
        const PoissonSystem& sys = need(s);
        if (!chart) throw ArgumentError("chart name is null");
        const SubmanifoldChart* ch = sys.find_chart(chart);
        if (!ch) throw NotFoundError(std::string("unknown chart '") + chart + "'");
        ChartCheck cc = validate_chart(sys, *ch);
        if (!cc.ok) throw PreconditionError("chart '" + std::string(chart) + "' is invalid: " + cc.problem);
        const double qp = quasi_poisson_residual(sys, *ch);
        SystemPtr red = reduce_chart(s->sys, *ch);
        json r = report::envelope("reduce", sys, kDefaultSeed);
        r["input"] = {{"chart", chart}};
        r["reduction"] = {{"chart_check", report::chart_check(cc)},
                          {"quasi_poisson_residual", qp},
                          {"quasi_poisson", qp <= kQuasiPoissonTol},
                          {"reduced_variables", red->variables},
                          {"jacobi_residual", jacobi_residual_sampled(*red, red->sampling_box())}};
        r["status"] = "ok";
        if (reduced_out) *reduced_out = new pstab_system{red};
        if (out) finish(r, t0, out);
    });
}

pstab_status pstab_icertify(const pstab_system* s, const char* chart, const double* z, int n, const char* options_json,
                            char** out) {
    return guarded([&] {
        auto t0 = std::chrono::steady_clock::now();
        const PoissonSystem& sys = need(s);
        if (!chart) throw ArgumentError("chart name is null");
        Options o(options_json, {"conserved", "F", "trusted_F", "radius", "samples", "critical_tol", "margin", "seed",
                                 "probe", "probe_radius", "probe_samples", "probe_horizon"});
        Vec zv = point(sys, z, n);
        ICertifyOptions io;
        io.certify = certify_options(o);
        io.probe = o.flag("probe", true);
        io.probe_radius = o.num("probe_radius", io.probe_radius);
        io.probe_samples = o.integer("probe_samples", io.probe_samples);
        io.probe_horizon = o.num("probe_horizon", io.probe_horizon);
        ICertificate ic = i_certify(s->sys, chart, zv, io);
        json r = report::envelope("icertify", sys, io.certify.seed);
        r["input"] = {{"point", report::vec(zv)},
                      {"chart", chart},
                      {"options", certify_echo(io.certify)},
                      {"probe", {{"enabled", io.probe}, {"radius", io.probe_radius}, {"samples", io.probe_samples},
                                 {"horizon", io.probe_horizon}}}};
        r["reduction"] = report::icertificate(ic);
        r["status"] = "ok";
        finish(r, t0, out);
    });
}

pstab_status pstab_simulate(const pstab_system* s, const double* z, int n, const char* options_json, char** csv_out,
                            char** out) {
    return guarded([&] {
        auto t0 = std::chrono::steady_clock::now();
        const PoissonSystem& sys = need(s);
        Options o(options_json, {"t", "dt", "adaptive", "functions", "record_every", "seed"});
        Vec zv = point(sys, z, n);
        IntegrateOptions io;
        io.t_end = o.num("t", io.t_end);
        io.dt = o.num("dt", io.dt);
        if (o.has("adaptive")) io.adaptive_tol = o.num("adaptive", 1e-9);
        io.functions = o.strings("functions");
        io.record_every = o.integer("record_every", 1);
        Trajectory tr = integrate(sys, zv, io);
        if (csv_out) {
            std::ostringstream os;
            write_csv(tr, os);
            *csv_out = dup(os.str());
        }
        json r = report::envelope("simulate", sys, o.seed());
        r["input"] = {{"point", report::vec(zv)},
                      {"options", {{"t", io.t_end}, {"dt", io.dt},
                                   {"adaptive", io.adaptive_tol ? json(*io.adaptive_tol) : json(nullptr)}}}};
        r["simulation"] = {{"steps_recorded", tr.t.size()}, {"final_point", report::vec(tr.z.back())},
                           {"drift", report::drift(drift_report(tr))}};
        r["status"] = "ok";
        if (out) finish(r, t0, out);
    });
}

pstab_status pstab_probe(const pstab_system* s, const double* z, int n, const char* options_json, char** out) {
    return guarded([&] {
        auto t0 = std::chrono::steady_clock::now();
        const PoissonSystem& sys = need(s);
        Options o(options_json, {"radius", "n", "horizon", "dt", "seed", "F", "conserved", "certify"});
        Vec zv = point(sys, z, n);
        ProbeOptions p = probe_options(o, "radius", "n", "horizon");
        json r = report::envelope("probe", sys, p.seed);
        r["input"] = {{"point", report::vec(zv)},
                      {"options", {{"radius", p.radius}, {"samples", p.samples}, {"horizon", p.horizon}, {"dt", p.dt},
                                   {"escape_factor", p.escape_factor}}}};
        std::optional<Certificate> cert;
        if (o.flag("certify", true) && make_equilibrium(sys, zv).converged) {
            CertifyOptions c;
            if (o.has("F")) c.F = o.str("F");
            if (o.has("conserved")) c.conserved = o.strings("conserved");
            c.seed = p.seed;
            cert = certify(sys, make_equilibrium(sys, zv), c);
            r["certificate"] = report::certificate(*cert);
        }
        ProbeReport pr = stability_probe(sys, zv, cert && cert->lyapunov ? &*cert->lyapunov : nullptr, p);
        r["probe"] = report::probe(pr);
        std::string status = "ok";
        if (cert && claims_stability(cert->verdict) && pr.escaped > 0) status = "inconsistent";
        else if (cert && cert->verdict == Verdict::SpectrallyUnstable) status = "unstable";
        r["status"] = status;
        finish(r, t0, out);
    });
}

pstab_status pstab_foliation(const pstab_system* s, const char* options_json, char** out, char** cells_out) {
    return guarded([&] {
        auto t0 = std::chrono::steady_clock::now();
        const PoissonSystem& sys = need(s);
        Options o(options_json, {"box", "res", "point", "t2", "isolate", "functions", "separation", "pairs", "jitter",
                                 "seed", "cells"});
        const int n = sys.dim();
        Box box = box_option(o, sys);
        std::vector<int> res = resolution(o, n);
        const bool t2 = o.flag("t2"), isolate = o.flag("isolate"), sep = o.flag("separation");
        const bool cells = o.flag("cells");
        const int jitter = o.integer("jitter", 3);
        std::optional<Vec> zp;
        if (o.has("point")) zp = vec_option(o, "point", n);
        if ((t2 || isolate) && !zp) throw SchemaError("--t2 and --isolate need a point");
        json r = report::envelope("foliation", sys, o.seed());
        json in = {{"box", json::array()}, {"res", res}, {"t2", t2}, {"isolate", isolate}, {"separation", sep}};
        for (int k = 0; k < n; ++k) in["box"].push_back(json::array({box.lo[k], box.hi[k]}));
        if (zp) in["point"] = report::vec(*zp);
        r["input"] = in;
        json fol_json = json::object();
        std::string status = "ok";
        Grid grid(box, res, sys.periods);
        if (isolate) {
            std::vector<std::string> names = o.strings("functions");
            if (names.empty()) {
                names.push_back(sys.hamiltonian.name);
                for (const auto& c : sys.casimirs) names.push_back(c.name);
            }
            IsolationOptions io;
            io.seed = o.seed();
            IsolationReport ir = level_set_isolation(sys, *zp, named_functions(sys, names), grid, io);
            fol_json["isolation"] = report::isolation(ir, grid);
            fol_json["isolation"]["functions"] = names;
            if (ir.verdict == Isolation::NotIsolatedAtScale) status = "unstable";
        }
        if (t2 || sep || cells) {
            GridFoliation fol = label_leaves(s->sys, box, res);
            fol_json["leaves"] = fol.leaves();
            std::optional<T2Report> t2r;
            if (t2) {
                t2r = t2bar_approx(fol, *zp, jitter);
                fol_json["t2"] = report::t2(*t2r);
            }
            if (sep) {
                SeparationOptions so;
                so.pairs = o.integer("pairs", so.pairs);
                so.jitter = jitter;
                so.seed = o.seed();
                std::vector<Expression> cas;
                for (const auto& c : sys.casimirs) cas.push_back(c.expr);
                std::vector<Vec> pts;
                if (zp) pts.push_back(*zp);
                fol_json["separation"] = report::separation(separation_check(fol, cas, pts, so));
            }
            if (cells && cells_out) {
                std::ostringstream os;
                write_cells_csv(fol, t2r ? &*t2r : nullptr, os);
                *cells_out = dup(os.str());
            }
        }
        r["foliation"] = fol_json;
        r["status"] = status;
        finish(r, t0, out);
    });
}

}  // extern "C"
