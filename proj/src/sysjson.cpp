#include "pstab/sysjson.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "pstab/errors.hpp"
#include "pstab/reduction.hpp"
#include "pstab/system_def.hpp"

namespace pstab {

namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw SchemaError(where + ": " + what);
}

const json& member(const json& j, const char* key, const std::string& where) {
    if (!j.is_object() || !j.contains(key)) fail(where, std::string("missing '") + key + "'");
    return j.at(key);
}

std::string str(const json& j, const std::string& where) {
    if (!j.is_string()) fail(where, "expected a string");
    return j.get<std::string>();
}

double num(const json& j, const std::string& where) {
    if (!j.is_number()) fail(where, "expected a number");
    return j.get<double>();
}

int integer(const json& j, const std::string& where) {
    if (!j.is_number_integer()) fail(where, "expected an integer");
    return j.get<int>();
}

std::vector<std::string> strings(const json& j, const std::string& where) {
    if (!j.is_array()) fail(where, "expected an array of strings");
    std::vector<std::string> out;
    for (std::size_t k = 0; k < j.size(); ++k) out.push_back(str(j[k], where + "[" + std::to_string(k) + "]"));
    return out;
}

Box box_from(const json& j, int dim, const std::string& where) {
    if (!j.is_array() || int(j.size()) != dim) fail(where, "expected " + std::to_string(dim) + " [lo, hi] pairs");
    Box b;
    b.lo.resize(dim);
    b.hi.resize(dim);
    for (int k = 0; k < dim; ++k) {
        const json& p = j[k];
        std::string w = where + "[" + std::to_string(k) + "]";
        if (!p.is_array() || p.size() != 2) fail(w, "expected [lo, hi]");
        b.lo[k] = num(p[0], w);
        b.hi[k] = num(p[1], w);
        if (!(b.lo[k] < b.hi[k])) fail(w, "lo must be below hi");
    }
    return b;
}

json box_to(const Box& b) {
    json out = json::array();
    for (int k = 0; k < b.dim(); ++k) out.push_back(json::array({b.lo[k], b.hi[k]}));
    return out;
}

std::vector<std::pair<std::string, std::string>> named_list(const json& j, const std::string& where) {
    std::vector<std::pair<std::string, std::string>> out;
    if (j.is_object()) {
        for (auto it = j.begin(); it != j.end(); ++it) out.emplace_back(it.key(), str(it.value(), where + "." + it.key()));
        return out;
    }
    if (!j.is_array()) fail(where, "expected an array of {name, expr} or an object");
    for (std::size_t k = 0; k < j.size(); ++k) {
        std::string w = where + "[" + std::to_string(k) + "]";
        out.emplace_back(str(member(j[k], "name", w), w + ".name"), str(member(j[k], "expr", w), w + ".expr"));
    }
    return out;
}

SystemDef def_from(const json& j) {
    if (!j.is_object()) fail("document", "expected an object");
    static const std::set<std::string> known = {"name", "dim", "variables", "parameters", "tensor", "hamiltonian",
                                                "casimirs", "conserved", "aux", "charts", "darboux_weinstein",
                                                "box", "periodic", "description"};
    for (const auto& [k, v] : j.items())
        if (!known.count(k)) fail(k, "unknown member");
    SystemDef s;
    s.name = j.contains("name") ? str(j["name"], "name") : "system";
    s.variables = strings(member(j, "variables", "document"), "variables");
    const int n = int(s.variables.size());
    if (j.contains("dim") && integer(j["dim"], "dim") != n) fail("dim", "does not match the number of variables");
    if (j.contains("parameters")) {
        const json& p = j["parameters"];
        if (!p.is_object()) fail("parameters", "expected an object of name: value");
        for (auto it = p.begin(); it != p.end(); ++it)
            s.parameters.emplace_back(it.key(), num(it.value(), "parameters." + it.key()));
    }
    const json& t = member(j, "tensor", "document");
    const json& entries = member(t, "entries", "tensor");
    if (!entries.is_array()) fail("tensor.entries", "expected an array");
    for (std::size_t k = 0; k < entries.size(); ++k) {
        std::string w = "tensor.entries[" + std::to_string(k) + "]";
        SystemDef::Entry e;
        e.i = integer(member(entries[k], "i", w), w + ".i");
        e.j = integer(member(entries[k], "j", w), w + ".j");
        e.expr = str(member(entries[k], "expr", w), w + ".expr");
        if (e.i < 0 || e.j <= e.i || e.j >= n) fail(w, "indices must satisfy 0 <= i < j < dim");
        s.entries.push_back(e);
    }
    const json& h = member(j, "hamiltonian", "document");
    if (h.is_string()) {
        s.hamiltonian = h.get<std::string>();
    } else {
        s.hamiltonian_name = str(member(h, "name", "hamiltonian"), "hamiltonian.name");
        s.hamiltonian = str(member(h, "expr", "hamiltonian"), "hamiltonian.expr");
    }
    if (j.contains("casimirs")) {
        const json& cs = j["casimirs"];
        if (!cs.is_array()) fail("casimirs", "expected an array");
        for (std::size_t k = 0; k < cs.size(); ++k) {
            std::string w = "casimirs[" + std::to_string(k) + "]";
            SystemDef::CasimirDef c;
            c.name = str(member(cs[k], "name", w), w + ".name");
            c.expr = str(member(cs[k], "expr", w), w + ".expr");
            std::string scope = cs[k].contains("scope") ? str(cs[k]["scope"], w + ".scope") : "global";
            if (scope != "global" && scope != "local") fail(w + ".scope", "must be 'global' or 'local'");
            c.local = scope == "local";
            if (cs[k].contains("domain")) {
                if (!c.local) fail(w + ".domain", "only local casimirs carry a domain");
                c.domain = box_from(cs[k]["domain"], n, w + ".domain");
            }
            s.casimirs.push_back(std::move(c));
        }
    }
    if (j.contains("conserved")) s.conserved = named_list(j["conserved"], "conserved");
    if (j.contains("aux")) s.aux = named_list(j["aux"], "aux");
    if (j.contains("charts")) {
        const json& cs = j["charts"];
        if (!cs.is_array()) fail("charts", "expected an array");
        for (std::size_t k = 0; k < cs.size(); ++k) {
            std::string w = "charts[" + std::to_string(k) + "]";
            SystemDef::ChartDef c;
            c.name = str(member(cs[k], "name", w), w + ".name");
            c.vars = strings(member(cs[k], "vars", w), w + ".vars");
            c.embedding = strings(member(cs[k], "embedding", w), w + ".embedding");
            c.generators = strings(member(cs[k], "generators", w), w + ".generators");
            if (cs[k].contains("subcasimirs")) c.subcasimirs = named_list(cs[k]["subcasimirs"], w + ".subcasimirs");
            if (cs[k].contains("box")) c.box = box_from(cs[k]["box"], int(c.vars.size()), w + ".box");
            s.charts.push_back(std::move(c));
        }
    }
    if (j.contains("darboux_weinstein") && !j["darboux_weinstein"].is_null()) {
        const json& d = j["darboux_weinstein"];
        s.darboux_weinstein = DarbouxWeinstein{integer(member(d, "pairs", "darboux_weinstein"), "darboux_weinstein.pairs"),
                                               integer(member(d, "transverse", "darboux_weinstein"),
                                                       "darboux_weinstein.transverse")};
    }
    if (j.contains("box")) s.box = box_from(j["box"], n, "box");
    if (j.contains("periodic")) {
        const json& p = j["periodic"];
        if (!p.is_object()) fail("periodic", "expected an object of variable: period");
        for (auto it = p.begin(); it != p.end(); ++it) {
            auto pos = std::find(s.variables.begin(), s.variables.end(), it.key());
            if (pos == s.variables.end()) fail("periodic." + it.key(), "not a variable");
            s.periods[int(pos - s.variables.begin())] = num(it.value(), "periodic." + it.key());
        }
    }
    return s;
}

json def_to(const SystemDef& s) {
    json j;
    j["name"] = s.name;
    j["dim"] = s.variables.size();
    j["variables"] = s.variables;
    json params = json::object();
    for (const auto& [k, v] : s.parameters) params[k] = v;
    j["parameters"] = params;
    json entries = json::array();
    for (const auto& e : s.entries) entries.push_back({{"i", e.i}, {"j", e.j}, {"expr", e.expr}});
    j["tensor"] = {{"entries", entries}};
    j["hamiltonian"] = {{"name", s.hamiltonian_name}, {"expr", s.hamiltonian}};
    json cs = json::array();
    for (const auto& c : s.casimirs) {
        json cj = {{"name", c.name}, {"expr", c.expr}, {"scope", c.local ? "local" : "global"}};
        if (c.domain) cj["domain"] = box_to(*c.domain);
        cs.push_back(cj);
    }
    j["casimirs"] = cs;
    json cons = json::array();
    for (const auto& [k, t] : s.conserved) cons.push_back({{"name", k}, {"expr", t}});
    j["conserved"] = cons;
    json aux = json::object();
    for (const auto& [k, t] : s.aux) aux[k] = t;
    j["aux"] = aux;
    json charts = json::array();
    for (const auto& c : s.charts) {
        json cj = {{"name", c.name}, {"vars", c.vars}, {"embedding", c.embedding}, {"generators", c.generators}};
        json sub = json::array();
        for (const auto& [k, t] : c.subcasimirs) sub.push_back({{"name", k}, {"expr", t}});
        cj["subcasimirs"] = sub;
        if (c.box) cj["box"] = box_to(*c.box);
        charts.push_back(cj);
    }
    j["charts"] = charts;
    if (s.darboux_weinstein)
        j["darboux_weinstein"] = {{"pairs", s.darboux_weinstein->pairs}, {"transverse", s.darboux_weinstein->transverse}};
    if (s.box) j["box"] = box_to(*s.box);
    if (!s.periods.empty()) {
        json p = json::object();
        for (const auto& [axis, period] : s.periods) p[s.variables[axis]] = period;
        j["periodic"] = p;
    }
    return j;
}

SystemPtr from_json(const json& j) {
    if (j.is_object() && j.contains("reduction")) {
        const json& r = j["reduction"];
        SystemPtr parent = from_json(member(r, "parent", "reduction"));
        return reduce_chart(parent, str(member(r, "chart", "reduction"), "reduction.chart"));
    }
    return build_system(def_from(j));
}

json to_json(const PoissonSystem& sys) {
    if (sys.reduced_parent) {
        json j;
        j["name"] = sys.name;
        j["reduction"] = {{"chart", sys.reduced_chart}, {"parent", to_json(*sys.reduced_parent)}};
        return j;
    }
    return def_to(describe_system(sys));
}

}  // namespace

SystemPtr load_system_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw SchemaError(std::string("invalid JSON: ") + e.what());
    }
    return from_json(j);
}

SystemPtr load_system_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw NotFoundError("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return load_system_json(ss.str());
}

std::string system_to_json(const PoissonSystem& sys, int indent) { return to_json(sys).dump(indent); }

}  // namespace pstab
