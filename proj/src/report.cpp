#include "report.hpp"

#include <cmath>

namespace pstab::report {

namespace {

json number(double x) {
    if (std::isfinite(x)) return x;
    return x > 0 ? "inf" : (x < 0 ? "-inf" : "nan");
}

}  // namespace

json vec(const Vec& v) {
    json out = json::array();
    for (int i = 0; i < v.size(); ++i) out.push_back(number(v[i]));
    return out;
}

json mat(const Mat& M) {
    json out = json::array();
    for (int i = 0; i < M.rows(); ++i) out.push_back(vec(M.row(i).transpose()));
    return out;
}

json spectrum(const std::vector<cplx>& ev) {
    json out = json::array();
    for (const auto& c : ev) out.push_back(json::array({c.real(), c.imag()}));
    return out;
}

json dw(const DWBlocks& b) {
    json passings = json::array();
    for (const auto& p : b.passings)
        passings.push_back({{"mu", json::array({p.mu.real(), p.mu.imag()})},
                            {"label", to_string(p.label)},
                            {"residual", number(p.residual)}});
    return {{"S", mat(b.S)},
            {"P", mat(b.P)},
            {"Q", mat(b.Q)},
            {"passings", passings},
            {"p_defective", b.p_defective},
            {"linearly_unstable", b.linearly_unstable}};
}

json linearization(const LinearizationReport& r) {
    json clusters = json::array();
    for (const auto& c : r.clusters)
        clusters.push_back({{"value", json::array({c.value.real(), c.value.imag()})},
                            {"algebraic", c.algebraic},
                            {"geometric", c.geometric},
                            {"on_axis", c.on_axis}});
    json out = {{"L", mat(r.L)},
                {"spectrum", spectrum(r.eigenvalues)},
                {"multiplicities", clusters},
                {"diagonalizable", r.diagonalizable},
                {"converged", r.converged},
                {"classification", to_string(r.classification)}};
    if (r.dw) out["dw"] = dw(*r.dw);
    return out;
}

json fcondition(const FConditionReport& f) {
    return {{"F", f.F},
            {"samples", f.samples},
            {"skipped", f.skipped},
            {"radius", f.radius},
            {"g1_range", json::array({number(f.g1_min), number(f.g1_max)})},
            {"g2_range", json::array({number(f.g2_min), number(f.g2_max)})},
            {"violations_i", f.violations_i},
            {"violations_ii", f.violations_ii},
            {"hypothesis_i", f.hypothesis_i},
            {"hypothesis_ii", f.hypothesis_ii},
            {"strict", f.strict}};
}

json certificate(const Certificate& c) {
    json out = {{"verdict", to_string(c.verdict)},
                {"grade", to_string(c.grade)},
                {"functions", c.function_names},
                {"multipliers", vec(c.multipliers)},
                {"multiplier_dim", c.multiplier_dim},
                {"W", mat(c.W)},
                {"restricted_spectrum", vec(c.restricted_spectrum)},
                {"leaf_rank", c.leaf_rank}};
    out["epsilon"] = c.epsilon ? json(*c.epsilon) : json(nullptr);
    if (!c.F_text.empty()) out["F"] = c.F_text;
    if (c.fcondition) out["sampling"] = fcondition(*c.fcondition);
    out["notes"] = c.notes;
    return out;
}

json chart_check(const ChartCheck& c) {
    return {{"samples", c.samples},
            {"generator_max", number(c.generator_max)},
            {"embedding_min_sv", number(c.embedding_min_sv)},
            {"generator_min_sv", number(c.generator_min_sv)},
            {"ok", c.ok},
            {"problem", c.problem}};
}

json icertificate(const ICertificate& c) {
    json out = {{"verdict", to_string(c.verdict)},
                {"grade", to_string(c.grade)},
                {"quasi_poisson_residual", number(c.quasi_poisson)},
                {"ambient",
                 {{"functions", c.ambient.function_names},
                  {"success", c.ambient.success},
                  {"multipliers", vec(c.ambient.check.def.multipliers)},
                  {"restricted_spectrum", vec(c.ambient.check.def.restricted_spectrum)}}},
                {"preimage", vec(c.preimage)}};
    if (c.reduced) out["reduced_certificate"] = certificate(c.reduced_certificate);
    out["probe_escaped"] = c.probe_escaped ? json(*c.probe_escaped) : json(nullptr);
    out["notes"] = c.notes;
    return out;
}

json probe(const ProbeReport& p) {
    return {{"kind", to_string(p.kind)},
            {"radius", p.radius},
            {"samples", p.samples},
            {"horizon", p.horizon},
            {"max_excursion", number(p.max_excursion)},
            {"escaped", p.escaped},
            {"first_escape_time", number(p.first_escape_time)},
            {"monotone_checked", p.monotone_checked},
            {"monotone_violations", p.monotone_violations},
            {"max_violation", number(p.max_violation)},
            {"failed", p.failed}};
}

json drift(const std::vector<Drift>& d) {
    json out = json::array();
    for (const auto& x : d) out.push_back({{"name", x.name}, {"max_relative", number(x.max_relative)}});
    return out;
}

json isolation(const IsolationReport& r, const Grid& grid) {
    json res = json::array();
    for (int k : grid.res()) res.push_back(k);
    return {{"verdict", to_string(r.verdict)},
            {"res", res},
            {"candidates", r.candidates},
            {"marked", r.marked},
            {"component_size", r.component_size},
            {"component_diameter", r.component_diameter},
            {"other_components_in_ball", r.other_components_in_ball},
            {"leaves_ball", r.leaves_ball},
            {"ball_radius", r.ball_radius}};
}

json t2(const T2Report& r) {
    return {{"point", vec(r.z)},
            {"own_footprint_cells", r.own_footprint.size()},
            {"member_leaves", r.member_leaves.size()},
            {"cells", r.cell_count},
            {"idempotent_at_scale", r.idempotent},
            {"growth_cells", r.growth_cells},
            {"growth_distance", r.growth_distance},
            {"jitter", r.jitter}};
}

json separation(const SeparationReport& r) {
    json inc = json::array();
    for (const auto& c : r.inclusions)
        inc.push_back({{"point", vec(c.z)},
                       {"t2_cells", c.t2_cells},
                       {"level_cells", c.level_cells},
                       {"inclusion", c.inclusion},
                       {"equality", c.equality},
                       {"strict", c.strict}});
    return {{"pairs_tested", r.pairs_tested},
            {"pairs_same_leaf", r.pairs_same_leaf},
            {"pairs_distinct", r.pairs_distinct},
            {"separates_at_scale", r.separates},
            {"inclusions", inc},
            {"openness_checked", r.openness_checked}};
}

json expectation(const Expectation& e) {
    json out = {{"kind", e.kind}, {"point", vec(e.point)}, {"source", to_string(e.source)}};
    if (!e.value.empty()) out["value"] = e.value;
    if (!e.grade.empty()) out["grade"] = e.grade;
    if (!e.numbers.empty()) out["numbers"] = e.numbers;
    if (!e.F.empty()) out["F"] = e.F;
    if (!e.chart.empty()) out["chart"] = e.chart;
    if (!e.functions.empty()) out["functions"] = e.functions;
    if (e.res) out["res"] = e.res;
    if (!e.numbers.empty()) out["tol"] = e.tol;
    if (!e.note.empty()) out["note"] = e.note;
    return out;
}

json envelope(const std::string& command, const PoissonSystem& sys, std::uint64_t seed) {
    return {{"tool", "pstab"}, {"version", PSTAB_VERSION}, {"command", command}, {"system", sys.name}, {"seed", seed}};
}

}  // namespace pstab::report
