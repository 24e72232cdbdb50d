#include "pstab/system_def.hpp"

#include "pstab/errors.hpp"
#include "pstab/reduction.hpp"

namespace pstab {

SystemPtr build_system(const SystemDef& def) {
    auto sys = std::make_shared<PoissonSystem>();
    sys->name = def.name;
    sys->variables = def.variables;
    for (const auto& [k, v] : def.parameters) {
        sys->param_names.push_back(k);
        sys->param_values.push_back(v);
    }
    const int n = sys->dim();
    std::vector<TensorEntry> entries;
    for (const auto& e : def.entries) {
        if (e.i < 0 || e.j <= e.i || e.j >= n)
            throw SchemaError("tensor entry (" + std::to_string(e.i) + "," + std::to_string(e.j) +
                              ") must satisfy 0 <= i < j < dim");
        entries.push_back({e.i, e.j, e.expr, sys->parse_expr(e.expr)});
    }
    sys->tensor = std::make_shared<SymbolicTensor>(n, std::move(entries), sys->param_values);
    if (def.hamiltonian.empty()) throw SchemaError("hamiltonian is missing");
    sys->hamiltonian = {def.hamiltonian_name, def.hamiltonian, sys->parse_expr(def.hamiltonian)};
    for (const auto& c : def.casimirs) {
        Casimir cas;
        cas.name = c.name;
        cas.text = c.expr;
        cas.expr = sys->parse_expr(c.expr);
        cas.scope = c.local ? CasimirScope::Local : CasimirScope::Global;
        cas.domain = c.domain;
        sys->casimirs.push_back(std::move(cas));
    }
    for (const auto& [k, t] : def.conserved) sys->conserved.push_back({k, t, sys->parse_expr(t)});
    for (const auto& [k, t] : def.aux) sys->aux.push_back({k, t, sys->parse_expr(t)});
    for (const auto& c : def.charts)
        sys->charts.push_back(make_chart(*sys, c.name, c.vars, c.embedding, c.generators, c.subcasimirs, c.box));
    sys->darboux_weinstein = def.darboux_weinstein;
    sys->box = def.box;
    for (const auto& [axis, period] : def.periods) {
        if (axis < 0 || axis >= n) throw SchemaError("periodic axis out of range");
        if (!(period > 0.0)) throw SchemaError("period must be positive");
    }
    sys->periods = def.periods;
    validate_system(*sys);
    return sys;
}

SystemDef describe_system(const PoissonSystem& sys) {
    const auto* sym = dynamic_cast<const SymbolicTensor*>(sys.tensor.get());
    if (!sym) throw PreconditionError("system '" + sys.name + "' has no expression tensor");
    SystemDef s;
    s.name = sys.name;
    s.variables = sys.variables;
    for (std::size_t k = 0; k < sys.param_names.size(); ++k)
        s.parameters.emplace_back(sys.param_names[k], sys.param_values[k]);
    for (const auto& e : sym->entries()) s.entries.push_back({e.i, e.j, e.text});
    s.hamiltonian_name = sys.hamiltonian.name;
    s.hamiltonian = sys.hamiltonian.text;
    for (const auto& c : sys.casimirs) s.casimirs.push_back({c.name, c.text, c.scope == CasimirScope::Local, c.domain});
    for (const auto& c : sys.conserved) s.conserved.emplace_back(c.name, c.text);
    for (const auto& c : sys.aux) s.aux.emplace_back(c.name, c.text);
    for (const auto& c : sys.charts) {
        SystemDef::ChartDef cs;
        cs.name = c.name;
        cs.vars = c.vars;
        cs.embedding = c.embedding_text;
        cs.generators = c.generator_text;
        for (const auto& sc : c.subcasimirs) cs.subcasimirs.emplace_back(sc.name, sc.text);
        cs.box = c.box;
        s.charts.push_back(std::move(cs));
    }
    s.darboux_weinstein = sys.darboux_weinstein;
    s.box = sys.box;
    s.periods = sys.periods;
    return s;
}

}  // namespace pstab
