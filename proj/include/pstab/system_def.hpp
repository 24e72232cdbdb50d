#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pstab/poisson.hpp"

namespace pstab {

/// Textual description of a system; every expression is kept as source text.
struct SystemDef {
    struct Entry {
        int i = 0, j = 0;
        std::string expr;
    };
    struct CasimirDef {
        std::string name, expr;
        bool local = false;
        std::optional<Box> domain;
    };
    struct ChartDef {
        std::string name;
        std::vector<std::string> vars, embedding, generators;
        std::vector<std::pair<std::string, std::string>> subcasimirs;
        std::optional<Box> box;
    };

    std::string name;
    std::vector<std::string> variables;
    std::vector<std::pair<std::string, double>> parameters;
    std::vector<Entry> entries;
    std::string hamiltonian_name = "H";
    std::string hamiltonian;
    std::vector<CasimirDef> casimirs;
    std::vector<std::pair<std::string, std::string>> conserved;
    std::vector<std::pair<std::string, std::string>> aux;
    std::vector<ChartDef> charts;
    std::optional<DarbouxWeinstein> darboux_weinstein;
    std::optional<Box> box;
    std::map<int, double> periods;
};

/// Parses every expression, validates and returns the immutable system.
SystemPtr build_system(const SystemDef& def);

/// Inverse of build_system for systems with an expression tensor.
SystemDef describe_system(const PoissonSystem& sys);

}  // namespace pstab
