#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pstab/poisson.hpp"
#include "pstab/system_def.hpp"

namespace pstab {

/// Where a pinned value comes from: quoted from the published example or derived by hand.
enum class Source { Published, Derived };
const char* to_string(Source s);

/// One pinned result. `kind` selects the check:
///   tensor, vector-field, jacobian, bracket, eigenvalues, classification, verdict, restricted-spectrum,
///   dw-S, dw-P, dw-Q, passing, i-verdict, reduced-tensor, suggest-F, isolation.
struct Expectation {
    std::string kind;
    Vec point;
    std::string value;                 // verdict / label strings
    std::string grade;                 // verdict kind only, optional
    std::vector<double> numbers;       // row-major matrices, (re, im) pairs, vectors
    std::string F;                     // verdict kind: auxiliary function
    std::string chart;                 // i-verdict / reduced-tensor
    std::vector<std::string> functions;  // bracket (F, G), isolation functions
    int res = 0;                       // isolation grid resolution
    double tol = 1e-9;
    Source source = Source::Derived;
    std::string note;
};

struct GalleryEntry {
    std::string id;
    std::string description;
    std::vector<std::pair<std::string, double>> parameters;  // values actually used
    SystemDef def;
    SystemPtr system;
    std::vector<Expectation> expected;
};

std::vector<std::string> gallery_ids();

/// Builds an entry; overrides replace default parameter values by name.
GalleryEntry gallery_load(const std::string& id,
                          const std::vector<std::pair<std::string, double>>& overrides = {});

/// Parses "k=v,k=v".
std::vector<std::pair<std::string, double>> parse_param_list(const std::string& text);

struct ExpectationResult {
    bool pass = false;
    std::string observed;
};

/// Recomputes one pinned value with the owning module.
ExpectationResult check_expectation(const GalleryEntry& entry, const Expectation& e);

}  // namespace pstab
