#pragma once

#include <string>

#include "pstab/poisson.hpp"

namespace pstab {

/// Reads a system-definition document. Documents with a "reduction" member rebuild the
/// parent and reduce it along the named chart.
SystemPtr load_system_json(const std::string& text);
SystemPtr load_system_file(const std::string& path);

/// Writes the system-definition document; reduced systems are written as parent plus chart.
std::string system_to_json(const PoissonSystem& sys, int indent = 2);

}  // namespace pstab
