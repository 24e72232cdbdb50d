#pragma once

#include <json.hpp>

#include "pstab/certify.hpp"
#include "pstab/foliation.hpp"
#include "pstab/gallery.hpp"
#include "pstab/reduction.hpp"
#include "pstab/simulate.hpp"
#include "pstab/spectral.hpp"

namespace pstab::report {

using json = nlohmann::ordered_json;

json vec(const Vec& v);
json mat(const Mat& M);  // array of rows
json spectrum(const std::vector<cplx>& ev);

json linearization(const LinearizationReport& r);
json dw(const DWBlocks& b);
json fcondition(const FConditionReport& f);
json certificate(const Certificate& c);
json chart_check(const ChartCheck& c);
json icertificate(const ICertificate& c);
json probe(const ProbeReport& p);
json drift(const std::vector<Drift>& d);
json isolation(const IsolationReport& r, const Grid& grid);
json t2(const T2Report& r);
json separation(const SeparationReport& r);
json expectation(const Expectation& e);

/// Common envelope: tool name, version, command and seed.
json envelope(const std::string& command, const PoissonSystem& sys, std::uint64_t seed);

}  // namespace pstab::report
