#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pstab/certify.hpp"
#include "pstab/poisson.hpp"

namespace pstab {

struct Trajectory {
    std::vector<std::string> variables;
    std::vector<std::string> names;      // recorded functions
    std::vector<double> t;
    std::vector<Vec> z;
    std::vector<std::vector<double>> values;  // values[step][function]
};

struct IntegrateOptions {
    double t_end = 1.0;
    double dt = 1e-3;
    std::optional<double> adaptive_tol;  // RK45 (Dormand-Prince) when set
    /// Recorded functions; empty selects H, the Casimirs and the conserved quantities.
    std::vector<std::string> functions;
    int record_every = 1;
    double min_step = 1e-14;
};

Vec rk4_step(const PoissonSystem& sys, const Vec& z, double h);
/// One Dormand-Prince step; err receives the embedded error estimate.
Vec rk45_step(const PoissonSystem& sys, const Vec& z, double h, Vec& err);

Trajectory integrate(const PoissonSystem& sys, const Vec& z0, const IntegrateOptions& opts);

struct Drift {
    std::string name;
    double max_relative = 0.0;
};
std::vector<Drift> drift_report(const Trajectory& traj);

void write_csv(const Trajectory& traj, std::ostream& os);

enum class ProbeKind { Containment, WeakMonotone, Escape };
const char* to_string(ProbeKind k);

struct ProbeOptions {
    double radius = 0.05;
    int samples = 16;
    double horizon = 200.0;
    double dt = 0.01;
    double escape_factor = 10.0;
    double monotone_tol = 1e-9;
    /// Columns span the perturbation directions; identity when unset.
    std::optional<Mat> directions;
    std::uint64_t seed = kDefaultSeed;
};

struct ProbeReport {
    ProbeKind kind = ProbeKind::Containment;
    double radius = 0.0;
    int samples = 0;
    double horizon = 0.0;
    double max_excursion = 0.0;
    int escaped = 0;
    double first_escape_time = 0.0;
    bool monotone_checked = false;
    int monotone_violations = 0;
    double max_violation = 0.0;
    int failed = 0;  // trajectories stopped by an evaluation-domain error
};

ProbeReport stability_probe(const PoissonSystem& sys, const Vec& ze, const LyapunovData* lyapunov,
                            const ProbeOptions& opts = {});

}  // namespace pstab
