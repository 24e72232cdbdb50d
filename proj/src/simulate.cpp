#include "pstab/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "pstab/errors.hpp"

namespace pstab {

const char* to_string(ProbeKind k) {
    switch (k) {
        case ProbeKind::Containment: return "containment";
        case ProbeKind::WeakMonotone: return "weak-monotone";
        case ProbeKind::Escape: return "escape";
    }
    return "?";
}

Vec rk4_step(const PoissonSystem& sys, const Vec& z, double h) {
    Vec k1 = hamiltonian_vf(sys, z);
    Vec k2 = hamiltonian_vf(sys, z + 0.5 * h * k1);
    Vec k3 = hamiltonian_vf(sys, z + 0.5 * h * k2);
    Vec k4 = hamiltonian_vf(sys, z + h * k3);
    return z + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Dormand-Prince 5(4) tableau
Vec rk45_step(const PoissonSystem& sys, const Vec& z, double h, Vec& err) {
    static constexpr double a21 = 1.0 / 5.0;
    static constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
    static constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
    static constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                            a54 = -212.0 / 729.0;
    static constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                            a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
    static constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0, b5 = -2187.0 / 6784.0,
                            b6 = 11.0 / 84.0;
    static constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                            e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
    Vec k1 = hamiltonian_vf(sys, z);
    Vec k2 = hamiltonian_vf(sys, z + h * a21 * k1);
    Vec k3 = hamiltonian_vf(sys, z + h * (a31 * k1 + a32 * k2));
    Vec k4 = hamiltonian_vf(sys, z + h * (a41 * k1 + a42 * k2 + a43 * k3));
    Vec k5 = hamiltonian_vf(sys, z + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    Vec k6 = hamiltonian_vf(sys, z + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    Vec z5 = z + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    Vec k7 = hamiltonian_vf(sys, z5);
    err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    return z5;
}

namespace {

std::vector<std::pair<std::string, const Expression*>> recorded(const PoissonSystem& sys,
                                                                 const std::vector<std::string>& names) {
    std::vector<std::pair<std::string, const Expression*>> out;
    if (names.empty()) {
        out.emplace_back(sys.hamiltonian.name, &sys.hamiltonian.expr);
        for (const auto& c : sys.casimirs) out.emplace_back(c.name, &c.expr);
        for (const auto& c : sys.conserved) out.emplace_back(c.name, &c.expr);
        return out;
    }
    for (const auto& n : names) {
        const Expression* e = sys.find_function(n);
        if (!e) throw NotFoundError("unknown function '" + n + "'");
        out.emplace_back(n, e);
    }
    return out;
}

}  // namespace

Trajectory integrate(const PoissonSystem& sys, const Vec& z0, const IntegrateOptions& opts) {
    if (z0.size() != sys.dim()) throw PreconditionError("initial point has wrong dimension");
    if (!(opts.t_end > 0.0)) throw PreconditionError("t_end must be positive");
    if (!opts.adaptive_tol && !(opts.dt > 0.0)) throw PreconditionError("dt must be positive");
    auto fns = recorded(sys, opts.functions);
    Trajectory tr;
    tr.variables = sys.variables;
    for (auto& f : fns) tr.names.push_back(f.first);
    auto record = [&](double t, const Vec& z) {
        tr.t.push_back(t);
        tr.z.push_back(z);
        std::vector<double> v;
        for (auto& f : fns) v.push_back(f.second->eval({z.data(), std::size_t(z.size())}, sys.params()));
        tr.values.push_back(std::move(v));
    };
    Vec z = z0;
    double t = 0.0;
    record(t, z);
    const int every = std::max(1, opts.record_every);
    if (!opts.adaptive_tol) {
        const long steps = std::lround(std::ceil(opts.t_end / opts.dt - 1e-9));
        const double h = opts.t_end / double(steps);
        for (long k = 1; k <= steps; ++k) {
            z = rk4_step(sys, z, h);
            t = (k == steps) ? opts.t_end : k * h;
            if (k % every == 0 || k == steps) record(t, z);
        }
        return tr;
    }
    const double tol = *opts.adaptive_tol;
    double h = std::min(opts.dt > 0.0 ? opts.dt : 1e-3, opts.t_end);
    long accepted = 0;
    while (t < opts.t_end) {
        h = std::min(h, opts.t_end - t);
        if (h < opts.min_step * std::max(1.0, std::fabs(t)))
            throw ConvergenceError("adaptive step underflow at t=" + std::to_string(t));
        Vec err;
        Vec zn = rk45_step(sys, z, h, err);
        double e = 0.0;
        for (int i = 0; i < z.size(); ++i)
            e = std::max(e, std::fabs(err[i]) / (tol * (1.0 + std::max(std::fabs(z[i]), std::fabs(zn[i])))));
        if (!std::isfinite(e)) {
            h *= 0.25;
            continue;
        }
        if (e <= 1.0) {
            t = (opts.t_end - t - h <= 1e-15 * opts.t_end) ? opts.t_end : t + h;
            z = zn;
            ++accepted;
            if (accepted % every == 0 || t >= opts.t_end) record(t, z);
        }
        double fac = e == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(e, -0.2), 0.2, 5.0);
        h *= fac;
    }
    return tr;
}

std::vector<Drift> drift_report(const Trajectory& traj) {
    std::vector<Drift> out;
    for (std::size_t f = 0; f < traj.names.size(); ++f) {
        Drift d;
        d.name = traj.names[f];
        double g0 = traj.values.front()[f];
        for (const auto& row : traj.values)
            d.max_relative = std::max(d.max_relative, std::fabs(row[f] - g0) / std::max(1.0, std::fabs(g0)));
        out.push_back(d);
    }
    return out;
}

void write_csv(const Trajectory& traj, std::ostream& os) {
    os << "t";
    for (const auto& v : traj.variables) os << ',' << v;
    for (const auto& n : traj.names) os << ',' << n;
    os << '\n';
    char buf[40];
    auto put = [&](double x) {
        std::snprintf(buf, sizeof buf, "%.17g", x);
        os << buf;
    };
    for (std::size_t k = 0; k < traj.t.size(); ++k) {
        put(traj.t[k]);
        for (int i = 0; i < traj.z[k].size(); ++i) {
            os << ',';
            put(traj.z[k][i]);
        }
        for (double v : traj.values[k]) {
            os << ',';
            put(v);
        }
        os << '\n';
    }
}

ProbeReport stability_probe(const PoissonSystem& sys, const Vec& ze, const LyapunovData* lyapunov,
                            const ProbeOptions& opts) {
    if (!(opts.radius > 0.0)) throw PreconditionError("probe radius must be positive");
    const int n = sys.dim();
    Mat Dir = opts.directions ? *opts.directions : Mat(Mat::Identity(n, n));
    if (Dir.rows() != n || Dir.cols() < 1) throw PreconditionError("probe directions have wrong shape");
    Eigen::HouseholderQR<Mat> qr(Dir);
    Mat Q = qr.householderQ() * Mat::Identity(n, Dir.cols());
    std::vector<Vec> starts;
    for (const Vec& w : sample_sphere(Vec::Zero(Dir.cols()), opts.radius, opts.samples, opts.seed))
        starts.push_back(ze + Q * w);

    struct Result {
        double excursion = 0.0;
        bool escaped = false;
        double escape_time = 0.0;
        int violations = 0;
        double worst = 0.0;
        bool failed = false;
    };
    std::vector<Result> res(starts.size());
    const long steps = std::lround(std::ceil(opts.horizon / opts.dt - 1e-9));
    const double h = opts.horizon / double(steps);
    const double limit = opts.escape_factor * opts.radius;
    parallel_for(starts.size(), [&](std::size_t s) {
        Result& r = res[s];
        Vec z = starts[s];
        try {
            double Lprev = lyapunov ? lyapunov->value(sys, z) : 0.0;
            for (long k = 1; k <= steps; ++k) {
                z = rk4_step(sys, z, h);
                double ex = (z - ze).norm();
                if (!std::isfinite(ex)) {
                    r.escaped = true;
                    r.escape_time = k * h;
                    break;
                }
                r.excursion = std::max(r.excursion, ex);
                if (ex > limit) {
                    r.escaped = true;
                    r.escape_time = k * h;
                    break;
                }
                if (lyapunov) {
                    double L = lyapunov->value(sys, z);
                    double inc = L - Lprev;
                    if (inc > opts.monotone_tol) {
                        ++r.violations;
                        r.worst = std::max(r.worst, inc);
                    }
                    Lprev = L;
                }
            }
        } catch (const DomainError&) {
            r.failed = true;
        }
    });

    ProbeReport rep;
    rep.radius = opts.radius;
    rep.samples = int(starts.size());
    rep.horizon = opts.horizon;
    rep.monotone_checked = lyapunov != nullptr;
    rep.first_escape_time = std::numeric_limits<double>::infinity();
    for (const auto& r : res) {
        rep.max_excursion = std::max(rep.max_excursion, r.excursion);
        if (r.escaped) {
            ++rep.escaped;
            rep.first_escape_time = std::min(rep.first_escape_time, r.escape_time);
        }
        rep.monotone_violations += r.violations;
        rep.max_violation = std::max(rep.max_violation, r.worst);
        rep.failed += r.failed;
    }
    if (rep.escaped > 0) rep.kind = ProbeKind::Escape;
    else if (lyapunov && lyapunov->has_F && rep.monotone_violations == 0) rep.kind = ProbeKind::WeakMonotone;
    else rep.kind = ProbeKind::Containment;
    if (rep.escaped == 0) rep.first_escape_time = 0.0;
    return rep;
}

}  // namespace pstab
