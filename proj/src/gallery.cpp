#include "pstab/gallery.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "pstab/certify.hpp"
#include "pstab/errors.hpp"
#include "pstab/foliation.hpp"
#include "pstab/reduction.hpp"
#include "pstab/spectral.hpp"

namespace pstab {

const char* to_string(Source s) { return s == Source::Published ? "published" : "derived"; }

namespace {

using Params = std::vector<std::pair<std::string, double>>;
constexpr double kPi = std::numbers::pi;

Box make_box(std::initializer_list<double> lo, std::initializer_list<double> hi) {
    Box b;
    b.lo = Eigen::Map<const Vec>(lo.begin(), Eigen::Index(lo.size()));
    b.hi = Eigen::Map<const Vec>(hi.begin(), Eigen::Index(hi.size()));
    return b;
}

Vec V(std::initializer_list<double> v) { return Eigen::Map<const Vec>(v.begin(), Eigen::Index(v.size())); }

double param(const Params& p, const std::string& k) {
    for (const auto& [n, v] : p)
        if (n == k) return v;
    throw NotFoundError("parameter '" + k + "' missing");
}

Expectation expect(std::string kind, Vec point, Source src) {
    Expectation e;
    e.kind = std::move(kind);
    e.point = std::move(point);
    e.source = src;
    return e;
}

Expectation verdict(Vec point, std::string v, std::string grade, Source src, std::string F = {}) {
    Expectation e = expect("verdict", std::move(point), src);
    e.value = std::move(v);
    e.grade = std::move(grade);
    e.F = std::move(F);
    return e;
}

Expectation numeric(std::string kind, Vec point, std::vector<double> nums, Source src, double tol = 1e-9) {
    Expectation e = expect(std::move(kind), std::move(point), src);
    e.numbers = std::move(nums);
    e.tol = tol;
    return e;
}

Expectation label(std::string kind, Vec point, std::string v, Source src) {
    Expectation e = expect(std::move(kind), std::move(point), src);
    e.value = std::move(v);
    return e;
}

void toda2(GalleryEntry& g) {
    auto& s = g.def;
    s.variables = {"x", "y"};
    s.entries = {{0, 1, "-x"}};
    s.hamiltonian = "x^2 + y^2";
    s.aux = {{"F", "x"}};
    s.darboux_weinstein = DarbouxWeinstein{0, 2};
    s.box = make_box({-2, -2}, {2, 2});
    g.description = "two-dimensional bracket {x,y} = -x with H = x^2 + y^2";
    auto& E = g.expected;
    E.push_back(numeric("tensor", V({1, 0}), {0, -1, 1, 0}, Source::Published));
    Expectation br = numeric("bracket", V({0.5, 1}), {-1.0}, Source::Published);
    br.functions = {"x^2", "x^2 + y^2"};
    E.push_back(br);
    E.push_back(numeric("eigenvalues", V({0, 1}), {-2, 0, 0, 0}, Source::Derived));
    E.push_back(numeric("eigenvalues", V({0, 2}), {-4, 0, 0, 0}, Source::Derived));
    E.push_back(verdict(V({0, 1}), "weakly-asymptotically-stable", "empirical", Source::Published, "F"));
    E.push_back(verdict(V({0, -1}), "spectrally-unstable", "certified", Source::Published));
    E.push_back(numeric("dw-P", V({0, 1}), {-2, 0, 0, 0}, Source::Derived));
}

void rigid_axis(GalleryEntry& g, const Params& p) {
    auto& s = g.def;
    s.variables = {"x", "y", "z"};
    s.entries = {{0, 2, "y"}, {1, 2, "-x"}};
    s.hamiltonian = "a*z";
    s.casimirs = {{"C", "0.5*(x^2 + y^2)", false, std::nullopt}};
    s.darboux_weinstein = DarbouxWeinstein{0, 3};
    s.box = make_box({-1, -1, -1}, {1, 1, 1});
    g.description = "rotation bracket on R^3 with H = a z and Casimir (x^2 + y^2)/2";
    const double a = param(p, "a");
    auto& E = g.expected;
    E.push_back(numeric("tensor", V({0, 0, 5}), std::vector<double>(9, 0.0), Source::Published));
    E.push_back(numeric("dw-P", V({0, 0, 1}), {0, a, 0, -a, 0, 0, 0, 0, 0}, Source::Derived));
    E.push_back(numeric("eigenvalues", V({0, 0, 1}), {0, -std::fabs(a), 0, 0, 0, std::fabs(a)}, Source::Derived));
    E.push_back(numeric("restricted-spectrum", V({0, 0, 1}), {1, 1}, Source::Published));
    E.push_back(verdict(V({0, 0, 1}), "lyapunov-stable", "certified", Source::Published));
}

void torus_alpha(GalleryEntry& g, const Params& p) {
    auto& s = g.def;
    const double alpha = param(p, "alpha");
    s.variables = {"theta", "phi", "x"};
    s.entries = {{0, 2, "1"}, {1, 2, "-alpha"}};
    s.hamiltonian = "x^2 - cos(theta)";
    s.casimirs = {{"C", "alpha*theta + phi", true, make_box({-kPi / 2, -kPi / 2, -1}, {kPi / 2, kPi / 2, 1})}};
    s.box = make_box({0, 0, -1}, {2 * kPi, 2 * kPi, 1});
    s.periods = {{0, 2 * kPi}, {1, 2 * kPi}};
    g.description = "irrational linear flow on the torus times R with H = x^2 - cos(theta)";
    auto& E = g.expected;
    // orthonormal kernel basis of dC; coordinate basis (1,-alpha,0),(0,0,1) would give {1, 2}
    E.push_back(numeric("restricted-spectrum", V({0, 0, 0}), {1.0 / (1.0 + alpha * alpha), 2.0}, Source::Derived));
    E.push_back(verdict(V({0, 0, 0}), "lyapunov-stable", "certified", Source::Published));
}

void chaplygin3(GalleryEntry& g) {
    auto& s = g.def;
    s.variables = {"x", "theta", "p_theta"};
    s.entries = {{0, 2, "-x/(1 + x^2)"}, {1, 2, "1/(1 + x^2)"}};
    s.hamiltonian = "0.5*(1 + x^2)*p_theta^2";
    s.casimirs = {{"C", "x*exp(theta)", true, std::nullopt}};
    SystemDef::ChartDef S;
    S.name = "S";
    S.vars = {"theta", "p_theta"};
    S.embedding = {"0", "theta", "p_theta"};
    S.generators = {"x"};
    s.charts = {S};
    s.box = make_box({-1, -1, -1}, {1, 1, 1});
    g.description = "Chaplygin sleigh on the cylinder, three-dimensional almost Poisson form";
    auto& E = g.expected;
    const double x = 0.4, th = 0.3, pt = 0.7;
    E.push_back(numeric("vector-field", V({x, th, pt}), {-x * pt, pt, x * x * pt * pt / (1 + x * x)},
                        Source::Published));
    E.push_back(numeric("jacobian", V({0.3, 0, 0}), {0, 0, -0.3, 0, 0, 1, 0, 0, 0}, Source::Published, 1e-15));
    E.push_back(label("classification", V({0.3, 0, 0}), "linearly-unstable-defective-axis", Source::Published));
    Expectation rt = numeric("reduced-tensor", V({0, 0}), {0, 1, -1, 0}, Source::Published, 1e-10);
    rt.chart = "S";
    E.push_back(rt);
    Expectation iv = label("i-verdict", V({0, 0, 0}), "I-unstable", Source::Derived);
    iv.chart = "S";
    iv.note = "reached by the probe on the reduced free particle";
    E.push_back(iv);
}

void chaplygin_reduced(GalleryEntry& g) {
    auto& s = g.def;
    s.variables = {"x", "p_theta"};
    s.entries = {{0, 1, "-x/(1 + x^2)"}};
    s.hamiltonian = "0.5*(1 + x^2)*p_theta^2";
    s.aux = {{"F", "x^2/2"}};
    s.box = make_box({-1, -1}, {1, 1});
    g.description = "Chaplygin sleigh after the circle reduction";
    auto& E = g.expected;
    Expectation br = numeric("bracket", V({1, 1}), {-2.0}, Source::Published);
    br.functions = {"x^2", "0.5*(1 + x^2)*p_theta^2"};
    E.push_back(br);
    E.push_back(numeric("jacobian", V({0, 1}), {-1, 0, 0, 0}, Source::Published, 1e-15));
    E.push_back(numeric("eigenvalues", V({0, -1}), {0, 0, 1, 0}, Source::Published));
    E.push_back(verdict(V({0, -1}), "spectrally-unstable", "certified", Source::Published));
    E.push_back(verdict(V({0, 1}), "weakly-asymptotically-stable", "empirical", Source::Published, "F"));
    E.push_back(label("suggest-F", V({0, 1}), "x", Source::Derived));
}

void chaplygin_ideal(GalleryEntry& g) {
    auto& s = g.def;
    s.variables = {"theta", "p_theta"};
    s.entries = {{0, 1, "1"}};
    s.hamiltonian = "0.5*p_theta^2";
    s.box = make_box({-1, -1}, {1, 1});
    g.description = "Chaplygin sleigh restricted to the vanishing set of x: free particle";
    auto& E = g.expected;
    E.push_back(numeric("tensor", V({0.2, 0.1}), {0, 1, -1, 0}, Source::Published));
    E.push_back(label("classification", V({0, 0}), "linearly-unstable-defective-axis", Source::Derived));
}

double wheels_k(double M, double m, double R, double r) {
    return (m + M) / (4 * M * m * R * R * r * r) -
           (m - M) * (m - M) * m * m * M * M / (4 * m * m * M * M * R * R * r * r * (m + M));
}

void wheels(GalleryEntry& g, Params& p) {
    const double M = param(p, "M"), m = param(p, "m"), R = param(p, "R"), r = param(p, "r");
    if (!(M > 0 && m > 0 && R > 0 && r > 0)) throw SchemaError("wheels: masses and radii must be positive");
    if (!(R > r)) throw SchemaError("wheels: parameters must satisfy R > r");
    const double k = wheels_k(M, m, R, r);
    if (!(k > 0)) throw SchemaError("wheels: k must be positive for these parameters");
    p.emplace_back("k", k);
    auto& s = g.def;
    s.variables = {"theta", "phi", "p"};
    s.entries = {{0, 2, "r"}, {1, 2, "R"}};
    s.hamiltonian_name = "h";
    s.hamiltonian = "p^2/(2*k) - M*R*cos(theta) - m*r*cos(phi)";
    s.casimirs = {{"C", "R*theta - r*phi", true, std::nullopt}};
    SystemDef::ChartDef L;
    L.name = "level";
    L.vars = {"t", "p"};
    L.embedding = {"r*t", "R*t", "p"};
    L.generators = {"R*theta - r*phi"};
    s.charts = {L};
    s.box = make_box({-kPi, -kPi, -1}, {kPi, kPi, 1});
    s.periods = {{0, 2 * kPi}, {1, 2 * kPi}};
    g.description = "two coupled spinning wheels on the constraint submanifold";
    auto& E = g.expected;
    E.push_back(numeric("tensor", V({0.3, -0.2, 0.5}), {0, 0, r, 0, 0, R, -r, -R, 0}, Source::Published));
    const double th = 0.3, ph = -0.2, pp = 0.5;
    E.push_back(numeric("vector-field", V({th, ph, pp}),
                        {r * pp / k, R * pp / k, -r * R * M * std::sin(th) - m * r * R * std::sin(ph)},
                        Source::Published));
    E.push_back(verdict(V({0, 0, 0}), "lyapunov-stable", "certified", Source::Published));
    const double margin = M * r - m * R;  // sign of M r cos(0) + m R cos(pi)
    if (std::fabs(margin) > 1e-6)
        E.push_back(verdict(V({0, kPi, 0}), margin > 0 ? "lyapunov-stable" : "inconclusive",
                            margin > 0 ? "certified" : "inconclusive", Source::Published));
}

void patrick_a(GalleryEntry& g, const Params& p) {
    auto& s = g.def;
    s.variables = {"x", "y", "z"};
    // B^{ij} = eps_{kij} dA/dz_k for A = (a^2 x^2 - y^2) y
    s.entries = {{0, 2, "-(a^2*x^2 - 3*y^2)"}, {1, 2, "2*a^2*x*y"}};
    s.hamiltonian_name = "h";
    s.hamiltonian = "x^2 - y^2 + z^2";
    s.casimirs = {{"A", "(a^2*x^2 - y^2)*y", false, std::nullopt}};
    s.box = make_box({-1, -1, -1}, {1, 1, 1});
    g.description = "cross-product bracket of the cubic A = (a^2 x^2 - y^2) y";
    const double a = param(p, "a");
    Expectation iso = label("isolation", V({0, 0, 0}),
                            std::fabs(a) < 1 ? "isolated-at-scale" : "not-isolated-at-scale", Source::Published);
    iso.functions = {"h", "A"};
    iso.res = 64;
    if (std::fabs(std::fabs(a) - 1) > 0.05) g.expected.push_back(iso);
}

void montaldi(GalleryEntry& g) {
    auto& s = g.def;
    s.variables = {"x", "y", "z"};
    const std::string f = "(x^2 + y^2 - z^2)";
    // printed signs of the y,z and x,z brackets fail the Jacobi identity; these are the corrected ones
    s.entries = {{0, 1, f + "^2"}, {0, 2, "2*y*z*" + f}, {1, 2, "-2*x*z*" + f}};
    s.hamiltonian = "z";
    s.aux = {{"f", f}};
    s.box = make_box({-1, -1, -1}, {1, 1, 1});
    g.description = "bracket vanishing on the cone x^2 + y^2 = z^2";
    const double x = 1, y = 1, z = 0.5, fv = x * x + y * y - z * z;
    g.expected.push_back(numeric("tensor", V({x, y, z}),
                                 {0, fv * fv, 2 * y * z * fv, -fv * fv, 0, -2 * x * z * fv, -2 * y * z * fv,
                                  2 * x * z * fv, 0},
                                 Source::Derived));
}

void dw_common(GalleryEntry& g) {
    auto& s = g.def;
    s.variables = {"q", "p", "z"};
    s.entries = {{0, 1, "1"}};
    s.darboux_weinstein = DarbouxWeinstein{1, 1};
    s.box = make_box({-1, -1, -1}, {1, 1, 1});
}

void dw_coupled(GalleryEntry& g) {
    dw_common(g);
    g.def.hamiltonian = "0.5*p^2 + z*q";
    g.description = "canonical pair plus a trivial direction, coupled passing at 0";
    auto& E = g.expected;
    Vec o = Vec::Zero(3);
    E.push_back(numeric("dw-S", o, {0, 1, 0, 0}, Source::Derived, 1e-12));
    E.push_back(numeric("dw-P", o, {0}, Source::Derived, 1e-12));
    E.push_back(numeric("dw-Q", o, {0, -1}, Source::Derived, 1e-12));
    E.push_back(label("passing", o, "coupled", Source::Derived));
    E.push_back(label("classification", o, "linearly-unstable-defective-axis", Source::Derived));
}

void dw_uncoupled(GalleryEntry& g) {
    dw_common(g);
    g.def.hamiltonian = "0.5*p^2 + z*p";
    g.description = "canonical pair plus a trivial direction, uncoupled passing at 0";
    auto& E = g.expected;
    Vec o = Vec::Zero(3);
    E.push_back(numeric("dw-S", o, {0, 1, 0, 0}, Source::Derived, 1e-12));
    E.push_back(numeric("dw-P", o, {0}, Source::Derived, 1e-12));
    E.push_back(numeric("dw-Q", o, {1, 0}, Source::Derived, 1e-12));
    E.push_back(label("passing", o, "uncoupled", Source::Derived));
}

void dw_none(GalleryEntry& g) {
    dw_common(g);
    g.def.hamiltonian = "0.5*(q^2 + p^2) + z*q";
    g.description = "canonical pair plus a trivial direction, no shared eigenvalue";
    auto& E = g.expected;
    Vec o = Vec::Zero(3);
    E.push_back(numeric("dw-S", o, {0, 1, -1, 0}, Source::Derived, 1e-12));
    E.push_back(numeric("dw-P", o, {0}, Source::Derived, 1e-12));
    E.push_back(numeric("dw-Q", o, {0, -1}, Source::Derived, 1e-12));
    E.push_back(label("passing", o, "none", Source::Derived));
    E.push_back(label("classification", o, "linearly-stable", Source::Derived));
}

Params defaults(const std::string& id) {
    if (id == "rigid_axis") return {{"a", 1.0}};
    if (id == "torus_alpha") return {{"alpha", std::numbers::phi}};
    if (id == "wheels") return {{"M", 2.0}, {"m", 1.0}, {"R", 1.0}, {"r", 0.5}};
    if (id == "patrick_a") return {{"a", 0.5}};
    return {};
}

std::string fmt_nums(const std::vector<double>& v) {
    std::ostringstream os;
    os.precision(12);
    os << '[';
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
    os << ']';
    return os.str();
}

std::vector<double> flat(const Mat& M) {
    std::vector<double> out;
    for (int i = 0; i < M.rows(); ++i)
        for (int j = 0; j < M.cols(); ++j) out.push_back(M(i, j));
    return out;
}

bool close(const std::vector<double>& a, const std::vector<double>& b, double tol) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!(std::fabs(a[i] - b[i]) <= tol * std::max(1.0, std::fabs(b[i])))) return false;
    return true;
}

Passing strongest(const DWBlocks& b) {
    Passing out = Passing::None;
    for (const auto& pi : b.passings) {
        if (pi.label == Passing::Coupled || pi.label == Passing::PDefective) return pi.label;
        if (pi.label == Passing::Uncoupled) out = Passing::Uncoupled;
    }
    return out;
}

}  // namespace

std::vector<std::string> gallery_ids() {
    return {"toda2",    "rigid_axis", "torus_alpha", "chaplygin3", "chaplygin_reduced", "chaplygin_ideal",
            "wheels",   "patrick_a",  "montaldi",    "dw_coupled", "dw_uncoupled",      "dw_none"};
}

std::vector<std::pair<std::string, double>> parse_param_list(const std::string& text) {
    std::vector<std::pair<std::string, double>> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0) throw SchemaError("parameter override '" + item + "' is not k=v");
        auto trim = [](std::string t) {
            const auto a = t.find_first_not_of(" \t"), b = t.find_last_not_of(" \t");
            return a == std::string::npos ? std::string() : t.substr(a, b - a + 1);
        };
        std::string key = trim(item.substr(0, eq)), val = trim(item.substr(eq + 1));
        if (key.empty()) throw SchemaError("parameter override '" + item + "' is not k=v");
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(val, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != val.size() || val.empty()) throw SchemaError("parameter value '" + val + "' is not a number");
        out.emplace_back(key, v);
    }
    return out;
}

GalleryEntry gallery_load(const std::string& id, const std::vector<std::pair<std::string, double>>& overrides) {
    const auto ids = gallery_ids();
    if (std::find(ids.begin(), ids.end(), id) == ids.end()) throw NotFoundError("unknown gallery id '" + id + "'");
    Params p = defaults(id);
    for (const auto& [k, v] : overrides) {
        auto it = std::find_if(p.begin(), p.end(), [&](const auto& kv) { return kv.first == k; });
        if (it == p.end()) throw SchemaError("gallery entry '" + id + "' has no parameter '" + k + "'");
        if (!std::isfinite(v)) throw SchemaError("parameter '" + k + "' must be finite");
        it->second = v;
    }
    GalleryEntry g;
    g.id = id;
    g.def.name = id;
    if (id == "toda2") toda2(g);
    else if (id == "rigid_axis") rigid_axis(g, p);
    else if (id == "torus_alpha") {
        if (param(p, "alpha") == 0.0) throw SchemaError("torus_alpha: alpha must be nonzero");
        torus_alpha(g, p);
    } else if (id == "chaplygin3") chaplygin3(g);
    else if (id == "chaplygin_reduced") chaplygin_reduced(g);
    else if (id == "chaplygin_ideal") chaplygin_ideal(g);
    else if (id == "wheels") wheels(g, p);
    else if (id == "patrick_a") patrick_a(g, p);
    else if (id == "montaldi") montaldi(g);
    else if (id == "dw_coupled") dw_coupled(g);
    else if (id == "dw_uncoupled") dw_uncoupled(g);
    else dw_none(g);
    g.parameters = p;
    g.def.parameters = p;
    g.system = build_system(g.def);
    return g;
}

ExpectationResult check_expectation(const GalleryEntry& entry, const Expectation& e) {
    const PoissonSystem& sys = *entry.system;
    ExpectationResult r;
    auto numbers = [&](const std::vector<double>& got) {
        r.observed = fmt_nums(got);
        r.pass = close(got, e.numbers, e.tol);
    };
    auto text = [&](const std::string& got) {
        r.observed = got;
        r.pass = got == e.value;
    };
    if (e.kind == "tensor") {
        numbers(flat(tensor_at(sys, e.point)));
    } else if (e.kind == "vector-field") {
        numbers(flat(hamiltonian_vf(sys, e.point)));
    } else if (e.kind == "jacobian") {
        numbers(flat(vf_jacobian(sys, e.point)));
    } else if (e.kind == "bracket") {
        Expression F = sys.parse_expr(e.functions.at(0)), G = sys.parse_expr(e.functions.at(1));
        numbers({bracket_eval(sys, F, G, e.point)});
    } else if (e.kind == "eigenvalues") {
        std::vector<double> got;
        for (const cplx& c : eigenvalues(vf_jacobian(sys, e.point))) {
            got.push_back(c.real());
            got.push_back(c.imag());
        }
        numbers(got);
    } else if (e.kind == "classification") {
        text(to_string(linearize(sys, make_equilibrium(sys, e.point)).classification));
    } else if (e.kind == "verdict") {
        CertifyOptions o;
        if (!e.F.empty()) o.F = e.F;
        Certificate c = certify(sys, make_equilibrium(sys, e.point), o);
        r.observed = std::string(to_string(c.verdict)) + "/" + to_string(c.grade);
        r.pass = e.value == to_string(c.verdict) && (e.grade.empty() || e.grade == to_string(c.grade));
    } else if (e.kind == "restricted-spectrum") {
        Certificate c = certify(sys, make_equilibrium(sys, e.point));
        std::vector<double> got(c.restricted_spectrum.data(),
                                c.restricted_spectrum.data() + c.restricted_spectrum.size());
        std::sort(got.begin(), got.end());
        numbers(got);
    } else if (e.kind == "dw-S" || e.kind == "dw-P" || e.kind == "dw-Q") {
        DWBlocks b = dw_blocks(sys, e.point);
        numbers(flat(e.kind == "dw-S" ? b.S : e.kind == "dw-P" ? b.P : b.Q));
    } else if (e.kind == "passing") {
        DWBlocks b = dw_blocks(sys, e.point);
        classify_passing(b);
        text(to_string(strongest(b)));
    } else if (e.kind == "i-verdict") {
        ICertificate ic = i_certify(entry.system, e.chart, e.point);
        text(to_string(ic.verdict));
    } else if (e.kind == "reduced-tensor") {
        SystemPtr red = reduce_chart(entry.system, e.chart);
        numbers(flat(tensor_at(*red, e.point)));
    } else if (e.kind == "suggest-F") {
        EquilibriumPoint ze = make_equilibrium(sys, e.point);
        auto sug = suggest_F(sys, ze, linearize(sys, ze));
        if (sug.empty()) {
            r.observed = "no suggestion";
            return r;
        }
        const int axis = int(std::find(sys.variables.begin(), sys.variables.end(), e.value) - sys.variables.begin());
        Vec g = sug.front().expr.grad({e.point.data(), std::size_t(e.point.size())}, sys.params());
        r.observed = sug.front().text;
        r.pass = axis < sys.dim() && g.norm() > 0 && std::fabs(g[axis]) / g.norm() >= 1 - 1e-9;
    } else if (e.kind == "isolation") {
        std::vector<Expression> fns;
        for (const auto& n : e.functions) {
            const Expression* f = sys.find_function(n);
            if (!f) throw NotFoundError("unknown function '" + n + "'");
            fns.push_back(*f);
        }
        Grid grid(sys.sampling_box(), std::vector<int>(sys.dim(), e.res), sys.periods);
        text(to_string(level_set_isolation(sys, e.point, fns, grid).verdict));
    } else {
        throw SchemaError("unknown expectation kind '" + e.kind + "'");
    }
    return r;
}

}  // namespace pstab
