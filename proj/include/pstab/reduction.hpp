#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pstab/certify.hpp"
#include "pstab/poisson.hpp"

namespace pstab {

/// b(u) = A(u) B(phi(u)) A(u)^T with A the left pseudo-inverse of D phi(u).
class ReducedTensor : public TensorField {
public:
    ReducedTensor(SystemPtr parent, SubmanifoldChart chart);
    int dim() const override { return int(chart_.vars.size()); }
    Mat value(const Vec& u) const override;
    void derivatives(const Vec& u, Mat& b, std::vector<Mat>& db) const override;

    Vec embed(const Vec& u) const;
    Mat embedding_jacobian(const Vec& u) const;
    /// Left pseudo-inverse of the embedding Jacobian; throws when it is rank deficient.
    Mat projector_A(const Vec& u) const;
    const SubmanifoldChart& chart() const { return chart_; }
    const SystemPtr& parent() const { return parent_; }

private:
    SystemPtr parent_;
    SubmanifoldChart chart_;
};

struct ChartCheck {
    int samples = 0;
    double generator_max = 0.0;      // max |G_k(phi(u))|
    double embedding_min_sv = 0.0;   // smallest relative singular value of D phi
    double generator_min_sv = 0.0;   // same for the stacked generator differentials
    bool ok = false;
    std::string problem;
};

/// Parses chart expressions against the parent system; embedding over chart variables.
SubmanifoldChart make_chart(const PoissonSystem& sys, std::string name, std::vector<std::string> vars,
                            std::vector<std::string> embedding, std::vector<std::string> generators,
                            std::vector<std::pair<std::string, std::string>> subcasimirs = {},
                            std::optional<Box> box = std::nullopt);

Box chart_box(const SubmanifoldChart& chart);
ChartCheck validate_chart(const PoissonSystem& sys, const SubmanifoldChart& chart, int count = 200,
                          std::uint64_t seed = kDefaultSeed);
double quasi_poisson_residual(const PoissonSystem& sys, const SubmanifoldChart& chart, int count = 200,
                              std::uint64_t seed = kDefaultSeed);

inline constexpr double kQuasiPoissonTol = 1e-8;

SystemPtr reduce_chart(SystemPtr sys, const SubmanifoldChart& chart);
SystemPtr reduce_chart(SystemPtr sys, const std::string& chart_name);

/// Chart coordinates u with phi(u) = z; throws if z is not on the chart image.
Vec chart_preimage(const ReducedTensor& rt, const Vec& z, double tol = 1e-9);

enum class IVerdict { IStable, IUnstable, Inconclusive };
const char* to_string(IVerdict v);

struct ICertifyOptions {
    CertifyOptions certify;
    bool probe = true;
    double probe_radius = 0.05;
    int probe_samples = 16;
    double probe_horizon = 200.0;
};

struct AmbientICheck {
    std::vector<std::string> function_names;
    EnergyCasimirCheck check;
    bool success = false;
};

struct ICertificate {
    IVerdict verdict = IVerdict::Inconclusive;
    Grade grade = Grade::Inconclusive;
    AmbientICheck ambient;
    Vec preimage;
    SystemPtr reduced;
    Certificate reduced_certificate;
    std::optional<bool> probe_escaped;
    double quasi_poisson = 0.0;
    std::vector<std::string> notes;
};

ICertificate i_certify(SystemPtr sys, const std::string& chart_name, const Vec& ze, const ICertifyOptions& opts = {});

}  // namespace pstab
