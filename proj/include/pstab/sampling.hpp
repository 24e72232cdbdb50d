#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace pstab {

inline constexpr std::uint64_t kDefaultSeed = 20240917;

/// Randomly shifted Halton sequence in [0,1)^dim; the shift is derived from the seed.
class QuasiRandom {
public:
    QuasiRandom(int dim, std::uint64_t seed);
    Eigen::VectorXd next();
    int dim() const { return dim_; }

private:
    int dim_;
    std::uint64_t index_ = 1;
    std::vector<double> shift_;
};

struct Box {
    Eigen::VectorXd lo, hi;
    int dim() const { return int(lo.size()); }
    bool contains(const Eigen::VectorXd& z, double slack = 0.0) const;
    Eigen::VectorXd center() const { return 0.5 * (lo + hi); }
    double diameter() const { return (hi - lo).norm(); }
};

/// Points of the ball(center, radius) minus ball(center, inner).
std::vector<Eigen::VectorXd> sample_ball(const Eigen::VectorXd& center, double radius, double inner,
                                         int count, std::uint64_t seed);
/// Points on the sphere(center, radius).
std::vector<Eigen::VectorXd> sample_sphere(const Eigen::VectorXd& center, double radius, int count,
                                           std::uint64_t seed);
std::vector<Eigen::VectorXd> sample_box(const Box& box, int count, std::uint64_t seed);

/// Worker cap used by the parallel loops; 0 means hardware concurrency.
void set_thread_limit(int k);
int thread_limit();

/// Runs body(i) for i in [0,count); results must be written to per-index slots.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace pstab
