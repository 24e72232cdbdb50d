#include "pstab/sampling.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <random>
#include <thread>

#include "pstab/errors.hpp"

namespace pstab {

namespace {

const int kPrimes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53,
                       59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103, 107, 109, 113, 127, 131};

double radical_inverse(std::uint64_t i, int base) {
    double inv = 1.0 / base, f = inv, r = 0.0;
    while (i > 0) {
        r += f * double(i % base);
        i /= base;
        f *= inv;
    }
    return r;
}

std::atomic<int> g_thread_limit{0};

}  // namespace

QuasiRandom::QuasiRandom(int dim, std::uint64_t seed) : dim_(dim), shift_(dim) {
    if (dim > int(sizeof kPrimes / sizeof kPrimes[0]))
        throw PreconditionError("quasi-random sequence supports at most 32 dimensions");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (double& s : shift_) s = u(rng);
}

Eigen::VectorXd QuasiRandom::next() {
    Eigen::VectorXd v(dim_);
    for (int d = 0; d < dim_; ++d) {
        double x = radical_inverse(index_, kPrimes[d]) + shift_[d];
        v[d] = x - std::floor(x);
    }
    ++index_;
    return v;
}

bool Box::contains(const Eigen::VectorXd& z, double slack) const {
    for (int i = 0; i < dim(); ++i)
        if (z[i] < lo[i] - slack || z[i] > hi[i] + slack) return false;
    return true;
}

std::vector<Eigen::VectorXd> sample_ball(const Eigen::VectorXd& center, double radius, double inner,
                                         int count, std::uint64_t seed) {
    const int n = int(center.size());
    QuasiRandom qr(n, seed);
    std::vector<Eigen::VectorXd> out;
    out.reserve(count);
    const std::size_t max_tries = std::size_t(count) * 200 + 1000;
    for (std::size_t t = 0; t < max_tries && int(out.size()) < count; ++t) {
        Eigen::VectorXd u = 2.0 * qr.next().array() - 1.0;
        double r = u.norm();
        if (r > 1.0 || r * radius <= inner) continue;
        out.push_back(center + radius * u);
    }
    return out;
}

std::vector<Eigen::VectorXd> sample_sphere(const Eigen::VectorXd& center, double radius, int count,
                                           std::uint64_t seed) {
    const int n = int(center.size());
    QuasiRandom qr(n, seed);
    std::vector<Eigen::VectorXd> out;
    out.reserve(count);
    const std::size_t max_tries = std::size_t(count) * 200 + 1000;
    for (std::size_t t = 0; t < max_tries && int(out.size()) < count; ++t) {
        Eigen::VectorXd u = 2.0 * qr.next().array() - 1.0;
        double r = u.norm();
        if (r > 1.0 || r < 0.1) continue;
        out.push_back(center + radius * u / r);
    }
    return out;
}

std::vector<Eigen::VectorXd> sample_box(const Box& box, int count, std::uint64_t seed) {
    QuasiRandom qr(box.dim(), seed);
    std::vector<Eigen::VectorXd> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i)
        out.push_back(box.lo.array() + qr.next().array() * (box.hi - box.lo).array());
    return out;
}

void set_thread_limit(int k) { g_thread_limit = k < 0 ? 0 : k; }

int thread_limit() {
    int k = g_thread_limit;
    if (k > 0) return k;
    unsigned h = std::thread::hardware_concurrency();
    return h == 0 ? 1 : int(h);
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
    int workers = std::min<std::size_t>(thread_limit(), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    auto run = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mu);
                if (!err) err = std::current_exception();
                next = count;
            }
        }
    };
    std::vector<std::thread> pool;
    for (int w = 1; w < workers; ++w) pool.emplace_back(run);
    run();
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

}  // namespace pstab
