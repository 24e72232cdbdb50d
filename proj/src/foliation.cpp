#include "pstab/foliation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <ostream>

#include "pstab/errors.hpp"

namespace pstab {

const char* to_string(Isolation v) {
    switch (v) {
        case Isolation::IsolatedAtScale: return "isolated-at-scale";
        case Isolation::NotIsolatedAtScale: return "not-isolated-at-scale";
        case Isolation::IndeterminateAtScale: return "indeterminate-at-scale";
    }
    return "?";
}

Grid::Grid(Box box, std::vector<int> res, std::map<int, double> periods)
    : box_(std::move(box)), res_(std::move(res)), periods_(std::move(periods)) {
    const int n = int(res_.size());
    if (box_.dim() != n) throw PreconditionError("grid resolution does not match the box dimension");
    h_.resize(n);
    stride_.assign(n, 1);
    cells_ = 1;
    for (int i = n - 1; i >= 0; --i) {
        if (res_[i] < 1) throw PreconditionError("grid resolution must be positive");
        if (!(box_.hi[i] > box_.lo[i])) throw PreconditionError("box must have positive extent");
        h_[i] = (box_.hi[i] - box_.lo[i]) / res_[i];
        stride_[i] = cells_;
        cells_ *= res_[i];
    }
    // only axes whose box spans exactly one period wrap
    for (auto it = periods_.begin(); it != periods_.end();) {
        double span = box_.hi[it->first] - box_.lo[it->first];
        if (it->first >= n || std::fabs(span - it->second) > 1e-9 * it->second) it = periods_.erase(it);
        else ++it;
    }
}

long Grid::index(const std::vector<int>& ijk) const {
    long idx = 0;
    for (int i = 0; i < dim(); ++i) idx += ijk[i] * stride_[i];
    return idx;
}

std::vector<int> Grid::coords(long idx) const {
    std::vector<int> c(dim());
    for (int i = 0; i < dim(); ++i) {
        c[i] = int(idx / stride_[i]);
        idx %= stride_[i];
    }
    return c;
}

Vec Grid::center(long idx) const {
    auto c = coords(idx);
    Vec z(dim());
    for (int i = 0; i < dim(); ++i) z[i] = box_.lo[i] + (c[i] + 0.5) * h_[i];
    return z;
}

void Grid::wrap(Vec& z) const {
    for (const auto& [axis, p] : periods_) {
        double t = std::fmod(z[axis] - box_.lo[axis], p);
        if (t < 0) t += p;
        z[axis] = box_.lo[axis] + t;
    }
}

long Grid::cell_of(const Vec& zin) const {
    Vec z = zin;
    wrap(z);
    long idx = 0;
    for (int i = 0; i < dim(); ++i) {
        double t = (z[i] - box_.lo[i]) / h_[i];
        if (!(t >= -1e-9 && t <= res_[i] + 1e-9)) return -1;
        int k = std::clamp(int(std::floor(t)), 0, res_[i] - 1);
        idx += k * stride_[i];
    }
    return idx;
}

Vec Grid::displacement(const Vec& a, const Vec& b) const {
    Vec d = b - a;
    for (const auto& [axis, p] : periods_) d[axis] -= p * std::round(d[axis] / p);
    return d;
}

namespace {

std::vector<std::vector<int>> neighbor_offsets(int n) {
    std::vector<std::vector<int>> out;
    std::vector<int> o(n, -1);
    while (true) {
        if (std::any_of(o.begin(), o.end(), [](int v) { return v != 0; })) out.push_back(o);
        int i = 0;
        while (i < n && o[i] == 1) o[i++] = -1;
        if (i == n) break;
        ++o[i];
    }
    return out;
}

}  // namespace

std::vector<int> Grid::distance(const std::vector<char>& mask, int cap) const {
    std::vector<int> dist(cells_, cap);
    std::deque<long> q;
    for (long c = 0; c < cells_; ++c)
        if (mask[c]) {
            dist[c] = 0;
            q.push_back(c);
        }
    auto offs = neighbor_offsets(dim());
    while (!q.empty()) {
        long c = q.front();
        q.pop_front();
        if (dist[c] + 1 >= cap) continue;
        auto cc = coords(c);
        for (const auto& o : offs) {
            long idx = 0;
            bool ok = true;
            for (int i = 0; i < dim() && ok; ++i) {
                int k = cc[i] + o[i];
                if (k < 0 || k >= res_[i]) {
                    if (!periodic(i)) ok = false;
                    else k = (k + res_[i]) % res_[i];
                }
                idx += long(k) * stride_[i];
            }
            if (ok && dist[idx] > dist[c] + 1) {
                dist[idx] = dist[c] + 1;
                q.push_back(idx);
            }
        }
    }
    return dist;
}

std::vector<char> Grid::dilate(const std::vector<char>& mask, int k) const {
    auto d = distance(mask, k + 1);
    std::vector<char> out(cells_);
    for (long c = 0; c < cells_; ++c) out[c] = d[c] <= k;
    return out;
}

namespace {

// Breadth-first exploration of one leaf with unit-speed flows of linear Hamiltonians.
class LeafTracer {
public:
    LeafTracer(const PoissonSystem& sys, const Grid& grid, const FoliationOptions& opts)
        : sys_(sys), grid_(grid), opts_(opts), expanded_(grid.cells(), -1), touched_(grid.cells(), -1) {}

    bool singular(const Mat& B) const { return B.size() == 0 || B.cwiseAbs().maxCoeff() <= opts_.singular_tol; }

    template <class Touch>
    void explore(const Vec& z0, int stamp, Touch&& touch) {
        long c0 = grid_.cell_of(z0);
        if (c0 < 0) return;
        std::deque<Vec> queue;
        visit(c0, stamp, touch);
        expanded_[c0] = stamp;
        queue.push_back(z0);
        const double len = grid_.diagonal();
        const int n = grid_.dim();
        while (!queue.empty()) {
            Vec p = std::move(queue.front());
            queue.pop_front();
            Mat B;
            try {
                B = sys_.tensor->value(p);
            } catch (const DomainError&) {
                continue;
            }
            if (singular(B)) continue;
            Eigen::JacobiSVD<Mat> svd(B, Eigen::ComputeFullV);
            const Vec& s = svd.singularValues();
            for (int k = 0; k < n && s[k] > 1e-9 * s[0]; ++k) {
                Vec w = svd.matrixV().col(k) / s[k];
                for (int sign : {1, -1}) {
                    Vec z = p;
                    try {
                        flow(z, w, sign * len, [&](const Vec& zz) {
                            long c = grid_.cell_of(zz);
                            if (c < 0) return false;
                            visit(c, stamp, touch);
                            if (expanded_[c] != stamp) {
                                expanded_[c] = stamp;
                                queue.push_back(zz);
                            }
                            return true;
                        });
                    } catch (const DomainError&) {
                    }
                }
            }
        }
    }

    /// Follows z' = B(z) w for arc length |length| with step-doubling error control;
    /// each accepted point is handed to `at`, which returns false to stop.
    template <class At>
    void flow(Vec& z, const Vec& w, double length, At&& at) const {
        const double total = std::fabs(length), sign = length < 0 ? -1.0 : 1.0;
        const double piece = total / opts_.substeps, tol = 1e-3 * total;
        auto rk4 = [&](const Vec& y, double h) {
            Vec k1 = sys_.tensor->value(y) * w;
            Vec k2 = sys_.tensor->value(y + 0.5 * h * k1) * w;
            Vec k3 = sys_.tensor->value(y + 0.5 * h * k2) * w;
            Vec k4 = sys_.tensor->value(y + h * k3) * w;
            return Vec(y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
        };
        double travelled = 0.0, shrink = 1.0;
        for (int it = 0; it < 400 && travelled < total; ++it) {
            double speed = (sys_.tensor->value(z) * w).norm();
            if (!(speed > 0.0)) return;
            double h = sign * shrink * std::min(piece, total - travelled) / speed;
            Vec full = rk4(z, h);
            Vec half = rk4(rk4(z, 0.5 * h), 0.5 * h);
            if ((full - half).norm() > tol) {
                shrink *= 0.5;
                if (shrink < 1e-6) return;
                continue;
            }
            const double moved = (half - z).norm();
            travelled += moved;
            z = half;
            grid_.wrap(z);
            shrink = std::min(1.0, 2.0 * shrink);
            if (!at(z)) return;
            if (moved < 1e-4 * piece) return;  // creeping into the singular set
        }
    }

private:
    template <class Touch>
    void visit(long c, int stamp, Touch& touch) {
        if (touched_[c] == stamp) return;
        touched_[c] = stamp;
        touch(c);
    }

    const PoissonSystem& sys_;
    const Grid& grid_;
    FoliationOptions opts_;
    std::vector<int> expanded_, touched_;
};

}  // namespace

GridFoliation label_leaves(SystemPtr sys, const Box& box, const std::vector<int>& res, const FoliationOptions& opts) {
    if (!sys) throw PreconditionError("no system");
    if (int(res.size()) != sys->dim()) throw PreconditionError("resolution must list one value per variable");
    GridFoliation fol;
    fol.system = sys;
    fol.options = opts;
    fol.grid = Grid(box, res, sys->periods);
    const Grid& g = fol.grid;
    fol.label.assign(g.cells(), -1);
    LeafTracer tracer(*sys, g, opts);
    // rank-0 cells are singleton leaves
    std::vector<char> sing(g.cells(), 0);
    for (long c = 0; c < g.cells(); ++c) {
        try {
            sing[c] = tracer.singular(sys->tensor->value(g.center(c)));
        } catch (const DomainError&) {
            sing[c] = 1;
        }
        if (sing[c]) {
            fol.label[c] = fol.leaves();
            fol.footprint.push_back({c});
            fol.leaf_rank.push_back(0);
            fol.seed.push_back(g.center(c));
        }
    }
    for (long c = 0; c < g.cells(); ++c) {
        if (fol.label[c] >= 0) continue;
        const int L = fol.leaves();
        Vec z0 = g.center(c);
        fol.seed.push_back(z0);
        fol.leaf_rank.push_back(numerical_rank(sys->tensor->value(z0)));
        std::vector<long> fp;
        tracer.explore(z0, L, [&](long cell) {
            fp.push_back(cell);
            if (fol.label[cell] < 0) fol.label[cell] = L;
        });
        fol.label[c] = L;
        if (fp.empty()) fp.push_back(c);
        std::sort(fp.begin(), fp.end());
        fol.footprint.push_back(std::move(fp));
    }
    return fol;
}

std::vector<long> trace_leaf(const GridFoliation& fol, const Vec& z) {
    const Grid& g = fol.grid;
    long c = g.cell_of(z);
    if (c < 0) throw PreconditionError("point is outside the grid box");
    LeafTracer tracer(*fol.system, g, fol.options);
    std::vector<long> fp;
    Mat B = fol.system->tensor->value(z);
    if (tracer.singular(B)) return {c};
    tracer.explore(z, 0, [&](long cell) { fp.push_back(cell); });
    std::sort(fp.begin(), fp.end());
    return fp;
}

std::vector<int> t2_members(const GridFoliation& fol, const std::vector<char>& mask) {
    // dilated footprints meet iff the footprints are within two cells
    auto near = fol.grid.dilate(mask, 2);
    std::vector<int> members;
    for (int l = 0; l < fol.leaves(); ++l)
        for (long c : fol.footprint[l])
            if (near[c]) {
                members.push_back(l);
                break;
            }
    return members;
}

namespace {

std::vector<char> member_cells(const GridFoliation& fol, const std::vector<char>& base, const std::vector<int>& members) {
    std::vector<char> cells = base;
    for (int l : members)
        for (long c : fol.footprint[l]) cells[c] = 1;
    return cells;
}

}  // namespace

T2Report t2bar_approx(const GridFoliation& fol, const Vec& z, int jitter) {
    T2Report r;
    r.z = z;
    r.jitter = jitter;
    r.own_footprint = trace_leaf(fol, z);
    std::vector<char> own(fol.grid.cells(), 0);
    for (long c : r.own_footprint) own[c] = 1;
    r.member_leaves = t2_members(fol, own);
    r.cells = member_cells(fol, own, r.member_leaves);
    r.cell_count = std::count(r.cells.begin(), r.cells.end(), 1);
    auto second = member_cells(fol, r.cells, t2_members(fol, r.cells));
    auto dist = fol.grid.distance(r.cells, jitter + 1);
    for (long c = 0; c < fol.grid.cells(); ++c)
        if (second[c] && !r.cells[c]) {
            ++r.growth_cells;
            r.growth_distance = std::max(r.growth_distance, dist[c]);
        }
    r.idempotent = r.growth_distance <= jitter;
    return r;
}

namespace {

// Gauss-Newton with box clamping for g(z) = target inside one cell.
bool solve_in_cell(const PoissonSystem& sys, const std::vector<Expression>& fns, const Vec& target, Vec z,
                   const Vec& lo, const Vec& hi, int iters, double tol) {
    const int n = int(z.size()), k = int(fns.size());
    Vec r(k);
    Mat J(k, n);
    Vec g(n);
    for (int it = 0; it <= iters; ++it) {
        for (int a = 0; a < k; ++a) {
            r[a] = fns[a].grad({z.data(), std::size_t(n)}, sys.params(), g.data()) - target[a];
            J.row(a) = g.transpose();
        }
        if (r.norm() <= tol) return true;
        if (it == iters) break;
        Eigen::CompleteOrthogonalDecomposition<Mat> cod(J);
        cod.setThreshold(1e-12);
        Vec step = cod.solve(r);
        if (!step.allFinite()) return false;
        Vec zn = (z - step).cwiseMax(lo).cwiseMin(hi);
        if ((zn - z).norm() <= 1e-16 * (1.0 + z.norm())) return false;
        z = zn;
    }
    return false;
}

}  // namespace

IsolationReport level_set_isolation(const PoissonSystem& sys, const Vec& ze, const std::vector<Expression>& fns,
                                    const Grid& grid, const IsolationOptions& opts) {
    const int n = grid.dim(), k = int(fns.size());
    if (n != sys.dim()) throw PreconditionError("grid dimension does not match the system");
    if (k == 0) throw PreconditionError("isolation needs at least one function");
    IsolationReport rep;
    const Box& box = grid.box();
    rep.ball_radius = opts.ball_radius ? *opts.ball_radius : 0.25 * (box.hi - box.lo).minCoeff();
    std::span<const double> zes(ze.data(), ze.size());
    Vec target(k);
    for (int a = 0; a < k; ++a) target[a] = fns[a].eval(zes, sys.params());

    // curvature bound per function from sampled Hessians
    std::vector<double> M2(k, 0.0);
    for (const Vec& z : sample_box(box, opts.hessian_samples, opts.seed)) {
        for (int a = 0; a < k; ++a) {
            try {
                Vec g(n);
                Mat H(n, n);
                fns[a].hess({z.data(), std::size_t(n)}, sys.params(), g.data(), H.data());
                M2[a] = std::max(M2[a], H.norm());
            } catch (const DomainError&) {
            }
        }
    }
    const double rh = 0.5 * grid.diagonal();
    const double tol = opts.residual_tol * std::max(1.0, target.cwiseAbs().maxCoeff());
    rep.mask.assign(grid.cells(), 0);
    std::vector<long> cand;
    for (long c = 0; c < grid.cells(); ++c) {
        Vec z = grid.center(c);
        bool ok = true;
        try {
            Vec g(n);
            for (int a = 0; a < k && ok; ++a) {
                double v = fns[a].grad({z.data(), std::size_t(n)}, sys.params(), g.data());
                double bound = g.norm() * rh + 0.75 * M2[a] * rh * rh + 1e-12;
                if (std::fabs(v - target[a]) > bound) ok = false;
            }
        } catch (const DomainError&) {
            ok = false;
        }
        if (ok) cand.push_back(c);
    }
    rep.candidates = long(cand.size());
    std::vector<char> hit(cand.size(), 0);
    parallel_for(cand.size(), [&](std::size_t i) {
        const long c = cand[i];
        Vec mid = grid.center(c);
        Vec lo = mid - 0.5 * grid.step(), hi = mid + 0.5 * grid.step();
        std::vector<Vec> starts{mid};
        if ((ze.array() >= lo.array() - 1e-12).all() && (ze.array() <= hi.array() + 1e-12).all()) {
            hit[i] = 1;
            return;
        }
        if (n <= 4) {
            for (int m = 0; m < (1 << n); ++m) {
                Vec s = mid;
                for (int d = 0; d < n; ++d) s[d] += ((m >> d) & 1 ? 0.4 : -0.4) * grid.step()[d];
                starts.push_back(s);
            }
        } else {
            for (int d = 0; d < n; ++d)
                for (double sg : {-0.4, 0.4}) {
                    Vec s = mid;
                    s[d] += sg * grid.step()[d];
                    starts.push_back(s);
                }
        }
        for (const Vec& s : starts) {
            try {
                if (solve_in_cell(sys, fns, target, s, lo, hi, opts.gn_iterations, tol)) {
                    hit[i] = 1;
                    return;
                }
            } catch (const DomainError&) {
            }
        }
    });
    for (std::size_t i = 0; i < cand.size(); ++i)
        if (hit[i]) rep.mask[cand[i]] = 1;
    rep.marked = std::count(rep.mask.begin(), rep.mask.end(), 1);

    // 26-connected components (3^n - 1 in general)
    std::vector<int> comp(grid.cells(), -1);
    auto offs = neighbor_offsets(n);
    int ncomp = 0;
    std::vector<std::vector<long>> members;
    for (long c = 0; c < grid.cells(); ++c) {
        if (!rep.mask[c] || comp[c] >= 0) continue;
        std::vector<long> cells{c};
        comp[c] = ncomp;
        for (std::size_t q = 0; q < cells.size(); ++q) {
            auto cc = grid.coords(cells[q]);
            for (const auto& o : offs) {
                std::vector<int> nb(n);
                bool ok = true;
                for (int d = 0; d < n && ok; ++d) {
                    nb[d] = cc[d] + o[d];
                    if (nb[d] < 0 || nb[d] >= grid.res()[d]) {
                        if (!grid.periodic(d)) ok = false;
                        else nb[d] = (nb[d] + grid.res()[d]) % grid.res()[d];
                    }
                }
                if (!ok) continue;
                long idx = grid.index(nb);
                if (rep.mask[idx] && comp[idx] < 0) {
                    comp[idx] = ncomp;
                    cells.push_back(idx);
                }
            }
        }
        members.push_back(std::move(cells));
        ++ncomp;
    }
    // components touching z_e
    std::vector<char> own(ncomp, 0);
    Vec zw = ze;
    grid.wrap(zw);
    for (long c = 0; c < grid.cells(); ++c) {
        if (comp[c] < 0) continue;
        Vec mid = grid.center(c);
        Vec d = grid.displacement(mid, zw).cwiseAbs();
        if (((d.array() - 0.5 * grid.step().array()) <= 1e-12).all()) own[comp[c]] = 1;
    }
    auto in_ball = [&](long c) { return grid.displacement(ze, grid.center(c)).norm() <= rep.ball_radius; };
    std::vector<int> lo_idx(n, std::numeric_limits<int>::max()), hi_idx(n, std::numeric_limits<int>::min());
    for (int m = 0; m < ncomp; ++m) {
        bool touches = false;
        for (long c : members[m]) {
            if (own[m] && !in_ball(c)) rep.leaves_ball = true;
            if (in_ball(c)) touches = true;
        }
        if (own[m]) {
            rep.component_size += long(members[m].size());
            for (long c : members[m]) {
                auto cc = grid.coords(c);
                for (int d = 0; d < n; ++d) {
                    lo_idx[d] = std::min(lo_idx[d], cc[d]);
                    hi_idx[d] = std::max(hi_idx[d], cc[d]);
                }
            }
        } else if (touches) {
            ++rep.other_components_in_ball;
        }
    }
    for (int d = 0; d < n; ++d)
        if (rep.component_size > 0) rep.component_diameter = std::max(rep.component_diameter, hi_idx[d] - lo_idx[d] + 1);
    if (rep.leaves_ball) rep.verdict = Isolation::NotIsolatedAtScale;
    else if (rep.component_size > 0 && rep.component_diameter <= 3 && rep.other_components_in_ball == 0)
        rep.verdict = Isolation::IsolatedAtScale;
    else rep.verdict = Isolation::IndeterminateAtScale;
    return rep;
}

std::vector<char> level_cells(const PoissonSystem& sys, const Grid& grid, const std::vector<Expression>& fns,
                              const Vec& z) {
    const int n = grid.dim();
    std::vector<char> out(grid.cells(), 1);
    if (fns.empty()) return out;
    // values at the (res+1)^n corners
    std::vector<int> cres(n);
    long ncorner = 1;
    for (int d = 0; d < n; ++d) {
        cres[d] = grid.res()[d] + 1;
        ncorner *= cres[d];
    }
    auto corner_coords = [&](long idx) {
        std::vector<int> c(n);
        for (int d = n - 1; d >= 0; --d) {
            c[d] = int(idx % cres[d]);
            idx /= cres[d];
        }
        return c;
    };
    auto corner_index = [&](const std::vector<int>& c) {
        long idx = 0;
        for (int d = 0; d < n; ++d) idx = idx * cres[d] + c[d];
        return idx;
    };
    for (const auto& f : fns) {
        const double fz = f.eval({z.data(), std::size_t(z.size())}, sys.params());
        std::vector<double> val(ncorner);
        for (long i = 0; i < ncorner; ++i) {
            auto c = corner_coords(i);
            Vec p(n);
            for (int d = 0; d < n; ++d) p[d] = grid.box().lo[d] + c[d] * grid.step()[d];
            try {
                val[i] = f.eval({p.data(), std::size_t(n)}, sys.params()) - fz;
            } catch (const DomainError&) {
                val[i] = std::numeric_limits<double>::quiet_NaN();
            }
        }
        for (long cell = 0; cell < grid.cells(); ++cell) {
            if (!out[cell]) continue;
            auto cc = grid.coords(cell);
            double mn = std::numeric_limits<double>::infinity(), mx = -mn;
            bool bad = false;
            for (int m = 0; m < (1 << n); ++m) {
                std::vector<int> k(n);
                for (int d = 0; d < n; ++d) k[d] = cc[d] + ((m >> d) & 1);
                double v = val[corner_index(k)];
                if (std::isnan(v)) bad = true;
                mn = std::min(mn, v);
                mx = std::max(mx, v);
            }
            try {
                Vec mid = grid.center(cell);
                double v = f.eval({mid.data(), std::size_t(n)}, sys.params()) - fz;
                mn = std::min(mn, v);
                mx = std::max(mx, v);
            } catch (const DomainError&) {
                bad = true;
            }
            out[cell] = !bad && mn <= 0.0 && mx >= 0.0;
        }
    }
    return out;
}

bool same_leaf(const PoissonSystem& sys, const Grid& grid, const Vec& z1, const Vec& z2, int max_iter) {
    Vec z = z1;
    const double tol = 1e-8 * (1.0 + z2.norm());
    const double max_step = grid.diagonal();
    double prev = grid.displacement(z, z2).norm();
    int stalls = 0;
    for (int it = 0; it < max_iter; ++it) {
        Vec d = grid.displacement(z, z2);
        double dist = d.norm();
        if (dist <= tol) return true;
        Mat B = sys.tensor->value(z);
        Eigen::CompleteOrthogonalDecomposition<Mat> cod(B);
        cod.setThreshold(1e-9);
        Vec w = cod.solve(d);
        Vec v = B * w;
        if (!(v.norm() > 0.0)) return false;
        if (v.norm() > max_step) w *= max_step / v.norm();
        const int sub = 8;
        const double h = 1.0 / sub;
        for (int s = 0; s < sub; ++s) {
            Vec k1 = sys.tensor->value(z) * w;
            Vec k2 = sys.tensor->value(z + 0.5 * h * k1) * w;
            Vec k3 = sys.tensor->value(z + 0.5 * h * k2) * w;
            Vec k4 = sys.tensor->value(z + h * k3) * w;
            z += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        grid.wrap(z);
        double now = grid.displacement(z, z2).norm();
        stalls = now > 0.9 * prev ? stalls + 1 : 0;
        if (stalls >= 3) return false;
        prev = now;
    }
    return grid.displacement(z, z2).norm() <= tol;
}

SeparationReport separation_check(const GridFoliation& fol, const std::vector<Expression>& casimirs,
                                  const std::vector<Vec>& points, const SeparationOptions& opts) {
    const PoissonSystem& sys = *fol.system;
    const Grid& grid = fol.grid;
    const int n = grid.dim(), k = int(casimirs.size());
    SeparationReport rep;

    double bmax = 0.0;
    int rmax = 0;
    for (const Vec& z : sample_box(grid.box(), 400, opts.seed)) {
        try {
            Mat B = sys.tensor->value(z);
            bmax = std::max(bmax, B.norm());
            rmax = std::max(rmax, numerical_rank(B));
        } catch (const DomainError&) {
        }
    }
    auto regular = [&](const Vec& z) {
        Mat B = sys.tensor->value(z);
        return rmax > 0 && numerical_rank(B) == rmax && B.norm() >= opts.regular_fraction * bmax;
    };
    auto cvals = [&](const Vec& z) {
        Vec c(k);
        for (int a = 0; a < k; ++a) c[a] = casimirs[a].eval({z.data(), std::size_t(n)}, sys.params());
        return c;
    };
    QuasiRandom q1(n, opts.seed), q2(n, opts.seed + 1);
    const Box& box = grid.box();
    int attempts = 0;
    while (rep.pairs_tested < opts.pairs && attempts < 20 * opts.pairs) {
        ++attempts;
        Vec z1 = box.lo + (box.hi - box.lo).cwiseProduct(q1.next());
        Vec u = 2.0 * q2.next().array() - 1.0;
        if (u.norm() < 1e-6) continue;
        Vec z2 = z1 + grid.diagonal() * u.normalized();
        try {
            if (!regular(z1)) continue;
            Vec target = cvals(z1);
            bool ok = true;
            // Gauss-Newton projection onto the Casimir level of z1
            for (int it = 0; it < 50 && k > 0; ++it) {
                Vec r = cvals(z2) - target;
                if (r.norm() <= 1e-12 * (1.0 + target.norm())) break;
                Mat J(k, n);
                for (int a = 0; a < k; ++a) J.row(a) = casimirs[a].grad({z2.data(), std::size_t(n)}, sys.params()).transpose();
                Eigen::CompleteOrthogonalDecomposition<Mat> cod(J);
                z2 -= cod.solve(r);
                if (it == 49) ok = false;
            }
            grid.wrap(z2);
            if (!ok || grid.cell_of(z2) < 0 || !regular(z2)) continue;
            ++rep.pairs_tested;
            if (same_leaf(sys, grid, z1, z2)) ++rep.pairs_same_leaf;
            else ++rep.pairs_distinct;
        } catch (const DomainError&) {
        }
    }
    rep.separates = rep.pairs_tested > 0 && rep.pairs_distinct == 0;

    for (const Vec& z : points) {
        InclusionCheck ic;
        ic.z = z;
        T2Report t2 = t2bar_approx(fol, z, opts.jitter);
        auto lv = level_cells(sys, grid, casimirs, z);
        ic.t2_cells = t2.cell_count;
        ic.level_cells = std::count(lv.begin(), lv.end(), 1);
        auto dl = grid.distance(lv, opts.jitter + 1);
        auto dt = grid.distance(t2.cells, opts.jitter + 2);
        bool incl = true, t_in_l1 = true, l_in_t1 = true, far = false;
        for (long c = 0; c < grid.cells(); ++c) {
            if (t2.cells[c]) {
                if (dl[c] > opts.jitter) incl = false;
                if (dl[c] > 1) t_in_l1 = false;
            }
            if (lv[c]) {
                if (dt[c] > 1) l_in_t1 = false;
                if (dt[c] > opts.jitter) far = true;
            }
        }
        ic.inclusion = incl;
        ic.equality = t_in_l1 && l_in_t1;
        ic.strict = far;
        rep.inclusions.push_back(ic);
    }
    return rep;
}

void write_cells_csv(const GridFoliation& fol, const T2Report* t2, std::ostream& os) {
    const PoissonSystem& sys = *fol.system;
    for (const auto& v : sys.variables) os << v << ',';
    os << "leaf,t2\n";
    char buf[40];
    for (long c = 0; c < fol.grid.cells(); ++c) {
        Vec z = fol.grid.center(c);
        for (int i = 0; i < z.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", z[i]);
            os << buf << ',';
        }
        os << fol.label[c] << ',';
        if (t2) os << int(t2->cells[c]);
        os << '\n';
    }
}

}  // namespace pstab
