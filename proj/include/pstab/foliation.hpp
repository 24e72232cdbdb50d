#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pstab/poisson.hpp"

namespace pstab {

/// Uniform cell grid over a box; axes listed in `periods` wrap around.
class Grid {
public:
    Grid() = default;
    Grid(Box box, std::vector<int> res, std::map<int, double> periods = {});

    int dim() const { return int(res_.size()); }
    long cells() const { return cells_; }
    const Box& box() const { return box_; }
    const std::vector<int>& res() const { return res_; }
    const Vec& step() const { return h_; }
    double diagonal() const { return h_.norm(); }
    bool periodic(int axis) const { return periods_.count(axis) > 0; }

    long index(const std::vector<int>& ijk) const;
    std::vector<int> coords(long idx) const;
    Vec center(long idx) const;
    /// Cell containing z (after wrapping periodic axes), or -1 outside the box.
    long cell_of(const Vec& z) const;
    /// Maps periodic coordinates back into the box.
    void wrap(Vec& z) const;
    /// Shortest displacement b - a, taking periodic axes into account.
    Vec displacement(const Vec& a, const Vec& b) const;
    /// Cells within Chebyshev distance k of the marked set.
    std::vector<char> dilate(const std::vector<char>& mask, int k) const;
    /// Chebyshev cell distance to the marked set, capped at cap.
    std::vector<int> distance(const std::vector<char>& mask, int cap) const;

private:
    Box box_;
    std::vector<int> res_;
    Vec h_;
    long cells_ = 0;
    std::map<int, double> periods_;
    std::vector<long> stride_;
};

struct FoliationOptions {
    int substeps = 8;
    double singular_tol = 1e-12;
};

struct GridFoliation {
    SystemPtr system;
    Grid grid;
    FoliationOptions options;
    std::vector<int> label;                   // cell -> leaf id (first visitor)
    std::vector<std::vector<long>> footprint;  // leaf -> sorted cells touched by its trace
    std::vector<int> leaf_rank;               // rank of B at the leaf seed
    std::vector<Vec> seed;
    int leaves() const { return int(footprint.size()); }
};

GridFoliation label_leaves(SystemPtr sys, const Box& box, const std::vector<int>& res,
                           const FoliationOptions& opts = {});

/// Sorted cells touched by the leaf through z (a single cell when B(z) vanishes).
std::vector<long> trace_leaf(const GridFoliation& fol, const Vec& z);

struct T2Report {
    Vec z;
    std::vector<long> own_footprint;
    std::vector<int> member_leaves;
    std::vector<char> cells;   // membership per grid cell
    long cell_count = 0;
    bool idempotent = false;
    long growth_cells = 0;     // cells added by a second application
    int growth_distance = 0;   // max cell distance of the added cells
    int jitter = 3;
};

/// Leaves whose one-cell dilated footprint meets the dilated footprint set.
std::vector<int> t2_members(const GridFoliation& fol, const std::vector<char>& footprint_mask);
T2Report t2bar_approx(const GridFoliation& fol, const Vec& z, int jitter = 3);

enum class Isolation { IsolatedAtScale, NotIsolatedAtScale, IndeterminateAtScale };
const char* to_string(Isolation v);

struct IsolationOptions {
    std::optional<double> ball_radius;  // default: quarter of the smallest box side
    double residual_tol = 1e-10;
    int gn_iterations = 40;
    int hessian_samples = 200;
    std::uint64_t seed = kDefaultSeed;
};

struct IsolationReport {
    Isolation verdict = Isolation::IndeterminateAtScale;
    long candidates = 0;
    long marked = 0;
    long component_size = 0;
    int component_diameter = 0;   // in cells
    int other_components_in_ball = 0;
    bool leaves_ball = false;
    double ball_radius = 0.0;
    std::vector<char> mask;
};

IsolationReport level_set_isolation(const PoissonSystem& sys, const Vec& ze, const std::vector<Expression>& functions,
                                    const Grid& grid, const IsolationOptions& opts = {});

/// Cells where every C - C(z) changes sign over the cell corners; all cells for an empty list.
std::vector<char> level_cells(const PoissonSystem& sys, const Grid& grid, const std::vector<Expression>& functions,
                              const Vec& z);

/// Connects z1 to z2 along Hamiltonian flows of linear functions; true if z2 is reached.
bool same_leaf(const PoissonSystem& sys, const Grid& grid, const Vec& z1, const Vec& z2, int max_iter = 100);

struct InclusionCheck {
    Vec z;
    long t2_cells = 0;
    long level_cells = 0;
    bool inclusion = false;  // T2 within jitter of the level cells
    bool equality = false;   // both directions within one cell
    bool strict = false;     // level cells reach beyond one cell of T2
};

struct SeparationReport {
    int pairs_tested = 0;
    int pairs_same_leaf = 0;
    int pairs_distinct = 0;  // regular pairs with equal Casimir values on different leaves
    bool separates = false;
    std::vector<InclusionCheck> inclusions;
    bool openness_checked = false;
};

struct SeparationOptions {
    int pairs = 200;
    double regular_fraction = 0.05;  // |B| relative to its sampled maximum
    int jitter = 3;
    std::uint64_t seed = kDefaultSeed;
};

SeparationReport separation_check(const GridFoliation& fol, const std::vector<Expression>& casimirs,
                                  const std::vector<Vec>& points, const SeparationOptions& opts = {});

/// Columns: cell center coordinates, leaf, t2 (0/1 or empty when no report).
void write_cells_csv(const GridFoliation& fol, const T2Report* t2, std::ostream& os);

}  // namespace pstab
