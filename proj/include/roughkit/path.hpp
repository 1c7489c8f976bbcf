#pragma once

#include <span>
#include <vector>

#include "roughkit/algebra.hpp"

namespace roughkit {

// Piecewise-linear path on [0,1]: N times, N x dim values (row-major).
struct PiecewiseLinearPath {
    std::vector<double> times;
    std::vector<double> values;
    int dim = 0;

    int n_points() const { return static_cast<int>(times.size()); }
    std::span<const double> value(int k) const {
        return {values.data() + static_cast<std::size_t>(k) * dim,
                static_cast<std::size_t>(dim)};
    }
    // linear interpolation, t clamped to [times.front(), times.back()]
    void value_at(double t, std::span<double> out) const;

    void validate() const;  // strictly increasing times, N >= 2, finite values
};

// Grid of group elements; increment(i,j) = points[i]^-1 (x) points[j]
// satisfies Chen multiplicativity by construction.
struct LiftedPath {
    std::vector<double> times;
    std::vector<GroupElement> points;
    int dim = 0;
    int level = 2;

    int n_points() const { return static_cast<int>(times.size()); }
    GroupElement increment(int i, int j) const;
};

// restriction of `samples` to the subdivision D; every point of D must lie
// on the sample grid (prevents silent resampling)
PiecewiseLinearPath linear_interpolant(const PiecewiseLinearPath& samples,
                                       std::span<const double> D);

// exact refinement onto a superset grid (grid must contain all breakpoints)
PiecewiseLinearPath refine(const PiecewiseLinearPath& x, std::span<const double> grid);

// dyadic grid {k 2^-level_exp} intersected with [0,1]
std::vector<double> dyadic_times(int level_exp);

// canonical lift: Chen product of segment exponentials, points[0] = exp(x_0)
LiftedPath signature_lift(const PiecewiseLinearPath& x, int level);

// component-wise stacking on the union grid (refinement is exact)
PiecewiseLinearPath concat_oplus(const PiecewiseLinearPath& x,
                                 const PiecewiseLinearPath& y);

// lift of x_n (+) y_ref over R^{2d}
LiftedPath s_prime_concat(const PiecewiseLinearPath& x_n,
                          const PiecewiseLinearPath& y_ref, int level);

// diagonal pair lift
LiftedPath s_double_prime(const PiecewiseLinearPath& y_ref, int level);
// for an already-lifted reference: every level-1/2/3 block duplicated
LiftedPath s_double_prime(const LiftedPath& y);

// level-2 pair lift against a (possibly genuinely rough) level-2 reference.
// Blocks per increment: int x(x)dx exact, int y1(x)dx trapezoidal on y.times,
// int x(x)dy1 by parts, y-diagonal copied from y.
LiftedPath s_prime_level2(const PiecewiseLinearPath& x, const LiftedPath& y);

// T_{-h}(y) = Minus(S'(h, y)), level 2
LiftedPath translate(const PiecewiseLinearPath& h, const LiftedPath& y);

// t -> exp(t [e1,e2]); geometric level-2 rough path with zero level-1 part
LiftedPath pure_area_path(std::span<const double> times);

// x - y on the union grid (handy for Minus/translate oracles)
PiecewiseLinearPath path_difference(const PiecewiseLinearPath& x,
                                    const PiecewiseLinearPath& y);

}  // namespace roughkit
