#include "roughkit/path.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

namespace roughkit {

namespace {

// union of two strictly increasing grids, exact comparisons
std::vector<double> merge_grids(std::span<const double> a, std::span<const double> b) {
    std::vector<double> out;
    out.reserve(a.size() + b.size());
    std::size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
        if (j == b.size() || (i < a.size() && a[i] < b[j]))
            out.push_back(a[i++]);
        else if (i == a.size() || b[j] < a[i])
            out.push_back(b[j++]);
        else {
            out.push_back(a[i]);
            ++i;
            ++j;
        }
    }
    return out;
}

bool contains_time(std::span<const double> grid, double t) {
    auto it = std::lower_bound(grid.begin(), grid.end(), t);
    return it != grid.end() && *it == t;
}

}  // namespace

void PiecewiseLinearPath::validate() const {
    if (dim < 1) throw UsageError("path dim must be >= 1");
    if (times.size() < 2) throw UsageError("path needs at least 2 points");
    if (values.size() != times.size() * static_cast<std::size_t>(dim))
        throw UsageError("path values shape mismatch");
    for (std::size_t k = 1; k < times.size(); ++k)
        if (!(times[k] > times[k - 1]))
            throw UsageError("path times must be strictly increasing");
    for (double v : values)
        if (!std::isfinite(v)) throw UsageError("path has non-finite values");
}

void PiecewiseLinearPath::value_at(double t, std::span<double> out) const {
    if (t <= times.front()) {
        auto v = value(0);
        std::copy(v.begin(), v.end(), out.begin());
        return;
    }
    if (t >= times.back()) {
        auto v = value(n_points() - 1);
        std::copy(v.begin(), v.end(), out.begin());
        return;
    }
    auto it = std::upper_bound(times.begin(), times.end(), t);
    const int k = static_cast<int>(it - times.begin()) - 1;
    const double w = (t - times[k]) / (times[k + 1] - times[k]);
    auto a = value(k);
    auto b = value(k + 1);
    for (int i = 0; i < dim; ++i) out[i] = a[i] + w * (b[i] - a[i]);
}

GroupElement LiftedPath::increment(int i, int j) const {
    if (i == j) return GroupElement::identity(dim, level);
    return group_multiply(group_inverse(points[i]), points[j]);
}

PiecewiseLinearPath linear_interpolant(const PiecewiseLinearPath& samples,
                                       std::span<const double> D) {
    samples.validate();
    if (D.size() < 2) throw UsageError("subdivision needs at least 2 points");
    PiecewiseLinearPath out;
    out.dim = samples.dim;
    out.times.reserve(D.size());
    out.values.reserve(D.size() * samples.dim);
    for (double t : D) {
        auto it = std::lower_bound(samples.times.begin(), samples.times.end(), t);
        if (it == samples.times.end() || *it != t)
            throw UsageError("subdivision point not on the sample grid");
        const int k = static_cast<int>(it - samples.times.begin());
        out.times.push_back(t);
        auto v = samples.value(k);
        out.values.insert(out.values.end(), v.begin(), v.end());
    }
    out.validate();
    return out;
}

PiecewiseLinearPath refine(const PiecewiseLinearPath& x, std::span<const double> grid) {
    for (double t : x.times)
        if (!contains_time(grid, t))
            throw UsageError("refinement grid misses a breakpoint");
    PiecewiseLinearPath out;
    out.dim = x.dim;
    out.times.assign(grid.begin(), grid.end());
    out.values.resize(grid.size() * static_cast<std::size_t>(x.dim));
    for (std::size_t k = 0; k < grid.size(); ++k)
        x.value_at(grid[k], {out.values.data() + k * x.dim, static_cast<std::size_t>(x.dim)});
    out.validate();
    return out;
}

std::vector<double> dyadic_times(int level_exp) {
    if (level_exp < 0 || level_exp > 30) throw UsageError("bad dyadic level");
    const int n = 1 << level_exp;
    std::vector<double> t(static_cast<std::size_t>(n) + 1);
    const double h = std::ldexp(1.0, -level_exp);
    for (int k = 0; k <= n; ++k) t[k] = k * h;
    t.back() = 1.0;
    return t;
}

LiftedPath signature_lift(const PiecewiseLinearPath& x, int level) {
    x.validate();
    if (level != 2 && level != 3) throw UsageError("lift level must be 2 or 3");
    LiftedPath out;
    out.dim = x.dim;
    out.level = level;
    out.times = x.times;
    out.points.reserve(x.times.size());
    out.points.push_back(exp_level1(x.value(0), level));
    std::vector<double> delta(static_cast<std::size_t>(x.dim));
    for (int k = 1; k < x.n_points(); ++k) {
        auto a = x.value(k - 1);
        auto b = x.value(k);
        for (int i = 0; i < x.dim; ++i) delta[i] = b[i] - a[i];
        out.points.push_back(group_multiply(out.points.back(), exp_level1(delta, level)));
    }
    return out;
}

PiecewiseLinearPath concat_oplus(const PiecewiseLinearPath& x,
                                 const PiecewiseLinearPath& y) {
    x.validate();
    y.validate();
    if (x.times.front() != y.times.front() || x.times.back() != y.times.back())
        throw UsageError("concat_oplus: time spans differ");
    const std::vector<double> grid = merge_grids(x.times, y.times);
    const PiecewiseLinearPath xr = refine(x, grid);
    const PiecewiseLinearPath yr = refine(y, grid);
    PiecewiseLinearPath out;
    out.dim = x.dim + y.dim;
    out.times = grid;
    out.values.resize(grid.size() * static_cast<std::size_t>(out.dim));
    for (std::size_t k = 0; k < grid.size(); ++k) {
        auto a = xr.value(static_cast<int>(k));
        auto b = yr.value(static_cast<int>(k));
        double* row = out.values.data() + k * out.dim;
        std::copy(a.begin(), a.end(), row);
        std::copy(b.begin(), b.end(), row + x.dim);
    }
    return out;
}

LiftedPath s_prime_concat(const PiecewiseLinearPath& x_n,
                          const PiecewiseLinearPath& y_ref, int level) {
    if (x_n.dim != y_ref.dim) throw UsageError("s_prime_concat: dims differ");
    return signature_lift(concat_oplus(x_n, y_ref), level);
}

LiftedPath s_double_prime(const PiecewiseLinearPath& y_ref, int level) {
    return s_prime_concat(y_ref, y_ref, level);
}

LiftedPath s_double_prime(const LiftedPath& y) {
    // image of y under the diagonal embedding x -> (x,x); a homomorphism,
    // so increments carry over block-duplicated as well
    const int d = y.dim;
    LiftedPath out;
    out.dim = 2 * d;
    out.level = y.level;
    out.times = y.times;
    out.points.reserve(y.points.size());
    for (const GroupElement& g : y.points) {
        TruncatedTensor t = TruncatedTensor::zero(2 * d, y.level);
        t.c0 = 1.0;
        for (int i = 0; i < d; ++i) {
            t.c1[i] = g.t.c1[i];
            t.c1[d + i] = g.t.c1[i];
        }
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                const double v = g.t.at2(i, j);
                t.at2(i, j) = v;
                t.at2(i, d + j) = v;
                t.at2(d + i, j) = v;
                t.at2(d + i, d + j) = v;
            }
        if (y.level == 3) {
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j)
                    for (int k = 0; k < d; ++k) {
                        const double v = g.t.at3(i, j, k);
                        for (int bi = 0; bi < 2; ++bi)
                            for (int bj = 0; bj < 2; ++bj)
                                for (int bk = 0; bk < 2; ++bk)
                                    t.at3(bi * d + i, bj * d + j, bk * d + k) = v;
                    }
        }
        out.points.emplace_back(std::move(t));
    }
    return out;
}

LiftedPath s_prime_level2(const PiecewiseLinearPath& x, const LiftedPath& y) {
    if (y.level != 2) throw UsageError("s_prime_level2 supports level-2 references only");
    if (x.dim != y.dim) throw UsageError("s_prime_level2: dims differ");
    PiecewiseLinearPath xr = (x.times == y.times) ? x : refine(x, y.times);

    const int d = x.dim;
    const int n = static_cast<int>(y.times.size());
    const std::size_t dd = static_cast<std::size_t>(d) * d;

    // increment-from-base data of y
    std::vector<double> y1(static_cast<std::size_t>(n) * d);        // y^1(0, t_k)
    std::vector<double> y2(static_cast<std::size_t>(n) * dd, 0.0);  // y^2(0, t_k)
    {
        const GroupElement base_inv = group_inverse(y.points[0]);
        for (int k = 0; k < n; ++k) {
            const GroupElement inc = group_multiply(base_inv, y.points[k]);
            std::copy(inc.t.c1.begin(), inc.t.c1.end(), y1.begin() + static_cast<std::size_t>(k) * d);
            std::copy(inc.t.c2.begin(), inc.t.c2.end(), y2.begin() + static_cast<std::size_t>(k) * dd);
        }
    }

    // cumulative blocks relative to the base point
    std::vector<double> xx(dd, 0.0), yx(dd, 0.0), ibp(dd, 0.0);
    auto x0 = xr.value(0);

    LiftedPath out;
    out.dim = 2 * d;
    out.level = 2;
    out.times = y.times;
    out.points.reserve(static_cast<std::size_t>(n));

    // base point exp((x_0, y^1_0))
    TruncatedTensor base_arg = TruncatedTensor::zero(2 * d, 2);
    for (int i = 0; i < d; ++i) {
        base_arg.c1[i] = x0[i];
        base_arg.c1[d + i] = y.points[0].t.c1[i];
    }
    const GroupElement base = exp_trunc(base_arg);

    std::vector<double> dx(static_cast<std::size_t>(d));
    std::vector<double> xbar(static_cast<std::size_t>(d)), ybar(static_cast<std::size_t>(d));
    for (int k = 0; k < n; ++k) {
        if (k > 0) {
            auto a = xr.value(k - 1);
            auto b = xr.value(k);
            const double* ya = y1.data() + static_cast<std::size_t>(k - 1) * d;
            const double* yb = y1.data() + static_cast<std::size_t>(k) * d;
            for (int i = 0; i < d; ++i) {
                dx[i] = b[i] - a[i];
                xbar[i] = 0.5 * (a[i] + b[i]) - x0[i];
                ybar[i] = 0.5 * (ya[i] + yb[i]);
            }
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) {
                    xx[static_cast<std::size_t>(i) * d + j] += xbar[i] * dx[j];   // int x (x) dx, exact
                    yx[static_cast<std::size_t>(i) * d + j] += ybar[i] * dx[j];   // int y1 (x) dx, trapezoid
                    ibp[static_cast<std::size_t>(i) * d + j] += dx[i] * ybar[j];  // int dx (x) y1
                }
        }
        TruncatedTensor inc = TruncatedTensor::zero(2 * d, 2);
        inc.c0 = 1.0;
        auto xv = xr.value(k);
        const double* yv = y1.data() + static_cast<std::size_t>(k) * d;
        for (int i = 0; i < d; ++i) {
            inc.c1[i] = xv[i] - x0[i];
            inc.c1[d + i] = yv[i];
        }
        const double* y2k = y2.data() + static_cast<std::size_t>(k) * dd;
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                const std::size_t ij = static_cast<std::size_t>(i) * d + j;
                inc.at2(i, j) = xx[ij];
                // int x (x) dy1 by integration by parts
                inc.at2(i, d + j) = (xv[i] - x0[i]) * yv[j] - ibp[ij];
                inc.at2(d + i, j) = yx[ij];
                inc.at2(d + i, d + j) = y2k[ij];  // y's own level-2 data, exact
            }
        out.points.push_back(group_multiply(base, GroupElement(std::move(inc))));
    }
    return out;
}

LiftedPath translate(const PiecewiseLinearPath& h, const LiftedPath& y) {
    const LiftedPath joint = s_prime_level2(h, y);
    LiftedPath out;
    out.dim = y.dim;
    out.level = 2;
    out.times = joint.times;
    out.points.reserve(joint.points.size());
    for (const GroupElement& g : joint.points) out.points.push_back(minus_map(g));
    return out;
}

LiftedPath pure_area_path(std::span<const double> times) {
    if (times.size() < 2) throw UsageError("pure_area_path needs at least 2 times");
    LiftedPath out;
    out.dim = 2;
    out.level = 2;
    out.times.assign(times.begin(), times.end());
    out.points.reserve(times.size());
    for (double t : times) {
        TruncatedTensor g = TruncatedTensor::zero(2, 2);
        g.c0 = 1.0;
        g.at2(0, 1) = t;
        g.at2(1, 0) = -t;
        out.points.emplace_back(std::move(g));
    }
    return out;
}

PiecewiseLinearPath path_difference(const PiecewiseLinearPath& x,
                                    const PiecewiseLinearPath& y) {
    if (x.dim != y.dim) throw UsageError("path_difference: dims differ");
    const std::vector<double> grid = merge_grids(x.times, y.times);
    const PiecewiseLinearPath xr = refine(x, grid);
    const PiecewiseLinearPath yr = refine(y, grid);
    PiecewiseLinearPath out = xr;
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] -= yr.values[i];
    return out;
}

}  // namespace roughkit
