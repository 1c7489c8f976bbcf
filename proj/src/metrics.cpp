#include "roughkit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

namespace roughkit {

namespace {

template <typename F>
void for_each_pair(int n, PairSet pairs, F&& fn) {
    if (pairs == PairSet::All) {
        for (int i = 0; i < n - 1; ++i)
            for (int j = i + 1; j < n; ++j) fn(i, j);
    } else {
        for (int i = 0; i < n - 1; ++i)
            for (int span = 1; i + span < n; span <<= 1) fn(i, i + span);
    }
}

double frob(const double* a, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * a[i];
    return std::sqrt(s);
}

}  // namespace

MetricReport holder_distance(const LiftedPath& x, const LiftedPath& y, double p,
                             PairSet pairs, const Control& control) {
    if (x.dim != y.dim || x.level != y.level)
        throw UsageError("holder_distance: dim/level mismatch");
    if (x.times != y.times)
        throw UsageError("holder_distance: time grids differ (refine first)");
    if (!(p > 1.0)) throw UsageError("holder_distance requires p > 1");

    const int n = x.n_points();
    std::vector<GroupElement> xinv, yinv;
    xinv.reserve(n);
    yinv.reserve(n);
    for (int i = 0; i < n; ++i) {
        xinv.push_back(group_inverse(x.points[i]));
        yinv.push_back(group_inverse(y.points[i]));
    }

    MetricReport rep;
    rep.basepoint_term = group_distance(x.points[0], y.points[0]);
    double sup = 0.0;
    int wi = 0, wj = 1;
    const double inv_p = 1.0 / p;
    for_each_pair(n, pairs, [&](int i, int j) {
        const GroupElement gx = group_multiply(xinv[i], x.points[j]);
        const GroupElement gy = group_multiply(yinv[i], y.points[j]);
        const double w = control.omega(x.times[i], x.times[j]);
        const double r = group_distance(gx, gy) / std::pow(w, inv_p);
        if (r > sup) {
            sup = r;
            wi = i;
            wj = j;
        }
    });
    rep.distance = rep.basepoint_term + sup;
    rep.s = x.times[wi];
    rep.t = x.times[wj];
    return rep;
}

double p_variation_norm(const LiftedPath& x, double p) {
    if (!(p >= 1.0)) throw UsageError("p_variation_norm requires p >= 1");
    const int n = x.n_points();
    std::vector<GroupElement> inv;
    inv.reserve(n);
    for (int i = 0; i < n; ++i) inv.push_back(group_inverse(x.points[i]));

    // V(j) = max_{i<j} V(i) + ||x_{t_i,t_j}||^p
    std::vector<double> V(static_cast<std::size_t>(n), 0.0);
    for (int j = 1; j < n; ++j) {
        double best = -1.0;
        for (int i = 0; i < j; ++i) {
            const double w =
                std::pow(homogeneous_norm(group_multiply(inv[i], x.points[j])), p);
            best = std::max(best, V[i] + w);
        }
        V[j] = best;
    }
    return std::pow(V[n - 1], 1.0 / p);
}

double good_sequence_defect(const PiecewiseLinearPath& x_n,
                            const PiecewiseLinearPath& x_ref, double p, int level,
                            PairSet pairs) {
    if (x_n.dim != x_ref.dim) throw UsageError("good_sequence_defect: dims differ");
    const LiftedPath sp = s_prime_concat(x_n, x_ref, level);
    const LiftedPath spp = s_double_prime(x_ref, level);
    return holder_distance(sp, spp, p, pairs).distance;
}

double good_sequence_defect(const PiecewiseLinearPath& x_n, const LiftedPath& x_ref,
                            double p, PairSet pairs) {
    const LiftedPath sp = s_prime_level2(x_n, x_ref);
    const LiftedPath spp = s_double_prime(x_ref);
    return holder_distance(sp, spp, p, pairs).distance;
}

Good2Terms good2_terms(const PiecewiseLinearPath& x_n, const LiftedPath& x_ref,
                       double p, PairSet pairs) {
    if (x_ref.level != 2) throw UsageError("good2_terms needs a level-2 reference");
    if (x_n.dim != x_ref.dim) throw UsageError("good2_terms: dims differ");
    const PiecewiseLinearPath xr =
        (x_n.times == x_ref.times) ? x_n : refine(x_n, x_ref.times);

    const int d = x_ref.dim;
    const int n = x_ref.n_points();
    const std::size_t dd = static_cast<std::size_t>(d) * d;

    // cumulative data from the common base point
    std::vector<double> xn1(static_cast<std::size_t>(n) * d);   // x_n(0,t)
    std::vector<double> y1(static_cast<std::size_t>(n) * d);    // x^1(0,t)
    std::vector<double> y2(static_cast<std::size_t>(n) * dd);   // x^2(0,t)
    std::vector<double> A(static_cast<std::size_t>(n) * dd, 0.0);  // int x_n (x) dx_n
    std::vector<double> B(static_cast<std::size_t>(n) * dd, 0.0);  // int x^1 (x) dx_n

    const GroupElement base_inv = group_inverse(x_ref.points[0]);
    auto x0 = xr.value(0);
    for (int k = 0; k < n; ++k) {
        const GroupElement inc = group_multiply(base_inv, x_ref.points[k]);
        std::copy(inc.t.c1.begin(), inc.t.c1.end(), y1.begin() + static_cast<std::size_t>(k) * d);
        std::copy(inc.t.c2.begin(), inc.t.c2.end(), y2.begin() + static_cast<std::size_t>(k) * dd);
        auto xv = xr.value(k);
        for (int i = 0; i < d; ++i)
            xn1[static_cast<std::size_t>(k) * d + i] = xv[i] - x0[i];
        if (k > 0) {
            const double* a = xn1.data() + static_cast<std::size_t>(k - 1) * d;
            const double* b = xn1.data() + static_cast<std::size_t>(k) * d;
            const double* ya = y1.data() + static_cast<std::size_t>(k - 1) * d;
            const double* yb = y1.data() + static_cast<std::size_t>(k) * d;
            double* Ak = A.data() + static_cast<std::size_t>(k) * dd;
            double* Bk = B.data() + static_cast<std::size_t>(k) * dd;
            const double* Ap = A.data() + static_cast<std::size_t>(k - 1) * dd;
            const double* Bp = B.data() + static_cast<std::size_t>(k - 1) * dd;
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) {
                    const std::size_t ij = static_cast<std::size_t>(i) * d + j;
                    const double dxj = b[j] - a[j];
                    Ak[ij] = Ap[ij] + 0.5 * (a[i] + b[i]) * dxj;
                    Bk[ij] = Bp[ij] + 0.5 * (ya[i] + yb[i]) * dxj;
                }
        }
    }

    Good2Terms out;
    std::vector<double> m2(dd), m4(dd);
    for_each_pair(n, pairs, [&](int i, int j) {
        const double w = x_ref.times[j] - x_ref.times[i];
        const double w1 = std::pow(w, 1.0 / p);
        const double w2 = w1 * w1;
        const double* xs = xn1.data() + static_cast<std::size_t>(i) * d;
        const double* xt = xn1.data() + static_cast<std::size_t>(j) * d;
        const double* ys = y1.data() + static_cast<std::size_t>(i) * d;
        const double* yt = y1.data() + static_cast<std::size_t>(j) * d;

        double l1 = 0.0;
        for (int a = 0; a < d; ++a) {
            const double v = (xt[a] - xs[a]) - (yt[a] - ys[a]);
            l1 += v * v;
        }
        out.a1 = std::max(out.a1, std::sqrt(l1) / w1);

        const double* As = A.data() + static_cast<std::size_t>(i) * dd;
        const double* At = A.data() + static_cast<std::size_t>(j) * dd;
        const double* Bs = B.data() + static_cast<std::size_t>(i) * dd;
        const double* Bt = B.data() + static_cast<std::size_t>(j) * dd;
        const double* Ys = y2.data() + static_cast<std::size_t>(i) * dd;
        const double* Yt = y2.data() + static_cast<std::size_t>(j) * dd;
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b) {
                const std::size_t ab = static_cast<std::size_t>(a) * d + b;
                const double ref2 = Yt[ab] - Ys[ab] - ys[a] * (yt[b] - ys[b]);
                m2[ab] = At[ab] - As[ab] - xs[a] * (xt[b] - xs[b]) - ref2;
                m4[ab] = Bt[ab] - Bs[ab] - ys[a] * (xt[b] - xs[b]) - ref2;
            }
        out.a2 = std::max(out.a2, frob(m2.data(), dd) / w2);
        out.a4 = std::max(out.a4, frob(m4.data(), dd) / w2);
    });
    return out;
}

}  // namespace roughkit
