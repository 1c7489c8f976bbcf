#include "roughkit/rde.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>

namespace roughkit {

namespace {

bool all_finite(std::span<const double> v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

[[noreturn]] void blow_up(double t) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "non-finite state, first bad time t=%.17g", t);
    throw NumericError(buf);
}

}  // namespace

void VectorFieldSet::eval_drift(std::span<const double> y, std::span<double> out) const {
    if (drift)
        drift(y, out);
    else
        std::fill(out.begin(), out.end(), 0.0);
}

void VectorFieldSet::eval_fields(std::span<const double> y, std::span<double> out) const {
    fields(y, out);
}

void VectorFieldSet::eval_jacobian(std::span<const double> y, std::span<double> out) const {
    const int n = state_dim, d = drive_dim;
    if (jacobian) {
        jacobian(y, out);
        return;
    }
    // central finite differences of the columns
    std::vector<double> yp(y.begin(), y.end()), ym(y.begin(), y.end());
    std::vector<double> fp(static_cast<std::size_t>(n) * d), fm(fp.size());
    for (int k = 0; k < n; ++k) {
        const double h = 1e-6 * std::max(1.0, std::fabs(y[k]));
        yp[k] = y[k] + h;
        ym[k] = y[k] - h;
        fields(yp, fp);
        fields(ym, fm);
        for (int j = 0; j < d; ++j)
            for (int i = 0; i < n; ++i)
                out[(static_cast<std::size_t>(j) * n + i) * n + k] =
                    (fp[static_cast<std::size_t>(i) * d + j] -
                     fm[static_cast<std::size_t>(i) * d + j]) /
                    (2.0 * h);
        yp[k] = y[k];
        ym[k] = y[k];
    }
}

VectorFieldSet make_vector_fields(
    int state_dim, int drive_dim,
    std::function<void(std::span<const double>, std::span<double>)> drift,
    std::function<void(std::span<const double>, std::span<double>)> fields,
    std::function<void(std::span<const double>, std::span<double>)> jacobian) {
    if (state_dim < 1 || drive_dim < 1) throw UsageError("vector field dims must be >= 1");
    if (!fields) throw UsageError("driving fields are required");
    VectorFieldSet vf;
    vf.state_dim = state_dim;
    vf.drive_dim = drive_dim;
    vf.drift = std::move(drift);
    vf.fields = std::move(fields);

    if (jacobian) {
        // probe the supplied Jacobian against central differences
        VectorFieldSet fd = vf;  // jacobian unset -> finite differences
        const std::size_t jn = static_cast<std::size_t>(drive_dim) * state_dim * state_dim;
        std::vector<double> ja(jn), jb(jn), y(static_cast<std::size_t>(state_dim));
        Rng probe(RngSpec{0x5eedf1e1d5ULL, 0});
        for (int rep = 0; rep < 5; ++rep) {
            for (auto& v : y) v = (rep == 0) ? 0.0 : 2.0 * probe.uniform() - 1.0;
            if (rep >= 3)
                for (auto& v : y) v *= 3.0;
            jacobian(y, ja);
            fd.eval_jacobian(y, jb);
            for (std::size_t i = 0; i < jn; ++i) {
                const double scale = std::max({1e-2, std::fabs(ja[i]), std::fabs(jb[i])});
                if (std::fabs(ja[i] - jb[i]) > 1e-5 * scale)
                    throw UsageError("jacobian disagrees with finite differences");
            }
        }
        vf.jacobian = std::move(jacobian);
    }
    return vf;
}

RDESolution solve_ode(const VectorFieldSet& vf, std::span<const double> y0,
                      const PiecewiseLinearPath& x, int substeps, int lift_level) {
    x.validate();
    if (static_cast<int>(y0.size()) != vf.state_dim) throw UsageError("y0 size mismatch");
    if (vf.drive_dim != x.dim) throw UsageError("driver dim mismatch");
    if (substeps < 1) throw UsageError("substeps must be >= 1");

    const int n = vf.state_dim, d = vf.drive_dim;
    std::vector<double> y(y0.begin(), y0.end());
    std::vector<double> v(static_cast<std::size_t>(d));
    std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
    std::vector<double> fv(static_cast<std::size_t>(n) * d), dr(n);

    auto rhs = [&](std::span<const double> state, std::span<double> out) {
        vf.eval_drift(state, dr);
        vf.eval_fields(state, fv);
        for (int i = 0; i < n; ++i) {
            double s = dr[i];
            for (int j = 0; j < d; ++j) s += fv[static_cast<std::size_t>(i) * d + j] * v[j];
            out[i] = s;
        }
    };

    RDESolution sol;
    sol.y.dim = n;
    sol.y.times = x.times;
    sol.y.values.reserve(x.times.size() * static_cast<std::size_t>(n));
    sol.y.values.insert(sol.y.values.end(), y.begin(), y.end());

    for (int seg = 0; seg + 1 < x.n_points(); ++seg) {
        const double dt = x.times[seg + 1] - x.times[seg];
        auto a = x.value(seg);
        auto b = x.value(seg + 1);
        for (int j = 0; j < d; ++j) v[j] = (b[j] - a[j]) / dt;
        const double h = dt / substeps;
        for (int ss = 0; ss < substeps; ++ss) {
            rhs(y, k1);
            for (int i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
            rhs(tmp, k2);
            for (int i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
            rhs(tmp, k3);
            for (int i = 0; i < n; ++i) tmp[i] = y[i] + h * k3[i];
            rhs(tmp, k4);
            for (int i = 0; i < n; ++i)
                y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if (!all_finite(y)) blow_up(x.times[seg + 1]);
        sol.y.values.insert(sol.y.values.end(), y.begin(), y.end());
    }

    if (lift_level != 0) sol.joint_lift = signature_lift(concat_oplus(x, sol.y), lift_level);
    return sol;
}

RDESolution solve_rde_level2(const VectorFieldSet& vf, std::span<const double> y0,
                             const LiftedPath& x, int lift_level) {
    if (x.level != 2) throw UsageError("solve_rde_level2 needs a level-2 driver");
    if (static_cast<int>(y0.size()) != vf.state_dim) throw UsageError("y0 size mismatch");
    if (vf.drive_dim != x.dim) throw UsageError("driver dim mismatch");

    const int n = vf.state_dim, d = vf.drive_dim;
    std::vector<double> y(y0.begin(), y0.end());
    std::vector<double> fv(static_cast<std::size_t>(n) * d), dr(n);
    std::vector<double> jac(static_cast<std::size_t>(d) * n * n);

    RDESolution sol;
    sol.y.dim = n;
    sol.y.times = x.times;
    sol.y.values.reserve(x.times.size() * static_cast<std::size_t>(n));
    sol.y.values.insert(sol.y.values.end(), y.begin(), y.end());

    for (int k = 0; k + 1 < x.n_points(); ++k) {
        const GroupElement inc = x.increment(k, k + 1);
        const double dt = x.times[k + 1] - x.times[k];
        vf.eval_drift(y, dr);
        vf.eval_fields(y, fv);
        vf.eval_jacobian(y, jac);
        std::vector<double> step(static_cast<std::size_t>(n), 0.0);
        for (int i = 0; i < n; ++i) {
            double s = dr[i] * dt;
            for (int j = 0; j < d; ++j)
                s += fv[static_cast<std::size_t>(i) * d + j] * inc.t.c1[j];
            step[i] = s;
        }
        // (DV_j . V_i) x^2[i,j]
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                const double a = inc.t.at2(i, j);
                if (a == 0.0) continue;
                for (int m = 0; m < n; ++m) {
                    double dvv = 0.0;
                    for (int kk = 0; kk < n; ++kk)
                        dvv += jac[(static_cast<std::size_t>(j) * n + m) * n + kk] *
                               fv[static_cast<std::size_t>(kk) * d + i];
                    step[m] += dvv * a;
                }
            }
        for (int i = 0; i < n; ++i) y[i] += step[i];
        if (!all_finite(y)) blow_up(x.times[k + 1]);
        sol.y.values.insert(sol.y.values.end(), y.begin(), y.end());
    }

    if (lift_level != 0) {
        // driver's first level as a piecewise-linear path
        PiecewiseLinearPath x1;
        x1.dim = d;
        x1.times = x.times;
        x1.values.reserve(x.times.size() * static_cast<std::size_t>(d));
        for (const GroupElement& g : x.points)
            x1.values.insert(x1.values.end(), g.t.c1.begin(), g.t.c1.end());
        sol.joint_lift = signature_lift(concat_oplus(x1, sol.y), lift_level);
    }
    return sol;
}

std::vector<double> stratonovich_compare(const VectorFieldSet& vf,
                                         std::span<const double> y0,
                                         const PiecewiseLinearPath& samples,
                                         std::span<const int> levels, int substeps) {
    const PiecewiseLinearPath yref = solve_ode(vf, y0, samples, substeps).y;
    std::vector<double> out;
    out.reserve(levels.size());
    for (int lev : levels) {
        const PiecewiseLinearPath xk = linear_interpolant(samples, dyadic_times(lev));
        // solve along the interpolant on the fine grid so the error is the
        // Wong-Zakai approximation error, not chord interpolation of y
        const PiecewiseLinearPath yk =
            solve_ode(vf, y0, refine(xk, samples.times), substeps).y;
        double sup = 0.0;
        for (std::size_t i = 0; i < yref.values.size(); ++i)
            sup = std::max(sup, std::fabs(yk.values[i] - yref.values[i]));
        out.push_back(sup);
    }
    return out;
}

VectorFieldSet make_linear_scalar_fields(double mu, double sigma) {
    return make_vector_fields(
        1, 1,
        [mu](std::span<const double> y, std::span<double> out) { out[0] = mu * y[0]; },
        [sigma](std::span<const double> y, std::span<double> out) { out[0] = sigma * y[0]; },
        [sigma](std::span<const double>, std::span<double> out) { out[0] = sigma; });
}

VectorFieldSet make_additive_fields(int d) {
    return make_vector_fields(
        d, d, nullptr,
        [d](std::span<const double>, std::span<double> out) {
            std::fill(out.begin(), out.end(), 0.0);
            for (int i = 0; i < d; ++i) out[static_cast<std::size_t>(i) * d + i] = 1.0;
        },
        [d](std::span<const double>, std::span<double> out) {
            std::fill(out.begin(), out.end(), 0.0);
        });
}

VectorFieldSet make_heisenberg_fields() {
    // V1 = (1, 0, -y2/2), V2 = (0, 1, y1/2): third state accumulates signed area
    return make_vector_fields(
        3, 2, nullptr,
        [](std::span<const double> y, std::span<double> out) {
            out[0] = 1.0;
            out[1] = 0.0;
            out[2] = 0.0;
            out[3] = 1.0;
            out[4] = -0.5 * y[1];
            out[5] = 0.5 * y[0];
        },
        [](std::span<const double>, std::span<double> out) {
            std::fill(out.begin(), out.end(), 0.0);
            // DV_1: d(V1)_2/dy_1 = -1/2 ; DV_2: d(V2)_2/dy_0 = 1/2  (n = 3)
            out[(0 * 3 + 2) * 3 + 1] = -0.5;
            out[(1 * 3 + 2) * 3 + 0] = 0.5;
        });
}

}  // namespace roughkit
