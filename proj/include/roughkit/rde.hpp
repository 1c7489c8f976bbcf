#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "roughkit/metrics.hpp"
#include "roughkit/path.hpp"

namespace roughkit {

// Drift V0 plus driving fields V_1..V_d with Jacobians. The callables must be
// safe to invoke concurrently: Monte-Carlo replication calls solvers from
// worker threads.
// fields(y) writes n x d row-major: out[i*d + j] = component i of V_j(y).
// jacobian(y) writes d x n x n: out[(j*n + i)*n + k] = d(V_j)_i / dy_k.
// Either drift or jacobian may be empty (zero drift / finite-difference fallback).
struct VectorFieldSet {
    int state_dim = 0;
    int drive_dim = 0;
    std::function<void(std::span<const double>, std::span<double>)> drift;
    std::function<void(std::span<const double>, std::span<double>)> fields;
    std::function<void(std::span<const double>, std::span<double>)> jacobian;

    void eval_drift(std::span<const double> y, std::span<double> out) const;
    void eval_fields(std::span<const double> y, std::span<double> out) const;
    void eval_jacobian(std::span<const double> y, std::span<double> out) const;
};

// validates a supplied jacobian against central finite differences on probe
// points (1e-5 relative); throws UsageError on mismatch
VectorFieldSet make_vector_fields(
    int state_dim, int drive_dim,
    std::function<void(std::span<const double>, std::span<double>)> drift,
    std::function<void(std::span<const double>, std::span<double>)> fields,
    std::function<void(std::span<const double>, std::span<double>)> jacobian = nullptr);

struct RDESolution {
    PiecewiseLinearPath y;
    std::optional<LiftedPath> joint_lift;  // S(x (+) y), y linearized between grid points
};

// classical RK4 on the autonomous-per-segment ODE dy = (V0(y) + V(y) xdot) dt;
// exact driver handling for piecewise-linear x
RDESolution solve_ode(const VectorFieldSet& vf, std::span<const double> y0,
                      const PiecewiseLinearPath& x, int substeps, int lift_level = 0);

// second-order increment stepping on a level-2 rough driver:
//   y_{k+1} = y_k + V0 dt + V x^1 + sum_{i,j} DV_j[V_i] x^2[i,j]
RDESolution solve_rde_level2(const VectorFieldSet& vf, std::span<const double> y0,
                             const LiftedPath& x, int lift_level = 0);

// solves along dyadic interpolants of `samples` and returns, per level, the
// uniform distance to the finest-grid solution
std::vector<double> stratonovich_compare(const VectorFieldSet& vf,
                                         std::span<const double> y0,
                                         const PiecewiseLinearPath& samples,
                                         std::span<const int> levels, int substeps = 4);

// ---- presets (shared by the CLI and tests) ----

// n = d = 1: dy = mu y dt + sigma y dx
VectorFieldSet make_linear_scalar_fields(double mu, double sigma);
// n = d: dy = dx
VectorFieldSet make_additive_fields(int d);
// n = 3, d = 2: unit horizontal fields plus area accumulator in y_3
VectorFieldSet make_heisenberg_fields();

}  // namespace roughkit
