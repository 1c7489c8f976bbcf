#pragma once

#include <functional>

#include "roughkit/path.hpp"

namespace roughkit {

// control omega(s,t); default is the Hoelder control t - s.
// Superadditivity is the caller's responsibility for custom controls
// (checked on grids by the test suite, not here).
struct Control {
    std::function<double(double, double)> omega;
    static Control holder() {
        return Control{[](double s, double t) { return t - s; }};
    }
};

// `All` is the exact O(N^2) sup; `Dyadic` restricts to index pairs (i, i+2^k),
// an O(N log N) lower surrogate (sup over a subset).
enum class PairSet { All, Dyadic };

struct MetricReport {
    double distance = 0.0;
    double s = 0.0, t = 0.0;  // witness pair attaining the sup
    double basepoint_term = 0.0;
};

// d(x_0,y_0) + sup_{s<t} d(x_{s,t}, y_{s,t}) / omega(s,t)^{1/p}
MetricReport holder_distance(const LiftedPath& x, const LiftedPath& y, double p,
                             PairSet pairs = PairSet::All,
                             const Control& control = Control::holder());

// exact sup over grid subdivisions via dynamic programming, O(N^2)
double p_variation_norm(const LiftedPath& x, double p);

// d_{omega,p}(S'(x_n, x_ref), S''(x_ref))
double good_sequence_defect(const PiecewiseLinearPath& x_n,
                            const PiecewiseLinearPath& x_ref, double p, int level,
                            PairSet pairs = PairSet::All);
double good_sequence_defect(const PiecewiseLinearPath& x_n, const LiftedPath& x_ref,
                            double p, PairSet pairs = PairSet::All);

// the three sup conditions characterizing good sequences at level 2:
//   a1: level-1 term, a2: int x_n (x) dx_n vs x^2, a4: int x^1 (x) dx_n vs x^2
struct Good2Terms {
    double a1 = 0.0, a2 = 0.0, a4 = 0.0;
};
Good2Terms good2_terms(const PiecewiseLinearPath& x_n, const LiftedPath& x_ref,
                       double p, PairSet pairs = PairSet::All);

}  // namespace roughkit
