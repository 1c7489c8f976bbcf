#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "roughkit/gaussian.hpp"
#include "roughkit/metrics.hpp"
#include "roughkit/rde.hpp"

namespace roughkit {

struct StudyConfig {
    std::string driver = "bm";  // "bm" | "fbm"
    double hurst = 0.5;         // used by fbm only
    int level = 2;
    double p = 2.5;
    double pprime = 3.0;
    int fine_exponent = 10;     // fine grid has 2^fine_exponent segments
    std::vector<int> levels;    // coarse dyadic exponents
    int replicas = 16;
    double q = 2.0;             // moment order of the L^q aggregate
    std::uint64_t seed = 0;
    int dim = 2;                // driver dimension
    int threads = 1;
    FbmMethod fbm_method = FbmMethod::Cholesky;

    double effective_hurst() const { return driver == "bm" ? 0.5 : hurst; }
    void validate() const;
};

struct RateStudyResult {
    std::vector<double> mesh;         // |D_n|, strictly decreasing
    std::vector<double> defect_mean;
    std::vector<double> defect_q;     // L^q Monte-Carlo estimate
    std::vector<double> defect_se;
    double slope = 0.0;
    double intercept = 0.0;
    std::pair<double, double> slope_ci{0.0, 0.0};  // 95% bootstrap over replicas
    int replicas = 0;
    int aborted = 0;
    StudyConfig config;

    // raw per-replica data, empty row = aborted replica
    std::vector<std::vector<double>> raw_defect;      // [replica][level]
    std::vector<std::vector<Good2Terms>> raw_terms;   // level-2 defect studies only
    std::vector<std::vector<double>> raw_wall_ms;
    std::vector<std::vector<double>> raw_aux;         // study-specific extra column
};

struct FitResult {
    double slope = 0.0;
    double intercept = 0.0;
    std::pair<double, double> ci{0.0, 0.0};
};

// least squares on (log mesh, log defect); 95% CI from the OLS slope error
FitResult fit_rate(std::span<const double> mesh, std::span<const double> defect);

enum class DefectMetric {
    GoodSeq,     // d_{omega,p}(S'(x_n, x), S''(x))
    CqDistance,  // d_{omega,p}(S(x_n), S(x))
    EndpointL2,  // | int_0^1 x^1 (x) dx_n - x^2(0,1) |
    SpanL2,      // quadratic-mean lift defect over the quarter-span family;
                 // the L2 increment quantity the convergence proofs estimate
};

RateStudyResult run_rate_study(const StudyConfig& cfg, DefectMetric metric);

inline RateStudyResult good_sequence_study(const StudyConfig& cfg) {
    return run_rate_study(cfg, DefectMetric::GoodSeq);
}
inline RateStudyResult cq_convergence_study(const StudyConfig& cfg) {
    return run_rate_study(cfg, DefectMetric::CqDistance);
}
inline RateStudyResult endpoint_l2_study(const StudyConfig& cfg) {
    return run_rate_study(cfg, DefectMetric::EndpointL2);
}
inline RateStudyResult span_l2_study(const StudyConfig& cfg) {
    return run_rate_study(cfg, DefectMetric::SpanL2);
}

// defect of S'(x_n, pure-area path) vs S'' for x_n == 0 and for shrinking
// smooth loops; the sequences must stay above the closed-form floor
struct CounterexampleResult {
    std::vector<int> grid_sizes;
    std::vector<double> mesh;
    std::vector<double> defect_zero;
    std::vector<double> defect_loops;
    double floor_constant = 0.0;  // sqrt(2 sqrt(2))
    bool above_floor = false;
};
CounterexampleResult counterexample_study(double p, int base_grid, int halvings = 6);

enum class InitialCondition { Fixed, DriverEndpoint };

// per replica: fine reference solution, solutions along dyadic interpolants,
// 1/p-Hoelder distance of the lifted solutions per level (raw_aux carries the
// uniform distances)
RateStudyResult wong_zakai_study(const StudyConfig& cfg, const VectorFieldSet& vf,
                                 std::span<const double> y0,
                                 InitialCondition ic = InitialCondition::Fixed,
                                 int substeps = 4);

struct LemmaSuiteReport {
    std::vector<int> sizes;
    std::vector<double> ratio_abs;  // lhs / rhs_shape
    std::vector<double> ratio_sq;   // lhs_sq / rhs_shape
    double max_ratio_abs = 0.0;
    double max_ratio_sq = 0.0;
    bool sq_nonincreasing = false;
    int increasing_violations = 0;  // nested/disjoint monotonicity lattice
    double wick_formula = 0.0;
    double wick_mc = 0.0;
    double wick_band = 0.0;  // 4 x MC standard error
    bool wick_ok = false;
};
LemmaSuiteReport covariance_lemma_suite(double H, double pprime,
                                        std::span<const int> sizes,
                                        std::uint64_t seed = 0, int wick_samples = 200000);

}  // namespace roughkit
