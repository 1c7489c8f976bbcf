#pragma once

#include <span>
#include <vector>

#include "roughkit/common.hpp"
#include "roughkit/path.hpp"

namespace roughkit {

// E(W_H(t) W_H(s)) = (t^{2H} + s^{2H} - |t-s|^{2H}) / 2
double fbm_covariance(double s, double t, double H);

// E(W(s,t) W(s',t')) in closed form
double increment_covariance(double s, double t, double sp, double tp, double H);

// bundles a Hurst parameter with its covariance evaluators
struct HurstModel {
    double H = 0.5;
    explicit HurstModel(double hurst);
    double covariance(double s, double t) const { return fbm_covariance(s, t, H); }
    double increment_cov(double s, double t, double sp, double tp) const {
        return increment_covariance(s, t, sp, tp, H);
    }
};

// Lanczos approximation, reflection for x < 0.5; used instead of libm tgamma
// so kernel values are reproducible across toolchains
double gamma_fn(double x);

// Gauss hypergeometric 2F1 for real arguments, z <= 1.
// Direct series for |z| <= 1/2; Pfaff maps z < 0 into [0,1); the z -> 1-z
// connection handles arguments near 1. Relative accuracy ~1e-12 on the
// kernel's domain.
double hyp2f1(double a, double b, double c, double z);

// variance scale of the raw Volterra kernel: Gamma(2-2H) cos(pi H) / (pi H (1-2H))
double fbm_variance_scale(double H);

// Volterra kernel of unit-variance fBm (raw hypergeometric form divided by
// sqrt of the variance scale) and its t-derivative; 0 < s < t
double kernel_K(double t, double s, double H);
double kernel_dt(double t, double s, double H);

// E(X1 X2 X3 X4) = c12 c34 + c13 c24 + c14 c23 for centered jointly Gaussian
double wick_fourth_moment(double c12, double c13, double c14, double c23,
                          double c24, double c34);

// exact covariance sums of the subdivision lemma:
//   lhs      = sum_{k,l} ||dW_k|| ||dW_l|| |E(dW_k dW_l)|
//   lhs_sq   = sum_{k,l} E(dW_k dW_l)^2
//   rhs_shape = (t_n - t_m)^{4/p'} |D|^{4H - 4/p'}
struct FinalLemmaCheck {
    double lhs = 0.0;
    double lhs_sq = 0.0;
    double rhs_shape = 0.0;
};
FinalLemmaCheck finallemma_check(std::span<const double> D, double H, double pprime);

PiecewiseLinearPath sample_bm(std::span<const double> grid, int d, RngSpec rng);

enum class FbmMethod { Cholesky, DaviesHarte };

// Exact finite-dimensional law on the grid. Cholesky factors the increment
// covariance (the correctness reference); Davies-Harte uses circulant
// embedding on uniform power-of-two grids and falls back to Cholesky when
// the embedding is not nonnegative-definite.
class FbmSampler {
public:
    FbmSampler(std::span<const double> grid, double H, FbmMethod method);
    PiecewiseLinearPath sample(int d, RngSpec rng) const;
    FbmMethod method_used() const { return method_used_; }

    // max |L L^T - Sigma| over the increment covariance (Cholesky only)
    double factor_residual() const;

private:
    std::vector<double> grid_;
    double hurst_;
    FbmMethod method_used_;
    int n_inc_ = 0;
    std::vector<double> chol_;    // lower triangular, row-major
    std::vector<double> dh_sqrt_; // sqrt(eigenvalues / 2M) for Davies-Harte
};

PiecewiseLinearPath sample_fbm(std::span<const double> grid, int d, double H,
                               FbmMethod method, RngSpec rng);

}  // namespace roughkit
