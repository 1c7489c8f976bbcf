#include "roughkit/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdio>

namespace roughkit {

namespace {

constexpr double kPi = 3.14159265358979323846;

double pow2h(double x, double twoH) { return x == 0.0 ? 0.0 : std::pow(std::fabs(x), twoH); }

void check_hurst(double H) {
    if (!(H > 0.0 && H < 1.0)) throw UsageError("Hurst parameter must be in (0,1)");
}

}  // namespace

double fbm_covariance(double s, double t, double H) {
    check_hurst(H);
    const double twoH = 2.0 * H;
    return 0.5 * (pow2h(t, twoH) + pow2h(s, twoH) - pow2h(t - s, twoH));
}

double increment_covariance(double s, double t, double sp, double tp, double H) {
    check_hurst(H);
    const double twoH = 2.0 * H;
    return 0.5 * (pow2h(t - sp, twoH) + pow2h(s - tp, twoH) - pow2h(s - sp, twoH) -
                  pow2h(t - tp, twoH));
}

HurstModel::HurstModel(double hurst) : H(hurst) { check_hurst(H); }

// ---- special functions ----

double gamma_fn(double x) {
    // Lanczos, g = 7, 9 terms
    static const double c[9] = {
        0.99999999999980993,      676.5203681218851,     -1259.1392167224028,
        771.32342877765313,       -176.61502916214059,   12.507343278686905,
        -0.13857109526572012,     9.9843695780195716e-6, 1.5056327351493116e-7};
    if (x < 0.5) {
        const double s = std::sin(kPi * x);
        if (s == 0.0) throw UsageError("gamma_fn pole at nonpositive integer");
        return kPi / (s * gamma_fn(1.0 - x));
    }
    const double z = x - 1.0;
    double ag = c[0];
    for (int i = 1; i < 9; ++i) ag += c[i] / (z + i);
    const double t = z + 7.5;
    return std::sqrt(2.0 * kPi) * std::pow(t, z + 0.5) * std::exp(-t) * ag;
}

namespace {

// plain power series; requires |z| < 1, efficient for |z| <= ~0.6
double hyp_series(double a, double b, double c, double z) {
    double term = 1.0, sum = 1.0;
    for (int k = 0; k < 100000; ++k) {
        term *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * z;
        sum += term;
        if (std::fabs(term) <= 1e-17 * std::fabs(sum)) return sum;
    }
    char buf[128];
    std::snprintf(buf, sizeof buf,
                  "hyp2f1 series failed to converge (a=%g b=%g c=%g z=%g)", a, b, c, z);
    throw NumericError(buf);
}

double hyp_at_one(double a, double b, double c) {
    if (!(c - a - b > 0.0))
        throw NumericError("hyp2f1 diverges at z = 1 when c - a - b <= 0");
    return gamma_fn(c) * gamma_fn(c - a - b) / (gamma_fn(c - a) * gamma_fn(c - b));
}

// w in (0.6, 1): the z -> 1-z connection formula
double hyp_near_one(double a, double b, double c, double w) {
    const double s = c - a - b;
    if (std::fabs(s - std::round(s)) < 1e-9)
        throw NumericError("hyp2f1 connection formula degenerate: c-a-b near integer");
    const double f1 = gamma_fn(c) * gamma_fn(s) / (gamma_fn(c - a) * gamma_fn(c - b)) *
                      hyp_series(a, b, 1.0 - s, 1.0 - w);
    const double f2 = std::pow(1.0 - w, s) * gamma_fn(c) * gamma_fn(-s) /
                      (gamma_fn(a) * gamma_fn(b)) *
                      hyp_series(c - a, c - b, 1.0 + s, 1.0 - w);
    return f1 + f2;
}

double hyp_nonneg(double a, double b, double c, double w) {
    if (a == 0.0 || b == 0.0) return 1.0;  // Pfaff can zero a parameter
    if (w <= 0.6) return hyp_series(a, b, c, w);
    if (w == 1.0) return hyp_at_one(a, b, c);
    return hyp_near_one(a, b, c, w);
}

}  // namespace

double hyp2f1(double a, double b, double c, double z) {
    if (c <= 0.0 && std::fabs(c - std::round(c)) < 1e-12)
        throw UsageError("hyp2f1: c must not be a nonpositive integer");
    if (z > 1.0) throw UsageError("hyp2f1 implemented for z <= 1 only");
    if (a == 0.0 || b == 0.0 || z == 0.0) return 1.0;
    if (std::fabs(z) <= 0.5) return hyp_series(a, b, c, z);
    if (z < 0.0)  // Pfaff: argument moves to z/(z-1) in (1/3, 1)
        return std::pow(1.0 - z, -a) * hyp_nonneg(a, c - b, c, z / (z - 1.0));
    return hyp_nonneg(a, b, c, z);
}

double fbm_variance_scale(double H) {
    check_hurst(H);
    // Gamma(2-2H) cos(pi H) / (pi H (1-2H)), written through sin(pi u)/(pi u)
    // with u = 1/2 - H so the H -> 1/2 limit is exact
    const double u = 0.5 - H;
    const double pu = kPi * u;
    const double sinc = std::fabs(pu) < 1e-7 ? 1.0 - pu * pu / 6.0 : std::sin(pu) / pu;
    return gamma_fn(2.0 - 2.0 * H) * sinc / (2.0 * H);
}

double kernel_K(double t, double s, double H) {
    check_hurst(H);
    if (!(s > 0.0 && s < t)) throw UsageError("kernel_K requires 0 < s < t");
    if (H == 0.5) return 1.0;
    const double raw = std::pow(t - s, H - 0.5) / gamma_fn(H + 0.5) *
                       hyp2f1(H - 0.5, 0.5 - H, H + 0.5, 1.0 - t / s);
    return raw / std::sqrt(fbm_variance_scale(H));
}

double kernel_dt(double t, double s, double H) {
    check_hurst(H);
    if (!(s > 0.0 && s < t)) throw UsageError("kernel_dt requires 0 < s < t");
    const double raw = (H - 0.5) / gamma_fn(H + 0.5) * std::pow(s / t, 0.5 - H) *
                       std::pow(t - s, H - 1.5);
    return raw / std::sqrt(fbm_variance_scale(H));
}

double wick_fourth_moment(double c12, double c13, double c14, double c23, double c24,
                          double c34) {
    return c12 * c34 + c13 * c24 + c14 * c23;
}

FinalLemmaCheck finallemma_check(std::span<const double> D, double H, double pprime) {
    if (!(H > 0.25 && H < 0.5))
        throw UsageError("finallemma_check requires H in (1/4, 1/2)");
    if (!(pprime > 1.0 / H)) throw UsageError("finallemma_check requires p' > 1/H");
    const double eps = 4.0 / pprime - 1.0;
    if (!(eps > 0.0 && eps < 2.0 * H))
        throw UsageError("finallemma_check requires 4/p' - 1 in (0, 2H)");
    if (D.size() < 2) throw UsageError("subdivision needs at least 2 points");

    const int n = static_cast<int>(D.size()) - 1;
    double mesh = 0.0;
    for (int k = 0; k < n; ++k) {
        if (!(D[k + 1] > D[k])) throw UsageError("subdivision must be increasing");
        mesh = std::max(mesh, D[k + 1] - D[k]);
    }

    FinalLemmaCheck out;
    for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
            const double c = increment_covariance(D[k], D[k + 1], D[l], D[l + 1], H);
            const double nk = std::pow(D[k + 1] - D[k], H);
            const double nl = std::pow(D[l + 1] - D[l], H);
            out.lhs += nk * nl * std::fabs(c);
            out.lhs_sq += c * c;
        }
    out.rhs_shape = std::pow(D.back() - D.front(), 4.0 / pprime) *
                    std::pow(mesh, 4.0 * H - 4.0 / pprime);
    return out;
}

// ---- samplers ----

namespace {

void check_grid(std::span<const double> grid) {
    if (grid.size() < 2) throw UsageError("sampling grid needs at least 2 points");
    if (grid.front() != 0.0) throw UsageError("sampling grid must start at 0");
    for (std::size_t k = 1; k < grid.size(); ++k)
        if (!(grid[k] > grid[k - 1])) throw UsageError("sampling grid must be increasing");
    if (grid.back() > 1.0 + 1e-12) throw UsageError("sampling grid must lie in [0,1]");
}

void fft_inplace(std::vector<std::complex<double>>& a) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = -2.0 * kPi / static_cast<double>(len);
        const std::complex<double> wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> u = a[i + k];
                const std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

PiecewiseLinearPath sample_bm(std::span<const double> grid, int d, RngSpec rng) {
    check_grid(grid);
    if (d < 1) throw UsageError("dimension must be >= 1");
    Rng gen(rng);
    PiecewiseLinearPath out;
    out.dim = d;
    out.times.assign(grid.begin(), grid.end());
    out.values.assign(grid.size() * static_cast<std::size_t>(d), 0.0);
    for (std::size_t k = 1; k < grid.size(); ++k) {
        const double sd = std::sqrt(grid[k] - grid[k - 1]);
        for (int i = 0; i < d; ++i)
            out.values[k * d + i] = out.values[(k - 1) * d + i] + sd * gen.normal();
    }
    return out;
}

FbmSampler::FbmSampler(std::span<const double> grid, double H, FbmMethod method)
    : grid_(grid.begin(), grid.end()), hurst_(H), method_used_(method) {
    check_grid(grid);
    check_hurst(H);
    n_inc_ = static_cast<int>(grid.size()) - 1;

    if (method == FbmMethod::DaviesHarte) {
        const double h0 = grid_[1] - grid_[0];
        bool uniform = true;
        for (int k = 1; k < n_inc_; ++k)
            if (std::fabs(grid_[k + 1] - grid_[k] - h0) > 1e-12 * h0) uniform = false;
        if (!uniform)
            throw UsageError("davies_harte requires a uniform grid");
        if (!is_pow2(n_inc_)) {
            method_used_ = FbmMethod::Cholesky;  // radix-2 embedding unavailable
        } else {
            // circulant embedding of the fGn autocovariance
            const int m = 2 * n_inc_;
            const double twoH = 2.0 * H;
            auto rho = [&](int k) {
                return 0.5 * (pow2h(k + 1.0, twoH) - 2.0 * pow2h(k, twoH) +
                              pow2h(k - 1.0, twoH));
            };
            std::vector<std::complex<double>> row(static_cast<std::size_t>(m));
            for (int k = 0; k <= n_inc_; ++k) row[k] = rho(k);
            for (int k = 1; k < n_inc_; ++k) row[m - k] = rho(k);
            fft_inplace(row);
            double minev = 0.0;
            for (auto& ev : row) minev = std::min(minev, ev.real());
            if (minev < -1e-9) {
                method_used_ = FbmMethod::Cholesky;  // keep the law exact
            } else {
                dh_sqrt_.resize(static_cast<std::size_t>(m));
                for (int k = 0; k < m; ++k)
                    dh_sqrt_[k] = std::sqrt(std::max(0.0, row[k].real()) / m);
            }
        }
    }

    if (method_used_ == FbmMethod::Cholesky) {
        const std::size_t n = static_cast<std::size_t>(n_inc_);
        chol_.assign(n * n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j <= i; ++j)
                chol_[i * n + j] = increment_covariance(grid_[i], grid_[i + 1],
                                                        grid_[j], grid_[j + 1], hurst_);
        // in-place lower Cholesky
        for (std::size_t j = 0; j < n; ++j) {
            double diag = chol_[j * n + j];
            for (std::size_t k = 0; k < j; ++k) diag -= chol_[j * n + k] * chol_[j * n + k];
            if (diag <= 0.0)
                throw NumericError("fbm increment covariance not positive definite");
            const double lj = std::sqrt(diag);
            chol_[j * n + j] = lj;
            for (std::size_t i = j + 1; i < n; ++i) {
                double v = chol_[i * n + j];
                for (std::size_t k = 0; k < j; ++k)
                    v -= chol_[i * n + k] * chol_[j * n + k];
                chol_[i * n + j] = v / lj;
            }
        }
    }
}

double FbmSampler::factor_residual() const {
    if (method_used_ != FbmMethod::Cholesky) return 0.0;
    const std::size_t n = static_cast<std::size_t>(n_inc_);
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j <= i; ++j) {
            double v = 0.0;
            for (std::size_t k = 0; k <= j; ++k) v += chol_[i * n + k] * chol_[j * n + k];
            const double sigma = increment_covariance(grid_[i], grid_[i + 1], grid_[j],
                                                      grid_[j + 1], hurst_);
            worst = std::max(worst, std::fabs(v - sigma));
        }
    return worst;
}

PiecewiseLinearPath FbmSampler::sample(int d, RngSpec rng) const {
    if (d < 1) throw UsageError("dimension must be >= 1");
    Rng gen(rng);
    const std::size_t n = static_cast<std::size_t>(n_inc_);
    PiecewiseLinearPath out;
    out.dim = d;
    out.times = grid_;
    out.values.assign(grid_.size() * static_cast<std::size_t>(d), 0.0);

    std::vector<double> inc(n);
    for (int comp = 0; comp < d; ++comp) {
        if (method_used_ == FbmMethod::Cholesky) {
            std::vector<double> z(n);
            for (auto& v : z) v = gen.normal();
            for (std::size_t i = 0; i < n; ++i) {
                double v = 0.0;
                for (std::size_t k = 0; k <= i; ++k) v += chol_[i * n + k] * z[k];
                inc[i] = v;
            }
        } else {
            const int m = 2 * n_inc_;
            std::vector<std::complex<double>> V(static_cast<std::size_t>(m));
            V[0] = dh_sqrt_[0] * gen.normal();
            V[n] = dh_sqrt_[n] * gen.normal();
            const double half = std::sqrt(0.5);
            for (int j = 1; j < n_inc_; ++j) {
                const double re = gen.normal();
                const double im = gen.normal();
                V[j] = dh_sqrt_[j] * half * std::complex<double>(re, im);
                V[m - j] = std::conj(V[j]);
            }
            fft_inplace(V);
            const double scale = std::pow(grid_[1] - grid_[0], hurst_);
            for (std::size_t i = 0; i < n; ++i) inc[i] = scale * V[i].real();
        }
        for (std::size_t k = 0; k < n; ++k)
            out.values[(k + 1) * d + comp] = out.values[k * d + comp] + inc[k];
    }
    return out;
}

PiecewiseLinearPath sample_fbm(std::span<const double> grid, int d, double H,
                               FbmMethod method, RngSpec rng) {
    return FbmSampler(grid, H, method).sample(d, rng);
}

}  // namespace roughkit
