#include "roughkit/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <memory>
#include <thread>

namespace roughkit {

namespace {

// two-sided 97.5% t quantiles, df 1..30
const double kT975[30] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306,
                          2.262,  2.228, 2.201, 2.179, 2.160, 2.145, 2.131, 2.120,
                          2.110,  2.101, 2.093, 2.086, 2.080, 2.074, 2.069, 2.064,
                          2.060,  2.056, 2.052, 2.048, 2.045, 2.042};

double t975(int df) {
    if (df < 1) return 12.706;
    if (df <= 30) return kT975[df - 1];
    return 1.96;
}

PairSet pairs_for(int n_points) {
    // full O(N^2) scan up to 2^9 segments, dyadic-span surrogate beyond
    return n_points > (1 << 9) + 1 ? PairSet::Dyadic : PairSet::All;
}

struct ReplicaOutput {
    bool ok = false;
    std::vector<double> defect;
    std::vector<Good2Terms> terms;
    std::vector<double> wall_ms;
    std::vector<double> aux;
};

void aggregate(RateStudyResult& res, std::vector<ReplicaOutput>&& rows,
               const StudyConfig& cfg) {
    const std::size_t L = cfg.levels.size();
    res.replicas = cfg.replicas;
    res.config = cfg;
    res.mesh.resize(L);
    for (std::size_t l = 0; l < L; ++l) res.mesh[l] = std::ldexp(1.0, -cfg.levels[l]);

    res.raw_defect.assign(cfg.replicas, {});
    res.raw_terms.assign(cfg.replicas, {});
    res.raw_wall_ms.assign(cfg.replicas, {});
    res.raw_aux.assign(cfg.replicas, {});
    int ok_count = 0;
    for (int r = 0; r < cfg.replicas; ++r) {
        if (!rows[r].ok) {
            ++res.aborted;
            continue;
        }
        ++ok_count;
        res.raw_defect[r] = std::move(rows[r].defect);
        res.raw_terms[r] = std::move(rows[r].terms);
        res.raw_wall_ms[r] = std::move(rows[r].wall_ms);
        res.raw_aux[r] = std::move(rows[r].aux);
    }
    if (res.aborted > 0 && res.aborted * 20 > cfg.replicas)
        throw StudyError("more than 5% of replicas aborted");
    if (ok_count == 0) throw StudyError("all replicas aborted");

    res.defect_mean.assign(L, 0.0);
    res.defect_q.assign(L, 0.0);
    res.defect_se.assign(L, 0.0);
    for (std::size_t l = 0; l < L; ++l) {
        double sum = 0.0, sumq = 0.0;
        for (int r = 0; r < cfg.replicas; ++r) {
            if (res.raw_defect[r].empty()) continue;
            sum += res.raw_defect[r][l];
            sumq += std::pow(res.raw_defect[r][l], cfg.q);
        }
        res.defect_mean[l] = sum / ok_count;
        res.defect_q[l] = std::pow(sumq / ok_count, 1.0 / cfg.q);
        double ss = 0.0;
        for (int r = 0; r < cfg.replicas; ++r) {
            if (res.raw_defect[r].empty()) continue;
            const double dev = res.raw_defect[r][l] - res.defect_mean[l];
            ss += dev * dev;
        }
        res.defect_se[l] =
            ok_count > 1 ? std::sqrt(ss / (ok_count - 1) / ok_count) : 0.0;
    }

    FitResult fit;
    if (L >= 3) {
        fit = fit_rate(res.mesh, res.defect_q);
        res.slope = fit.slope;
        res.intercept = fit.intercept;
    }

    // bootstrap the slope over replica resampling
    std::vector<int> valid;
    for (int r = 0; r < cfg.replicas; ++r)
        if (!res.raw_defect[r].empty()) valid.push_back(r);
    const int B = 400;
    std::vector<double> slopes;
    slopes.reserve(B);
    Rng boot(RngSpec{cfg.seed, 0xb007u});
    std::vector<double> agg(L);
    for (int b = 0; b < B; ++b) {
        std::fill(agg.begin(), agg.end(), 0.0);
        for (std::size_t i = 0; i < valid.size(); ++i) {
            const int r =
                valid[static_cast<std::size_t>(boot.next_u64() % valid.size())];
            for (std::size_t l = 0; l < L; ++l)
                agg[l] += std::pow(res.raw_defect[r][l], cfg.q);
        }
        bool pos = true;
        for (std::size_t l = 0; l < L; ++l) {
            agg[l] = std::pow(agg[l] / valid.size(), 1.0 / cfg.q);
            pos = pos && agg[l] > 0.0;
        }
        if (pos && L >= 3) slopes.push_back(fit_rate(res.mesh, agg).slope);
    }
    std::sort(slopes.begin(), slopes.end());
    if (slopes.size() >= 40) {
        res.slope_ci = {slopes[static_cast<std::size_t>(0.025 * slopes.size())],
                        slopes[static_cast<std::size_t>(0.975 * slopes.size())]};
    } else {
        res.slope_ci = fit.ci;
    }
}

// runs fn(replica) over all replicas, optionally on a small thread pool;
// results land in index order regardless of scheduling
template <typename F>
std::vector<ReplicaOutput> run_replicas(const StudyConfig& cfg, F&& fn) {
    std::vector<ReplicaOutput> rows(cfg.replicas);
    auto work = [&](int r) {
        try {
            rows[r] = fn(r);
            rows[r].ok = true;
        } catch (const NumericError& e) {
            std::fprintf(stderr, "replica %d aborted: %s\n", r, e.what());
            rows[r].ok = false;
        }
    };
    const int threads = std::min(cfg.threads, cfg.replicas);
    if (threads <= 1) {
        for (int r = 0; r < cfg.replicas; ++r) work(r);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (int t = 0; t < threads; ++t)
            pool.emplace_back([&] {
                for (int r = next.fetch_add(1); r < cfg.replicas; r = next.fetch_add(1))
                    work(r);
            });
        for (auto& th : pool) th.join();
    }
    return rows;
}

// quadratic-mean squared component defect of the level >= 2 parts over the
// quarter-span increment family
double span_l2_defect(const LiftedPath& a, const LiftedPath& b) {
    const int n = a.n_points() - 1;
    double s2 = 0.0;
    int cnt = 0;
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j <= 4; ++j) {
            const GroupElement ia = a.increment(i * n / 4, j * n / 4);
            const GroupElement ib = b.increment(i * n / 4, j * n / 4);
            for (std::size_t k = 0; k < ia.t.c2.size(); ++k) {
                const double v = ia.t.c2[k] - ib.t.c2[k];
                s2 += v * v;
            }
            for (std::size_t k = 0; k < ia.t.c3.size(); ++k) {
                const double v = ia.t.c3[k] - ib.t.c3[k];
                s2 += v * v;
            }
            ++cnt;
        }
    return s2 / cnt;
}

double endpoint_l2_defect(const PiecewiseLinearPath& fine,
                          const PiecewiseLinearPath& coarse_refined,
                          const GroupElement& ref_endpoint_inc) {
    // | int_0^1 (x - x_0) (x) d x_n - x^2(0,1) |, both paths on the fine grid
    const int d = fine.dim;
    std::vector<double> acc(static_cast<std::size_t>(d) * d, 0.0);
    auto x0 = fine.value(0);
    for (int k = 0; k + 1 < fine.n_points(); ++k) {
        auto ya = fine.value(k);
        auto yb = fine.value(k + 1);
        auto ca = coarse_refined.value(k);
        auto cb = coarse_refined.value(k + 1);
        for (int i = 0; i < d; ++i) {
            const double ybar = 0.5 * (ya[i] + yb[i]) - x0[i];
            for (int j = 0; j < d; ++j)
                acc[static_cast<std::size_t>(i) * d + j] += ybar * (cb[j] - ca[j]);
        }
    }
    double s = 0.0;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            const double v =
                acc[static_cast<std::size_t>(i) * d + j] - ref_endpoint_inc.t.at2(i, j);
            s += v * v;
        }
    return std::sqrt(s);
}

}  // namespace

void StudyConfig::validate() const {
    if (driver != "bm" && driver != "fbm") throw UsageError("driver must be bm or fbm");
    if (driver == "fbm") {
        if (!(hurst > 0.25 && hurst < 1.0))
            throw UsageError("fbm studies need H in (1/4, 1)");
    }
    if (level != 2 && level != 3) throw UsageError("level must be 2 or 3");
    const double heff = effective_hurst();
    if (!(p > 1.0 / heff && p < level + 1.0))
        throw UsageError("need p in (1/H, level+1)");
    if (levels.empty()) throw UsageError("no coarse levels given");
    for (int l : levels)
        if (l < 1 || l >= fine_exponent - 2)
            throw UsageError("coarse levels must satisfy 1 <= level < fine - 2");
    if (fine_exponent < 3 || fine_exponent > 20) throw UsageError("bad fine exponent");
    if (replicas < 1) throw UsageError("replicas must be >= 1");
    if (q < 1.0) throw UsageError("q must be >= 1");
    if (dim < 1 || dim > 8) throw UsageError("driver dim must be in 1..8");
    if (threads < 1) throw UsageError("threads must be >= 1");
}

FitResult fit_rate(std::span<const double> mesh, std::span<const double> defect) {
    if (mesh.size() != defect.size()) throw UsageError("fit_rate: length mismatch");
    if (mesh.size() < 3) throw UsageError("fit_rate needs at least 3 points");
    const int n = static_cast<int>(mesh.size());
    std::vector<double> lx(n), ly(n);
    for (int i = 0; i < n; ++i) {
        if (!(mesh[i] > 0.0) || !(defect[i] > 0.0))
            throw UsageError("fit_rate needs positive inputs");
        lx[i] = std::log(mesh[i]);
        ly[i] = std::log(defect[i]);
    }
    double mx = 0.0, my = 0.0;
    for (int i = 0; i < n; ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (int i = 0; i < n; ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    FitResult fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss = 0.0;
    for (int i = 0; i < n; ++i) {
        const double r = ly[i] - (fit.intercept + fit.slope * lx[i]);
        ss += r * r;
    }
    const double se = std::sqrt(ss / std::max(1, n - 2) / sxx);
    const double tq = t975(n - 2);
    fit.ci = {fit.slope - tq * se, fit.slope + tq * se};
    return fit;
}

RateStudyResult run_rate_study(const StudyConfig& cfg, DefectMetric metric) {
    cfg.validate();
    const std::vector<double> grid = dyadic_times(cfg.fine_exponent);
    std::shared_ptr<FbmSampler> fbm;
    if (cfg.driver == "fbm")
        fbm = std::make_shared<FbmSampler>(grid, cfg.hurst, cfg.fbm_method);

    auto replica = [&](int r) {
        ReplicaOutput out;
        const RngSpec rng{cfg.seed, static_cast<std::uint64_t>(r)};
        const PiecewiseLinearPath driver =
            cfg.driver == "bm" ? sample_bm(grid, cfg.dim, rng) : fbm->sample(cfg.dim, rng);

        // shared per-replica reference objects
        LiftedPath ref2, spp2, ref3, spp3;
        GroupElement ref_end;
        if (metric == DefectMetric::GoodSeq && cfg.level == 2) {
            ref2 = signature_lift(driver, 2);
            spp2 = s_double_prime(ref2);
        } else if (metric == DefectMetric::GoodSeq) {
            spp3 = s_double_prime(driver, 3);
        } else if (metric == DefectMetric::CqDistance ||
                   metric == DefectMetric::SpanL2) {
            ref2 = signature_lift(driver, cfg.level);
        } else {
            ref2 = signature_lift(driver, 2);
            ref_end = ref2.increment(0, ref2.n_points() - 1);
        }
        const PairSet ps = pairs_for(static_cast<int>(grid.size()));

        for (int lev : cfg.levels) {
            const auto t0 = std::chrono::steady_clock::now();
            const PiecewiseLinearPath coarse =
                linear_interpolant(driver, dyadic_times(lev));
            double defect = 0.0;
            Good2Terms terms;
            if (metric == DefectMetric::GoodSeq) {
                if (cfg.level == 2) {
                    const LiftedPath sp = s_prime_level2(coarse, ref2);
                    defect = holder_distance(sp, spp2, cfg.p, ps).distance;
                    terms = good2_terms(coarse, ref2, cfg.p, ps);
                } else {
                    const LiftedPath sp = s_prime_concat(coarse, driver, 3);
                    defect = holder_distance(sp, spp3, cfg.p, ps).distance;
                }
            } else if (metric == DefectMetric::CqDistance) {
                const LiftedPath cl = signature_lift(refine(coarse, grid), cfg.level);
                defect = holder_distance(cl, ref2, cfg.p, ps).distance;
            } else if (metric == DefectMetric::SpanL2) {
                const LiftedPath cl = signature_lift(refine(coarse, grid), cfg.level);
                defect = std::sqrt(span_l2_defect(cl, ref2));
            } else {
                defect = endpoint_l2_defect(driver, refine(coarse, grid), ref_end);
            }
            const auto t1 = std::chrono::steady_clock::now();
            out.defect.push_back(defect);
            out.terms.push_back(terms);
            out.wall_ms.push_back(
                std::chrono::duration<double, std::milli>(t1 - t0).count());
            out.aux.push_back(0.0);
        }
        return out;
    };

    RateStudyResult res;
    aggregate(res, run_replicas(cfg, replica), cfg);
    return res;
}

CounterexampleResult counterexample_study(double p, int base_grid, int halvings) {
    if (!(p > 2.0 && p < 3.0)) throw UsageError("counterexample_study needs p in (2,3)");
    if (base_grid < 8) throw UsageError("base grid too small");
    CounterexampleResult out;
    out.floor_constant = std::sqrt(2.0 * std::sqrt(2.0));
    out.above_floor = true;
    for (int j = 0; j <= halvings; ++j) {
        const int n = base_grid << j;
        std::vector<double> times(static_cast<std::size_t>(n) + 1);
        for (int k = 0; k <= n; ++k) times[k] = static_cast<double>(k) / n;
        const LiftedPath area = pure_area_path(times);

        PiecewiseLinearPath zero;
        zero.dim = 2;
        zero.times = times;
        zero.values.assign(times.size() * 2, 0.0);
        const double dz = good_sequence_defect(zero, area, p, pairs_for(n + 1));

        // shrinking smooth loops with unit area rate: m loops of area 1/m
        const int m = std::max(1, n / 16);
        const double r = 1.0 / std::sqrt(3.14159265358979323846 * m);
        PiecewiseLinearPath loops;
        loops.dim = 2;
        loops.times = times;
        loops.values.resize(times.size() * 2);
        for (std::size_t k = 0; k < times.size(); ++k) {
            const double th = 2.0 * 3.14159265358979323846 * m * times[k];
            loops.values[2 * k] = r * (std::cos(th) - 1.0);
            loops.values[2 * k + 1] = r * std::sin(th);
        }
        const double dl = good_sequence_defect(loops, area, p, pairs_for(n + 1));

        out.grid_sizes.push_back(n);
        out.mesh.push_back(1.0 / n);
        out.defect_zero.push_back(dz);
        out.defect_loops.push_back(dl);
        out.above_floor =
            out.above_floor && dz > out.floor_constant && dl > out.floor_constant;
    }
    return out;
}

RateStudyResult wong_zakai_study(const StudyConfig& cfg, const VectorFieldSet& vf,
                                 std::span<const double> y0, InitialCondition ic,
                                 int substeps) {
    cfg.validate();
    if (vf.drive_dim != cfg.dim) throw UsageError("vector field drive dim != cfg.dim");
    if (static_cast<int>(y0.size()) != vf.state_dim) throw UsageError("y0 size mismatch");
    const std::vector<double> grid = dyadic_times(cfg.fine_exponent);
    std::shared_ptr<FbmSampler> fbm;
    if (cfg.driver == "fbm")
        fbm = std::make_shared<FbmSampler>(grid, cfg.hurst, cfg.fbm_method);

    auto replica = [&](int r) {
        ReplicaOutput out;
        const RngSpec rng{cfg.seed, static_cast<std::uint64_t>(r)};
        const PiecewiseLinearPath driver =
            cfg.driver == "bm" ? sample_bm(grid, cfg.dim, rng) : fbm->sample(cfg.dim, rng);

        std::vector<double> y0r(y0.begin(), y0.end());
        if (ic == InitialCondition::DriverEndpoint) {
            auto end = driver.value(driver.n_points() - 1);
            for (int i = 0; i < vf.state_dim; ++i) y0r[i] = end[i % driver.dim];
        }

        const PiecewiseLinearPath yref = solve_ode(vf, y0r, driver, substeps).y;
        const LiftedPath yref_lift = signature_lift(yref, 2);
        const PairSet ps = pairs_for(static_cast<int>(grid.size()));

        for (int lev : cfg.levels) {
            const auto t0 = std::chrono::steady_clock::now();
            const PiecewiseLinearPath xk = linear_interpolant(driver, dyadic_times(lev));
            // solve along the interpolant on the fine grid: the comparison is
            // then the approximation error of the driver, not of y's chords
            const PiecewiseLinearPath yk =
                solve_ode(vf, y0r, refine(xk, grid), substeps).y;
            double sup = 0.0;
            for (std::size_t i = 0; i < yref.values.size(); ++i)
                sup = std::max(sup, std::fabs(yk.values[i] - yref.values[i]));
            const double defect =
                holder_distance(signature_lift(yk, 2), yref_lift, cfg.p, ps).distance;
            const auto t1 = std::chrono::steady_clock::now();
            out.defect.push_back(defect);
            out.aux.push_back(sup);
            out.terms.push_back({});
            out.wall_ms.push_back(
                std::chrono::duration<double, std::milli>(t1 - t0).count());
        }
        return out;
    };

    RateStudyResult res;
    aggregate(res, run_replicas(cfg, replica), cfg);
    return res;
}

LemmaSuiteReport covariance_lemma_suite(double H, double pprime,
                                        std::span<const int> sizes, std::uint64_t seed,
                                        int wick_samples) {
    LemmaSuiteReport rep;
    for (int n : sizes) {
        std::vector<double> D(static_cast<std::size_t>(n) + 1);
        for (int k = 0; k <= n; ++k) D[k] = static_cast<double>(k) / n;
        const FinalLemmaCheck chk = finallemma_check(D, H, pprime);
        rep.sizes.push_back(n);
        rep.ratio_abs.push_back(chk.lhs / chk.rhs_shape);
        rep.ratio_sq.push_back(chk.lhs_sq / chk.rhs_shape);
    }
    rep.max_ratio_abs = *std::max_element(rep.ratio_abs.begin(), rep.ratio_abs.end());
    rep.max_ratio_sq = *std::max_element(rep.ratio_sq.begin(), rep.ratio_sq.end());
    rep.sq_nonincreasing = true;
    for (std::size_t i = 1; i < rep.ratio_sq.size(); ++i)
        rep.sq_nonincreasing =
            rep.sq_nonincreasing && rep.ratio_sq[i] <= rep.ratio_sq[i - 1] + 1e-12;

    // monotonicity lattice: quadruples i < j < k < l on a 20-point grid
    const int G = 20;
    auto cov = [&](double a, double b, double c, double d) {
        return increment_covariance(a, b, c, d, H);
    };
    // shrink factors producing nested sub-intervals
    const double shr[3][2] = {{0.0, 0.0}, {0.25, 0.25}, {0.4, 0.1}};
    int viol = 0;
    for (int i = 0; i < G; ++i)
        for (int j = i + 1; j < G; ++j)
            for (int k = j; k < G; ++k)
                for (int l = k + 1; l <= G; ++l) {
                    const double sp = static_cast<double>(i) / G,
                                 tp = static_cast<double>(j) / G,
                                 s = static_cast<double>(k) / G,
                                 t = static_cast<double>(l) / G;
                    if (j < k) {
                        // nested-pair links that hold for every H: positivity
                        // and the outer variance bound
                        const double c1 = cov(sp, tp, sp, s), c2 = cov(sp, tp, sp, t),
                                     c3 = cov(sp, t, sp, t);
                        if (!(c1 >= -1e-12 && c2 >= -1e-12 && c1 <= c3 + 1e-12 &&
                              c2 <= c3 + 1e-12))
                            ++viol;
                        // the middle link needs positively correlated adjacent
                        // increments, i.e. H >= 1/2
                        if (H >= 0.5 && !(c1 <= c2 + 1e-12)) ++viol;
                    }
                    if (H < 0.5) {
                        // disjoint pairs: shrinking to nested sub-intervals only
                        // lowers -E, which stays nonnegative
                        const double eouter = cov(s, t, sp, tp);
                        for (const auto& f : shr) {
                            const double up = sp + f[0] * (tp - sp),
                                         vp = tp - f[1] * (tp - sp);
                            const double u = s + f[0] * (t - s), v = t - f[1] * (t - s);
                            const double einner = cov(u, v, up, vp);
                            if (!(-einner >= -1e-12 && -einner <= -eouter + 1e-12))
                                ++viol;
                        }
                    }
                }
    rep.increasing_violations = viol;

    // Wick fourth moment against Monte Carlo
    {
        // fixed SPD covariance C = A A^T
        const double A[4][4] = {{1.0, 0.0, 0.0, 0.0},
                                {0.5, 0.9, 0.0, 0.0},
                                {-0.3, 0.4, 0.8, 0.0},
                                {0.2, -0.6, 0.1, 0.7}};
        double C[4][4] = {};
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                for (int k = 0; k < 4; ++k) C[i][j] += A[i][k] * A[j][k];
        rep.wick_formula = wick_fourth_moment(C[0][1], C[0][2], C[0][3], C[1][2],
                                              C[1][3], C[2][3]);
        Rng gen(RngSpec{seed, 0x81c4u});
        double sum = 0.0, sumsq = 0.0;
        for (int it = 0; it < wick_samples; ++it) {
            double z[4], x[4] = {};
            for (auto& v : z) v = gen.normal();
            for (int i = 0; i < 4; ++i)
                for (int k = 0; k <= i; ++k) x[i] += A[i][k] * z[k];
            const double prod = x[0] * x[1] * x[2] * x[3];
            sum += prod;
            sumsq += prod * prod;
        }
        rep.wick_mc = sum / wick_samples;
        const double var = (sumsq / wick_samples - rep.wick_mc * rep.wick_mc);
        rep.wick_band = 4.0 * std::sqrt(std::max(0.0, var) / wick_samples);
        rep.wick_ok = std::fabs(rep.wick_mc - rep.wick_formula) <= rep.wick_band;
    }
    return rep;
}

}  // namespace roughkit
