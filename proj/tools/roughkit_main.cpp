// roughkit command line: sample drivers, lift paths, evaluate metrics, run
// the convergence studies, and emit CSV/JSON artifacts.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "roughkit/experiments.hpp"
#include "roughkit/io.hpp"

namespace rk = roughkit;

namespace {

std::vector<int> parse_range(const std::string& s, bool geometric) {
    // "3:8" -> 3,4,...,8 ; geometric "4:256" -> 4,8,...,256
    const auto pos = s.find(':');
    std::vector<int> out;
    if (pos == std::string::npos) {
        out.push_back(std::stoi(s));
        return out;
    }
    const int lo = std::stoi(s.substr(0, pos));
    const int hi = std::stoi(s.substr(pos + 1));
    if (lo < 1 || hi < lo) throw rk::UsageError("bad range: " + s);
    if (geometric)
        for (int v = lo; v <= hi; v *= 2) out.push_back(v);
    else
        for (int v = lo; v <= hi; ++v) out.push_back(v);
    return out;
}


// flat key=value config: unknown keys are a hard error, command-line flags
// take precedence over file values
void apply_config(CLI::App* cmd, const std::string& path) {
    std::ifstream is(path);
    if (!is) throw rk::UsageError("cannot open config file: " + path);
    std::string line;
    int ln = 0;
    auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        const auto b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    while (std::getline(is, line)) {
        ++ln;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw rk::UsageError("config line " + std::to_string(ln) + " is not key=value");
        const std::string key = trim(t.substr(0, eq));
        const std::string val = trim(t.substr(eq + 1));
        CLI::Option* opt = cmd->get_option_no_throw("--" + key);
        if (opt == nullptr || key == "config")
            throw rk::UsageError("unknown config key: " + key);
        if (opt->count() == 0) {  // flags override file values
            opt->add_result(val);
            opt->run_callback();
        }
    }
}

rk::VectorFieldSet make_preset(const std::string& name, double mu, double sigma,
                               int drive_dim) {
    if (name == "linear") return rk::make_linear_scalar_fields(mu, sigma);
    if (name == "additive") return rk::make_additive_fields(drive_dim);
    if (name == "heisenberg") return rk::make_heisenberg_fields();
    throw rk::UsageError("unknown vector field preset: " + name);
}

struct StudyFlags {
    rk::StudyConfig cfg;
    std::string levels = "3:6";
    std::string out_dir = ".";
    std::string method = "cholesky";
    std::string config_path;
};

void add_study_options(CLI::App* cmd, StudyFlags& f) {
    cmd->add_option("--driver", f.cfg.driver, "bm or fbm");
    cmd->add_option("--hurst", f.cfg.hurst, "Hurst parameter for fbm");
    cmd->add_option("--level", f.cfg.level, "lift level (2 or 3)");
    cmd->add_option("--p", f.cfg.p, "Hoelder exponent parameter");
    cmd->add_option("--pprime", f.cfg.pprime, "p' parameter of the covariance lemma");
    cmd->add_option("--fine", f.cfg.fine_exponent, "fine grid exponent");
    cmd->add_option("--levels", f.levels, "coarse dyadic levels, e.g. 3:8");
    cmd->add_option("--replicas", f.cfg.replicas, "Monte-Carlo replicas");
    cmd->add_option("--q", f.cfg.q, "moment order of the aggregate");
    cmd->add_option("--seed", f.cfg.seed, "rng seed");
    cmd->add_option("--dim", f.cfg.dim, "driver dimension");
    cmd->add_option("--threads", f.cfg.threads, "replica thread cap")
        ->envname("ROUGHKIT_THREADS");
    cmd->add_option("--method", f.method, "fbm sampler: cholesky or davies-harte");
    cmd->add_option("--out", f.out_dir, "output directory");
    cmd->add_option("--config", f.config_path, "key=value config file (flags override)");
}

void finish_study_flags(StudyFlags& f) {
    f.cfg.levels = parse_range(f.levels, false);
    if (f.method == "davies-harte" || f.method == "davies_harte")
        f.cfg.fbm_method = rk::FbmMethod::DaviesHarte;
    else if (f.method == "cholesky")
        f.cfg.fbm_method = rk::FbmMethod::Cholesky;
    else
        throw rk::UsageError("unknown fbm method: " + f.method);
    std::filesystem::create_directories(f.out_dir);
}

void emit_study(const rk::RateStudyResult& res, const std::string& dir) {
    rk::write_study_csv(res, dir + "/study.csv");
    rk::write_study_summary_json(res, dir + "/study_summary.json");
    std::printf("slope=%.6f ci=[%.6f,%.6f] levels=%zu replicas=%d aborted=%d\n",
                res.slope, res.slope_ci.first, res.slope_ci.second, res.mesh.size(),
                res.replicas, res.aborted);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"roughkit: signature lifts, rough-path metrics and rate studies"};
    app.require_subcommand(1);

    // --- sample ---
    auto* c_sample = app.add_subcommand("sample", "sample a bm/fbm driver to CSV");
    struct {
        std::string driver = "bm", method = "cholesky", out = "path.csv";
        double hurst = 0.5;
        int dim = 2, fine = 8;
        std::uint64_t seed = 0, stream = 0;
    } smp;
    c_sample->add_option("--driver", smp.driver);
    c_sample->add_option("--hurst", smp.hurst);
    c_sample->add_option("--dim", smp.dim);
    c_sample->add_option("--fine", smp.fine, "grid = 2^fine segments");
    c_sample->add_option("--method", smp.method);
    c_sample->add_option("--seed", smp.seed);
    c_sample->add_option("--stream", smp.stream);
    c_sample->add_option("--out", smp.out);
    std::string sample_config;
    c_sample->add_option("--config", sample_config);

    // --- lift ---
    auto* c_lift = app.add_subcommand("lift", "signature-lift a path CSV");
    struct {
        std::string in, out = "lifted.csv";
        int level = 2;
    } lft;
    c_lift->add_option("--in", lft.in)->required();
    c_lift->add_option("--level", lft.level);
    c_lift->add_option("--out", lft.out);
    std::string lift_config;
    c_lift->add_option("--config", lift_config);

    // --- metric ---
    auto* c_metric = app.add_subcommand("metric", "Hoelder distance of two lifted CSVs");
    struct {
        std::string a, b, out = "metric.csv", pairs = "all";
        double p = 2.5;
    } met;
    c_metric->add_option("--a", met.a)->required();
    c_metric->add_option("--b", met.b)->required();
    c_metric->add_option("--p", met.p);
    c_metric->add_option("--pairs", met.pairs, "all or dyadic");
    c_metric->add_option("--out", met.out);
    std::string metric_config;
    c_metric->add_option("--config", metric_config);

    // --- studies ---
    auto* c_good = app.add_subcommand("good-seq", "good-sequence defect rate study");
    StudyFlags gf;
    std::string gmetric = "defect";
    add_study_options(c_good, gf);
    c_good->add_option("--metric", gmetric, "defect, cq or endpoint");

    auto* c_ce = app.add_subcommand("counterexample", "pure-area counterexample defects");
    struct {
        double p = 2.5;
        int grid = 64, halvings = 6;
        std::string out_dir = ".";
    } cex;
    c_ce->add_option("--p", cex.p);
    c_ce->add_option("--grid", cex.grid);
    c_ce->add_option("--halvings", cex.halvings);
    c_ce->add_option("--out", cex.out_dir);
    std::string ce_config;
    c_ce->add_option("--config", ce_config);

    auto* c_wz = app.add_subcommand("wong-zakai", "Wong-Zakai convergence study");
    StudyFlags wf;
    wf.cfg.dim = 1;
    std::string wz_vf = "linear", wz_y0mode = "fixed";
    double wz_mu = 0.0, wz_sigma = 1.0, wz_y0 = 1.0;
    int wz_substeps = 4;
    add_study_options(c_wz, wf);
    c_wz->add_option("--vf", wz_vf, "vector field preset");
    c_wz->add_option("--mu", wz_mu);
    c_wz->add_option("--sigma", wz_sigma);
    c_wz->add_option("--y0", wz_y0, "initial state (replicated over components)");
    c_wz->add_option("--y0-mode", wz_y0mode, "fixed or endpoint");
    c_wz->add_option("--substeps", wz_substeps);

    auto* c_lem = app.add_subcommand("lemmas", "covariance lemma suite");
    struct {
        double hurst = 0.4, pprime = 3.0;
        std::string sizes = "4:256", out_dir = ".";
        std::uint64_t seed = 0;
    } lem;
    c_lem->add_option("--hurst", lem.hurst);
    c_lem->add_option("--pprime", lem.pprime);
    c_lem->add_option("--sizes", lem.sizes, "geometric range, e.g. 4:256");
    c_lem->add_option("--seed", lem.seed);
    c_lem->add_option("--out", lem.out_dir);
    std::string lem_config;
    c_lem->add_option("--config", lem_config);

    auto* c_solve = app.add_subcommand("solve", "solve an (R)DE along a driver CSV");
    struct {
        std::string in, out = "solution.csv", vf = "linear";
        double mu = 0.0, sigma = 1.0, y0 = 1.0;
        int substeps = 4;
        bool rough = false;
    } slv;
    c_solve->add_option("--in", slv.in)->required();
    c_solve->add_option("--vf", slv.vf);
    c_solve->add_option("--mu", slv.mu);
    c_solve->add_option("--sigma", slv.sigma);
    c_solve->add_option("--y0", slv.y0);
    c_solve->add_option("--substeps", slv.substeps);
    c_solve->add_flag("--rough", slv.rough, "level-2 rough stepping instead of RK4");
    c_solve->add_option("--out", slv.out);
    std::string solve_config;
    c_solve->add_option("--config", solve_config);

    try {
        app.parse(argc, argv);

        if (!sample_config.empty()) apply_config(c_sample, sample_config);
        if (!lift_config.empty()) apply_config(c_lift, lift_config);
        if (!metric_config.empty()) apply_config(c_metric, metric_config);
        if (!gf.config_path.empty()) apply_config(c_good, gf.config_path);
        if (!ce_config.empty()) apply_config(c_ce, ce_config);
        if (!wf.config_path.empty()) apply_config(c_wz, wf.config_path);
        if (!lem_config.empty()) apply_config(c_lem, lem_config);
        if (!solve_config.empty()) apply_config(c_solve, solve_config);

        if (*c_sample) {
            const auto grid = rk::dyadic_times(smp.fine);
            const rk::RngSpec rng{smp.seed, smp.stream};
            rk::PiecewiseLinearPath p;
            if (smp.driver == "bm") {
                p = rk::sample_bm(grid, smp.dim, rng);
            } else if (smp.driver == "fbm") {
                rk::FbmMethod method;
                if (smp.method == "cholesky")
                    method = rk::FbmMethod::Cholesky;
                else if (smp.method == "davies-harte" || smp.method == "davies_harte")
                    method = rk::FbmMethod::DaviesHarte;
                else
                    throw rk::UsageError("unknown fbm method: " + smp.method);
                p = rk::sample_fbm(grid, smp.dim, smp.hurst, method, rng);
            } else {
                throw rk::UsageError("unknown driver: " + smp.driver);
            }
            rk::write_path_csv(p, smp.out, rng);
            std::printf("wrote %s (%d points, dim %d)\n", smp.out.c_str(), p.n_points(),
                        p.dim);
        } else if (*c_lift) {
            const auto p = rk::read_path_csv(lft.in);
            rk::write_lifted_csv(rk::signature_lift(p, lft.level), lft.out);
            std::printf("wrote %s\n", lft.out.c_str());
        } else if (*c_metric) {
            const auto a = rk::read_lifted_csv(met.a);
            const auto b = rk::read_lifted_csv(met.b);
            const auto ps =
                met.pairs == "dyadic" ? rk::PairSet::Dyadic : rk::PairSet::All;
            const auto rep = rk::holder_distance(a, b, met.p, ps);
            rk::write_metric_report_csv(rep, met.out);
            std::printf("distance=%.17g witness=(%g,%g) basepoint=%.17g\n", rep.distance,
                        rep.s, rep.t, rep.basepoint_term);
        } else if (*c_good) {
            finish_study_flags(gf);
            rk::DefectMetric m = rk::DefectMetric::GoodSeq;
            if (gmetric == "cq")
                m = rk::DefectMetric::CqDistance;
            else if (gmetric == "endpoint")
                m = rk::DefectMetric::EndpointL2;
            else if (gmetric != "defect")
                throw rk::UsageError("unknown study metric: " + gmetric);
            emit_study(rk::run_rate_study(gf.cfg, m), gf.out_dir);
        } else if (*c_ce) {
            std::filesystem::create_directories(cex.out_dir);
            const auto res = rk::counterexample_study(cex.p, cex.grid, cex.halvings);
            std::ofstream os(cex.out_dir + "/counterexample.csv");
            os << "grid,mesh,defect_zero,defect_loops\n";
            for (std::size_t i = 0; i < res.mesh.size(); ++i)
                os << res.grid_sizes[i] << "," << rk::format_g17(res.mesh[i]) << ","
                   << rk::format_g17(res.defect_zero[i]) << ","
                   << rk::format_g17(res.defect_loops[i]) << "\n";
            std::printf("%s floor=%.12f min_defect=%.12f\n",
                        res.above_floor ? "NOT_GOOD_SEQUENCE" : "FLOOR_VIOLATED",
                        res.floor_constant,
                        *std::min_element(res.defect_zero.begin(), res.defect_zero.end()));
            if (!res.above_floor) throw rk::StudyError("counterexample floor violated");
        } else if (*c_wz) {
            finish_study_flags(wf);
            const auto vf = make_preset(wz_vf, wz_mu, wz_sigma, wf.cfg.dim);
            if (vf.drive_dim != wf.cfg.dim)
                wf.cfg.dim = vf.drive_dim;  // presets pin the drive dimension
            std::vector<double> y0(static_cast<std::size_t>(vf.state_dim), wz_y0);
            const auto ic = wz_y0mode == "endpoint" ? rk::InitialCondition::DriverEndpoint
                                                    : rk::InitialCondition::Fixed;
            emit_study(rk::wong_zakai_study(wf.cfg, vf, y0, ic, wz_substeps), wf.out_dir);
        } else if (*c_lem) {
            std::filesystem::create_directories(lem.out_dir);
            const auto sizes = parse_range(lem.sizes, true);
            const auto rep = rk::covariance_lemma_suite(lem.hurst, lem.pprime, sizes,
                                                        lem.seed);
            std::ofstream os(lem.out_dir + "/lemmas.csv");
            os << "n,ratio_abs,ratio_sq\n";
            for (std::size_t i = 0; i < rep.sizes.size(); ++i)
                os << rep.sizes[i] << "," << rk::format_g17(rep.ratio_abs[i]) << ","
                   << rk::format_g17(rep.ratio_sq[i]) << "\n";
            std::printf(
                "max_ratio_abs=%.6f max_ratio_sq=%.6f sq_nonincreasing=%d "
                "increasing_violations=%d wick_ok=%d\n",
                rep.max_ratio_abs, rep.max_ratio_sq, rep.sq_nonincreasing ? 1 : 0,
                rep.increasing_violations, rep.wick_ok ? 1 : 0);
            if (rep.increasing_violations > 0 || !rep.wick_ok)
                throw rk::StudyError("covariance lemma suite reported violations");
        } else if (*c_solve) {
            const auto x = rk::read_path_csv(slv.in);
            const auto vf = make_preset(slv.vf, slv.mu, slv.sigma, x.dim);
            if (vf.drive_dim != x.dim)
                throw rk::UsageError("vector field drive dim != driver dim");
            std::vector<double> y0(static_cast<std::size_t>(vf.state_dim), slv.y0);
            rk::RDESolution sol;
            std::string scheme;
            if (slv.rough) {
                sol = rk::solve_rde_level2(vf, y0, rk::signature_lift(x, 2));
                scheme = "rde_level2";
            } else {
                sol = rk::solve_ode(vf, y0, x, slv.substeps);
                scheme = "rk4";
            }
            rk::write_path_csv(sol.y, slv.out);
            // carry the driver's rng provenance through when the file has it
            std::string rng_line;
            {
                std::ifstream din(slv.in);
                std::string l;
                while (std::getline(din, l) && !l.empty() && l[0] == '#')
                    if (l.rfind("# seed=", 0) == 0) rng_line = l.substr(2);
            }
            std::ofstream mf(slv.out + ".manifest.jsonl");
            mf << "{\"scheme\":\"" << scheme << "\",\"mesh\":"
               << rk::format_g17(1.0 / (x.n_points() - 1)) << ",\"substeps\":"
               << slv.substeps << ",\"vf\":\"" << slv.vf << "\",\"driver\":\""
               << slv.in << "\"" 
               << (rng_line.empty() ? "" : ",\"driver_rng\":\"" + rng_line + "\"")
               << "}\n";
            std::printf("wrote %s\n", slv.out.c_str());
        }
        return 0;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
        std::fprintf(stderr, "ERROR 1: %s\n", e.what());
        return 1;
    } catch (const rk::UsageError& e) {
        std::fprintf(stderr, "ERROR 1: %s\n", e.what());
        return 1;
    } catch (const rk::NumericError& e) {
        std::fprintf(stderr, "ERROR 2: %s\n", e.what());
        return 2;
    } catch (const rk::StudyError& e) {
        std::fprintf(stderr, "ERROR 3: %s\n", e.what());
        return 3;
    }
}
