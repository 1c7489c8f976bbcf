#include "roughkit/io.hpp"

#include <cstdio>
#include <cstring>
#include <ctime>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace roughkit {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double(const std::string& s) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str()) throw UsageError("bad numeric field: " + s);
    return v;
}

std::ofstream open_out(const std::string& file) {
    std::ofstream os(file);
    if (!os) throw UsageError("cannot open for writing: " + file);
    return os;
}

std::ifstream open_in(const std::string& file) {
    std::ifstream is(file);
    if (!is) throw UsageError("cannot open for reading: " + file);
    return is;
}

// reads the first non-comment line (the header); comments before it are skipped
std::string read_header(std::ifstream& is) {
    std::string line;
    while (std::getline(is, line)) {
        if (!line.empty() && line[0] == '#') continue;
        return line;
    }
    throw UsageError("empty csv file");
}

}  // namespace

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_path_csv(const PiecewiseLinearPath& path, const std::string& file,
                    const std::optional<RngSpec>& rng) {
    path.validate();
    std::ofstream os = open_out(file);
    os << "# roughkit " << kVersion << "\n";
    if (rng) os << "# seed=" << rng->seed << ",stream=" << rng->stream << "\n";
    os << "t";
    for (int i = 1; i <= path.dim; ++i) os << ",x" << i;
    os << "\n";
    for (int k = 0; k < path.n_points(); ++k) {
        os << format_g17(path.times[k]);
        auto v = path.value(k);
        for (double x : v) os << "," << format_g17(x);
        os << "\n";
    }
}

PiecewiseLinearPath read_path_csv(const std::string& file) {
    std::ifstream is = open_in(file);
    const auto header = split_csv(read_header(is));
    if (header.size() < 2 || header[0] != "t")
        throw UsageError("path csv must start with header t,x1,...");
    PiecewiseLinearPath out;
    out.dim = static_cast<int>(header.size()) - 1;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto f = split_csv(line);
        if (f.size() != header.size()) throw UsageError("csv row width mismatch");
        out.times.push_back(parse_double(f[0]));
        for (std::size_t i = 1; i < f.size(); ++i)
            out.values.push_back(parse_double(f[i]));
    }
    out.validate();
    return out;
}

void write_lifted_csv(const LiftedPath& lp, const std::string& file) {
    std::ofstream os = open_out(file);
    os << "# roughkit " << kVersion << "\n";
    os << "t";
    const int d = lp.dim;
    for (int i = 1; i <= d; ++i) os << ",g1_" << i;
    for (int i = 1; i <= d; ++i)
        for (int j = 1; j <= d; ++j) os << ",g2_" << i << j;
    if (lp.level == 3)
        for (int i = 1; i <= d; ++i)
            for (int j = 1; j <= d; ++j)
                for (int k = 1; k <= d; ++k) os << ",g3_" << i << j << k;
    os << "\n";
    for (int k = 0; k < lp.n_points(); ++k) {
        os << format_g17(lp.times[k]);
        const TruncatedTensor& t = lp.points[k].t;
        for (double x : t.c1) os << "," << format_g17(x);
        for (double x : t.c2) os << "," << format_g17(x);
        for (double x : t.c3) os << "," << format_g17(x);
        os << "\n";
    }
}

LiftedPath read_lifted_csv(const std::string& file) {
    std::ifstream is = open_in(file);
    const auto header = split_csv(read_header(is));
    int d = 0, level = 2;
    for (const auto& h : header) {
        if (h.rfind("g1_", 0) == 0) ++d;
        if (h.rfind("g3_", 0) == 0) level = 3;
    }
    if (d < 1 || header[0] != "t") throw UsageError("bad lifted csv header");
    const std::size_t want = 1 + static_cast<std::size_t>(d) + static_cast<std::size_t>(d) * d +
                             (level == 3 ? static_cast<std::size_t>(d) * d * d : 0);
    if (header.size() != want) throw UsageError("lifted csv header width mismatch");

    LiftedPath out;
    out.dim = d;
    out.level = level;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto f = split_csv(line);
        if (f.size() != want) throw UsageError("lifted csv row width mismatch");
        out.times.push_back(parse_double(f[0]));
        TruncatedTensor t = TruncatedTensor::zero(d, level);
        t.c0 = 1.0;
        std::size_t pos = 1;
        for (auto& x : t.c1) x = parse_double(f[pos++]);
        for (auto& x : t.c2) x = parse_double(f[pos++]);
        for (auto& x : t.c3) x = parse_double(f[pos++]);
        out.points.emplace_back(std::move(t));
    }
    if (out.points.size() < 2) throw UsageError("lifted csv has fewer than 2 rows");
    return out;
}

void write_metric_report_csv(const MetricReport& rep, const std::string& file) {
    std::ofstream os = open_out(file);
    os << "distance,s,t,basepoint_term\n";
    os << format_g17(rep.distance) << "," << format_g17(rep.s) << ","
       << format_g17(rep.t) << "," << format_g17(rep.basepoint_term) << "\n";
}

void write_study_csv(const RateStudyResult& res, const std::string& file) {
    std::ofstream os = open_out(file);
    os << "# roughkit " << kVersion << "\n";
    os << "# seed=" << res.config.seed << ",stream=0.." << (res.config.replicas - 1)
       << "\n";
    os << "replica,level,mesh,defect,a1,a2,a4,wall_ms\n";
    for (int r = 0; r < res.replicas; ++r) {
        if (res.raw_defect[r].empty()) continue;
        for (std::size_t l = 0; l < res.config.levels.size(); ++l) {
            const Good2Terms terms =
                res.raw_terms[r].empty() ? Good2Terms{} : res.raw_terms[r][l];
            os << r << "," << res.config.levels[l] << "," << format_g17(res.mesh[l])
               << "," << format_g17(res.raw_defect[r][l]) << ","
               << format_g17(terms.a1) << "," << format_g17(terms.a2) << ","
               << format_g17(terms.a4) << "," << format_g17(res.raw_wall_ms[r][l])
               << "\n";
        }
    }
}

void write_study_summary_json(const RateStudyResult& res, const std::string& file) {
    nlohmann::json j;
    j["slope"] = res.slope;
    j["slope_ci"] = {res.slope_ci.first, res.slope_ci.second};
    j["intercept"] = res.intercept;
    j["replicas"] = res.replicas;
    j["aborted"] = res.aborted;
    j["mesh"] = res.mesh;
    j["defect_mean"] = res.defect_mean;
    j["defect_q"] = res.defect_q;
    j["defect_se"] = res.defect_se;

    nlohmann::json cfg;
    cfg["driver"] = res.config.driver;
    cfg["hurst"] = res.config.hurst;
    cfg["level"] = res.config.level;
    cfg["p"] = res.config.p;
    cfg["pprime"] = res.config.pprime;
    cfg["fine"] = res.config.fine_exponent;
    cfg["levels"] = res.config.levels;
    cfg["replicas"] = res.config.replicas;
    cfg["q"] = res.config.q;
    cfg["seed"] = res.config.seed;
    cfg["dim"] = res.config.dim;
    cfg["fbm_method"] =
        res.config.fbm_method == FbmMethod::Cholesky ? "cholesky" : "davies_harte";
    j["config"] = cfg;

    char ts[32];
    const std::time_t now = std::time(nullptr);
    std::tm tmv{};
    gmtime_r(&now, &tmv);
    std::strftime(ts, sizeof ts, "%Y-%m-%dT%H:%M:%SZ", &tmv);
    j["meta"] = {{"version", kVersion}, {"timestamp", ts}};

    std::ofstream os = open_out(file);
    os << j.dump(2) << "\n";
}

}  // namespace roughkit
