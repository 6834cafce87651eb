#include "spde/report.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "spde/errors.hpp"
#include "spde/field_io.hpp"

namespace spde {

using nlohmann::json;

namespace {

json matrix_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            row.push_back(m(i, j));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

json xy_json(const std::vector<XY>& v) {
    json out = json::array();
    for (const XY& p : v) {
        out.push_back({p.x, p.y});
    }
    return out;
}

json statistic_json(const StatisticSummary& s) {
    json hist = json::array();
    for (const HistogramBin& b : s.hist) {
        hist.push_back({{"left", b.left},
                        {"right", b.right},
                        {"count", b.count},
                        {"density", b.density},
                        {"normal_density", b.normal_density}});
    }
    return {{"name", s.name},
            {"truth", s.truth},
            {"rate", s.rate},
            {"limit_variance", s.limit_variance},
            {"n", s.n},
            {"mean", s.mean},
            {"variance", s.variance},
            {"ks", s.ks},
            {"ks_critical_1pct", s.ks_critical_1pct},
            {"studentized_mean", s.studentized_mean},
            {"studentized_variance", s.studentized_variance},
            {"standardized", s.standardized},
            {"studentized", s.studentized},
            {"ecdf", xy_json(s.ecdf)},
            {"qq", xy_json(s.qq)},
            {"hist", hist}};
}

const char* flag(bool b) { return b ? "1" : "0"; }

}  // namespace

std::string format_double(double x) {
    if (std::isnan(x)) {
        return "nan";
    }
    if (std::isinf(x)) {
        return x > 0 ? "inf" : "-inf";
    }
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

json record_to_json(const EstimateRecord& r) {
    return {{"rep_id", r.rep_id},
            {"seed", r.seed},
            {"regime", to_string(r.regime)},
            {"sigma0_sq", r.sigma0_sq},
            {"eta", r.eta},
            {"sigma_sq", r.sigma_sq},
            {"lambda1", r.lambda1},
            {"theta2", r.theta2},
            {"theta1", r.theta1},
            {"theta0", r.theta0},
            {"contrast_objective", r.contrast_objective},
            {"eta_at_bound", r.eta_at_bound},
            {"sigma0_clamped", r.sigma0_clamped},
            {"qmle_fallback", r.qmle_fallback}};
}

json report_to_json(const StudyReport& report, const json& run_config) {
    json records = json::array();
    for (const EstimateRecord& r : report.records) {
        records.push_back(record_to_json(r));
    }
    json failures = json::array();
    for (const ReplicationFailure& f : report.failures) {
        failures.push_back({{"rep_id", f.rep_id}, {"message", f.message}});
    }
    json stats = json::array();
    for (const StatisticSummary& s : report.statistics) {
        stats.push_back(statistic_json(s));
    }
    json rates = json::object();
    for (const auto& [name, value] : report.rate_diagnostics) {
        rates[name] = value;
    }
    return {{"config", run_config},
            {"sampler", rng::kSamplerName},
            {"gamma", report.gamma},
            {"contrast_cov", matrix_json(report.contrast_cov)},
            {"contrast_cov_fixed_m", matrix_json(report.contrast_cov_fixed_m)},
            {"adaptive_cov", matrix_json(report.adaptive_cov)},
            {"rate_diagnostics", rates},
            {"statistics", stats},
            {"records", records},
            {"failures", failures}};
}

std::string records_csv(const std::vector<EstimateRecord>& records) {
    std::ostringstream os;
    os << "rep_id,seed,regime,sigma0_sq,eta,sigma_sq,lambda1,theta2,theta1,theta0,contrast_objective,"
          "eta_at_bound,sigma0_clamped,qmle_fallback\n";
    for (const EstimateRecord& r : records) {
        os << r.rep_id << ',' << r.seed << ',' << to_string(r.regime) << ',' << format_double(r.sigma0_sq) << ','
           << format_double(r.eta) << ',' << format_double(r.sigma_sq) << ',' << format_double(r.lambda1) << ','
           << format_double(r.theta2) << ',' << format_double(r.theta1) << ',' << format_double(r.theta0) << ','
           << format_double(r.contrast_objective) << ',' << flag(r.eta_at_bound) << ',' << flag(r.sigma0_clamped)
           << ',' << flag(r.qmle_fallback) << '\n';
    }
    return os.str();
}

std::string summary_csv(const StudyReport& report) {
    std::ostringstream os;
    os << "statistic,value\n";
    auto row = [&](const std::string& name, double v) { os << name << ',' << format_double(v) << '\n'; };
    row("replications", static_cast<double>(report.config.replications));
    row("records", static_cast<double>(report.records.size()));
    row("failures", static_cast<double>(report.failures.size()));
    row("gamma", report.gamma);
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            row("contrast_cov_" + std::to_string(i) + std::to_string(j), report.contrast_cov(i, j));
        }
    }
    for (Eigen::Index i = 0; i < report.adaptive_cov.rows(); ++i) {
        for (Eigen::Index j = 0; j < report.adaptive_cov.cols(); ++j) {
            row("adaptive_cov_" + std::to_string(i) + std::to_string(j), report.adaptive_cov(i, j));
        }
    }
    for (const auto& [name, value] : report.rate_diagnostics) {
        row("rate:" + name, value);
    }
    for (const StatisticSummary& s : report.statistics) {
        row(s.name + ".truth", s.truth);
        row(s.name + ".rate", s.rate);
        row(s.name + ".limit_variance", s.limit_variance);
        row(s.name + ".n", static_cast<double>(s.n));
        row(s.name + ".mean", s.mean);
        row(s.name + ".variance", s.variance);
        row(s.name + ".ks", s.ks);
        row(s.name + ".ks_critical_1pct", s.ks_critical_1pct);
        row(s.name + ".studentized_mean", s.studentized_mean);
        row(s.name + ".studentized_variance", s.studentized_variance);
    }
    return os.str();
}

std::string ecdf_csv(const StatisticSummary& s) {
    std::ostringstream os;
    os << "ecdf_x,ecdf_y\n";
    for (const XY& p : s.ecdf) {
        os << format_double(p.x) << ',' << format_double(p.y) << '\n';
    }
    return os.str();
}

std::string qq_csv(const StatisticSummary& s) {
    std::ostringstream os;
    os << "q_theoretical,q_empirical\n";
    for (const XY& p : s.qq) {
        os << format_double(p.x) << ',' << format_double(p.y) << '\n';
    }
    return os.str();
}

std::string hist_csv(const StatisticSummary& s) {
    std::ostringstream os;
    os << "bin_left,bin_right,count,density,normal_density\n";
    for (const HistogramBin& b : s.hist) {
        os << format_double(b.left) << ',' << format_double(b.right) << ',' << b.count << ','
           << format_double(b.density) << ',' << format_double(b.normal_density) << '\n';
    }
    return os.str();
}

json sidecar_json(const std::string& file_name, const json& run_config, std::uint64_t seed) {
    return {{"file", file_name}, {"config", run_config}, {"seed", seed}, {"sampler", rng::kSamplerName}};
}

void write_with_sidecar(const std::filesystem::path& path, const std::string& content, const json& run_config,
                        std::uint64_t seed) {
    write_text_file(path, content);
    write_text_file(path.string() + ".json",
                    sidecar_json(path.filename().string(), run_config, seed).dump(2) + "\n");
}

std::vector<std::filesystem::path> write_study_outputs(const std::filesystem::path& dir, const StudyReport& report,
                                                       const json& run_config) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create " + dir.string() + ": " + ec.message());
    }
    const std::uint64_t seed = report.config.base_seed;
    std::vector<std::filesystem::path> written;
    auto emit = [&](const std::string& name, const std::string& content) {
        const std::filesystem::path p = dir / name;
        write_with_sidecar(p, content, run_config, seed);
        written.push_back(p);
    };
    const std::filesystem::path rp = dir / "report.json";
    write_text_file(rp, report_to_json(report, run_config).dump(2) + "\n");
    written.push_back(rp);
    emit("records.csv", records_csv(report.records));
    emit("summary.csv", summary_csv(report));
    for (const StatisticSummary& s : report.statistics) {
        emit(s.name + "_ecdf.csv", ecdf_csv(s));
        emit(s.name + "_qq.csv", qq_csv(s));
        emit(s.name + "_hist.csv", hist_csv(s));
    }
    return written;
}

}  // namespace spde
