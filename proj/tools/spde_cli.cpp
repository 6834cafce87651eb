// Command-line front end: simulate, estimate, study, asymptotics, gallery.
//
// Exit codes: 0 success, 1 invalid input, 2 numeric failure, 3 I/O failure.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <sstream>

#include "spde/asymptotics.hpp"
#include "spde/config.hpp"
#include "spde/errors.hpp"
#include "spde/field_io.hpp"
#include "spde/gallery.hpp"
#include "spde/report.hpp"

namespace {

using nlohmann::json;

enum Exit : int { kOk = 0, kValidation = 1, kNumeric = 2, kIo = 3 };

struct Common {
    std::string config_path;
    std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config_path, "JSON configuration file (defaults when omitted)");
    cmd->add_option("--set", c.overrides, "Override a configuration key, e.g. --set grid.n_time=4000")
        ->take_all();
}

spde::RunConfig load(const Common& c) { return spde::load_config(c.config_path, c.overrides); }

void print(const json& j) { std::cout << j.dump(2) << '\n'; }

json matrix_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            row.push_back(m(i, j));
        }
        rows.push_back(row);
    }
    return rows;
}

int cmd_simulate(const Common& c, const std::string& out) {
    const spde::RunConfig cfg = load(c);
    const spde::StudyConfig& s = cfg.study;
    const spde::FieldSummary sum = spde::simulate_to_file(out, s.params_true, s.grid, cfg.seed);
    const json sidecar = spde::sidecar_json(std::filesystem::path(out).filename().string(), cfg.to_json(), cfg.seed);
    spde::write_text_file(out + ".json", sidecar.dump(2) + "\n");
    print({{"field", out}, {"slices", sum.slices_emitted}, {"seed", cfg.seed}});
    return kOk;
}

int cmd_estimate(const Common& c, const std::string& field, const std::string& out) {
    spde::RunConfig cfg = load(c);
    spde::EstimateRecord rec;
    if (field.empty()) {
        const spde::StudyConfig& s = cfg.study;
        s.est.validate_against(s.grid);
        spde::FieldEstimator est(s.grid, s.est);
        spde::simulate_field(s.params_true, s.grid, cfg.seed, est.sink());
        rec = est.finish();
        rec.seed = cfg.seed;
    } else {
        spde::FieldReader reader(field);
        const spde::GridSpec grid = reader.header().grid;
        spde::FieldEstimator est(grid, cfg.study.est);
        reader.read_all(est.sink());
        rec = est.finish();
        rec.seed = reader.header().seed;
        cfg.study.grid = grid;
        cfg.study.params_true = reader.header().params;
        cfg.seed = rec.seed;
    }
    json doc = {{"estimate", spde::record_to_json(rec)}, {"config", cfg.to_json()}};
    if (!field.empty()) {
        doc["field"] = field;
    }
    if (!out.empty()) {
        spde::write_text_file(out, doc.dump(2) + "\n");
    }
    print(doc);
    return kOk;
}

int cmd_study(const Common& c, const std::string& out_dir, bool quiet) {
    const spde::RunConfig cfg = load(c);
    spde::StudyOptions opts;
    if (!quiet) {
        opts.progress = [](std::size_t done, std::size_t total) {
            std::fprintf(stderr, "\rreplication %zu/%zu", done, total);
            if (done == total) {
                std::fputc('\n', stderr);
            }
        };
    }
    const spde::StudyReport report = spde::run_study(cfg.study, opts);
    const auto files = spde::write_study_outputs(out_dir, report, cfg.to_json());
    json summary = json::object();
    for (const auto& s : report.statistics) {
        summary[s.name] = {{"mean", s.mean}, {"variance", s.variance}, {"limit_variance", s.limit_variance},
                           {"ks", s.ks}, {"ks_critical_1pct", s.ks_critical_1pct}};
    }
    print({{"out", out_dir}, {"files", files.size()}, {"failures", report.failures.size()}, {"statistics", summary}});
    return kOk;
}

int cmd_asymptotics(const Common& c, const std::string& theta_text, const std::string& regime_text) {
    spde::RunConfig cfg = load(c);
    std::vector<double> t;
    std::stringstream ss(theta_text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            t.push_back(std::stod(item, &used));
            if (used != item.size()) {
                throw std::invalid_argument(item);
            }
        } catch (const std::exception&) {
            throw spde::ValidationError("--theta: '" + item + "' is not a number");
        }
    }
    if (t.size() != 4) {
        throw spde::ValidationError("--theta: expected theta0,theta1,theta2,sigma");
    }
    const spde::SpdeParams p{t[0], t[1], t[2], t[3]};
    p.validate();
    const spde::Regime regime = spde::regime_from_string(regime_text);
    const spde::DerivedParams d = spde::derived_params(p);
    const double gamma = spde::gamma_constant();
    const double delta = cfg.study.est.delta_margin;
    print({{"theta", t},
           {"regime", spde::to_string(regime)},
           {"sigma0_sq", d.sigma0_sq},
           {"eta", d.eta},
           {"lambda1", d.lambda1},
           {"gamma", gamma},
           {"delta", delta},
           {"contrast_cov", matrix_json(spde::contrast_cov(d.sigma0_sq, d.eta, delta, gamma))},
           {"adaptive_cov", matrix_json(spde::adaptive_cov(p, regime))}});
    return kOk;
}

int cmd_gallery(const Common& c, const std::string& out_dir) {
    const spde::RunConfig cfg = load(c);
    const auto results = spde::run_gallery(cfg, out_dir);
    json entries = json::array();
    for (const auto& r : results) {
        json files = json::array();
        for (const auto& f : r.files) {
            files.push_back(f.string());
        }
        entries.push_back({{"name", r.name}, {"files", files}});
    }
    print({{"out", out_dir}, {"entries", entries}});
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulation and parameter estimation for a linear parabolic SPDE"};
    app.require_subcommand(1);

    Common common;
    std::string out;
    std::string field;
    std::string theta;
    std::string regime = "fixed_t";
    bool quiet = false;

    auto* sim = app.add_subcommand("simulate", "Simulate one field and write it to a field file");
    add_common(sim, common);
    sim->add_option("--out", out, "Field file to write")->default_val("field.bin");

    auto* est = app.add_subcommand("estimate", "Estimate parameters from a field file or a fresh simulation");
    add_common(est, common);
    est->add_option("--field", field, "Field file; simulate from the configuration when omitted");
    est->add_option("--out", out, "Also write the result JSON here");

    auto* study = app.add_subcommand("study", "Run a Monte Carlo study and write the report");
    add_common(study, common);
    study->add_option("--out", out, "Output directory")->required();
    study->add_flag("--quiet", quiet, "No progress output");

    auto* asym = app.add_subcommand("asymptotics", "Print limit covariances for a parameter vector");
    add_common(asym, common);
    asym->add_option("--theta", theta, "theta0,theta1,theta2,sigma")->required();
    asym->add_option("--regime", regime, "fixed_t or large_t")->default_val("fixed_t");

    auto* gal = app.add_subcommand("gallery", "Simulate the sample-path gallery");
    add_common(gal, common);
    gal->add_option("--out", out, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kValidation;
    }

    try {
        if (*sim) {
            return cmd_simulate(common, out);
        }
        if (*est) {
            return cmd_estimate(common, field, out);
        }
        if (*study) {
            return cmd_study(common, out, quiet);
        }
        if (*asym) {
            return cmd_asymptotics(common, theta, regime);
        }
        return cmd_gallery(common, out);
    } catch (const spde::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kValidation;
    } catch (const spde::IoError& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return kIo;
    } catch (const std::exception& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return kNumeric;
    }
}
