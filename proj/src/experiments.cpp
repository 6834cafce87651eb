#include "spde/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "spde/asymptotics.hpp"
#include "spde/errors.hpp"
#include "spde/rng.hpp"

namespace spde {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

[[noreturn]] void rethrow_tagged(std::size_t rep_id) {
    const std::string tag = "replication " + std::to_string(rep_id) + ": ";
    try {
        throw;
    } catch (const ValidationError& e) {
        throw ValidationError(tag + e.what());
    } catch (const IoError& e) {
        throw IoError(tag + e.what());
    } catch (const std::exception& e) {
        throw NumericError(tag + e.what());
    }
}

std::vector<double> finite_only(const std::vector<double>& x) {
    std::vector<double> out;
    out.reserve(x.size());
    std::copy_if(x.begin(), x.end(), std::back_inserter(out), [](double v) { return std::isfinite(v); });
    return out;
}

double safe_sqrt_ratio(double num, double var) { return var > 0.0 ? num / std::sqrt(var) : kNaN; }

}  // namespace

void StudyConfig::validate() const {
    params_true.validate();
    grid.validate();
    est.validate_against(grid);
    if (replications < 2) {
        throw ValidationError("replications: must be >= 2");
    }
    if (!(eigenvalue(1, params_true) > 0.0)) {
        throw ValidationError("theta0: lambda_1 must be > 0 for simulation");
    }
}

StudyConfig default_study_config(Regime regime) {
    StudyConfig c;
    if (regime == Regime::FixedT) {
        c.params_true = {0.0, 0.5, 0.1, 1.0};
        c.grid = {2000, 2000, 1.0, 20000};
        c.est.m_spatial = 20;
        c.est.n2_temporal = 100;
        c.est.regime = Regime::FixedT;
        c.replications = 200;
    } else {
        c.params_true = {0.0, 0.2, 0.2, 1.0};
        c.grid = {10000, 4000, 25.0, 20000};
        c.est.m_spatial = 12;
        c.est.n2_temporal = 200;
        c.est.regime = Regime::LargeT;
        c.replications = 150;
    }
    return c;
}

EstimateRecord run_replication(const StudyConfig& config, std::size_t rep_id) {
    try {
        const std::uint64_t seed = rng::derive_seed(config.base_seed, rep_id);
        FieldEstimator estimator(config.grid, config.est);
        simulate_field(config.params_true, config.grid, seed, estimator.sink());
        EstimateRecord rec = estimator.finish();
        rec.rep_id = rep_id;
        rec.seed = seed;
        return rec;
    } catch (...) {
        rethrow_tagged(rep_id);
    }
}

StatisticSummary summarize_statistic(std::string name, std::vector<double> standardized, double limit_variance) {
    StatisticSummary s;
    s.name = std::move(name);
    s.limit_variance = limit_variance;
    s.standardized = std::move(standardized);
    const std::vector<double> x = finite_only(s.standardized);
    s.n = x.size();
    if (s.n < 2) {
        s.mean = s.variance = s.ks = kNaN;
        return s;
    }
    s.mean = sample_mean(x);
    s.variance = sample_variance(x);
    s.ks = ks_statistic(x, [v = limit_variance](double t) { return normal_cdf(t, v); });
    s.ks_critical_1pct = ks_critical_value(0.01, s.n);
    s.ecdf = ecdf_table(x);
    s.qq = qq_table(x, limit_variance);
    s.hist = histogram(x, limit_variance);
    return s;
}

const StatisticSummary& StudyReport::statistic(const std::string& name) const {
    for (const auto& s : statistics) {
        if (s.name == name) {
            return s;
        }
    }
    throw std::out_of_range("no statistic named " + name);
}

StudyReport summarize_study(const StudyConfig& config, std::vector<EstimateRecord> records,
                            std::vector<ReplicationFailure> failures) {
    std::sort(records.begin(), records.end(),
              [](const EstimateRecord& a, const EstimateRecord& b) { return a.rep_id < b.rep_id; });
    std::sort(failures.begin(), failures.end(),
              [](const ReplicationFailure& a, const ReplicationFailure& b) { return a.rep_id < b.rep_id; });

    StudyReport rep;
    rep.config = config;
    rep.records = std::move(records);
    rep.failures = std::move(failures);

    const SpdeParams& truth = config.params_true;
    const DerivedParams d = derived_params(truth);
    const Regime regime = config.est.regime;
    const std::vector<std::size_t> cols = thinned_columns(config.grid, config.est);
    std::vector<double> ys;
    for (std::size_t c : cols) {
        ys.push_back(config.grid.space(c));
    }

    rep.gamma = gamma_constant(1e-12);
    rep.contrast_cov = contrast_cov(d.sigma0_sq, d.eta, config.est.delta_margin, rep.gamma);
    rep.contrast_cov_fixed_m = contrast_cov_fixed_m(d.sigma0_sq, d.eta, ys, rep.gamma);
    rep.adaptive_cov = adaptive_cov(truth, regime);
    rep.rate_diagnostics = rate_diagnostics(config.grid, config.est);

    const double contrast_rate =
        std::sqrt(static_cast<double>(config.est.m_spatial) * static_cast<double>(config.grid.n_time));
    const double adaptive_rate = std::sqrt(static_cast<double>(config.est.n2_temporal));
    const double ergodic_rate = std::sqrt(config.grid.horizon);

    struct StatDef {
        const char* name;
        double truth;
        double rate;
        double variance;
        double EstimateRecord::*field;
    };
    std::vector<StatDef> defs = {
        {"sigma0_sq", d.sigma0_sq, contrast_rate, rep.contrast_cov(0, 0), &EstimateRecord::sigma0_sq},
        {"eta", d.eta, contrast_rate, rep.contrast_cov(1, 1), &EstimateRecord::eta},
        {"sigma_sq", truth.sigma * truth.sigma, adaptive_rate, rep.adaptive_cov(0, 0), &EstimateRecord::sigma_sq},
        {"theta2", truth.theta2, adaptive_rate, rep.adaptive_cov(1, 1), &EstimateRecord::theta2},
        {"theta1", truth.theta1, adaptive_rate, rep.adaptive_cov(2, 2), &EstimateRecord::theta1},
    };
    if (regime == Regime::LargeT) {
        defs.push_back({"theta0", truth.theta0, ergodic_rate, rep.adaptive_cov(3, 3), &EstimateRecord::theta0});
    }

    for (const StatDef& sp : defs) {
        std::vector<double> standardized;
        std::vector<double> studentized;
        for (const EstimateRecord& r : rep.records) {
            const double z = sp.rate * (r.*(sp.field) - sp.truth);
            standardized.push_back(z);
            // limit variance re-evaluated at the estimates
            double v_hat = kNaN;
            const std::string name = sp.name;
            try {
                if (name == "sigma0_sq" || name == "eta") {
                    const Eigen::Matrix2d c =
                        contrast_cov(r.sigma0_sq, r.eta, config.est.delta_margin, rep.gamma);
                    v_hat = name == "sigma0_sq" ? c(0, 0) : c(1, 1);
                } else if (name == "sigma_sq") {
                    v_hat = 2.0 * r.sigma_sq * r.sigma_sq;
                } else if (name == "theta2") {
                    v_hat = 8.0 * r.theta2 * r.theta2;
                } else if (name == "theta1") {
                    v_hat = 8.0 * r.theta1 * r.theta1;
                } else {
                    v_hat = 2.0 * r.lambda1;
                }
            } catch (const NumericError&) {
            }
            studentized.push_back(safe_sqrt_ratio(z, v_hat));
        }
        StatisticSummary s = summarize_statistic(sp.name, std::move(standardized), sp.variance);
        s.truth = sp.truth;
        s.rate = sp.rate;
        s.studentized = std::move(studentized);
        const std::vector<double> st = finite_only(s.studentized);
        if (st.size() >= 2) {
            s.studentized_mean = sample_mean(st);
            s.studentized_variance = sample_variance(st);
        } else {
            s.studentized_mean = s.studentized_variance = kNaN;
        }
        rep.statistics.push_back(std::move(s));
    }
    return rep;
}

StudyReport run_study(const StudyConfig& config, const StudyOptions& options) {
    config.validate();
    const std::size_t R = config.replications;
    std::vector<std::size_t> order(R);
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (options.execution_order) {
        order = *options.execution_order;
        std::vector<std::size_t> check = order;
        std::sort(check.begin(), check.end());
        for (std::size_t i = 0; i < R; ++i) {
            if (check.size() != R || check[i] != i) {
                throw ValidationError("execution_order: must be a permutation of 0..replications-1");
            }
        }
    }

    std::vector<std::optional<EstimateRecord>> slots(R);
    std::vector<std::string> errors(R);
    std::size_t done = 0;

#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t idx = 0; idx < static_cast<std::ptrdiff_t>(R); ++idx) {
        const std::size_t rep_id = order[static_cast<std::size_t>(idx)];
        try {
            slots[rep_id] = run_replication(config, rep_id);
        } catch (const std::exception& e) {
            errors[rep_id] = e.what();
        }
        if (options.progress) {
#pragma omp critical(spde_study_progress)
            options.progress(++done, R);
        }
    }

    std::vector<EstimateRecord> records;
    std::vector<ReplicationFailure> failures;
    for (std::size_t i = 0; i < R; ++i) {
        if (slots[i]) {
            records.push_back(*slots[i]);
        } else {
            failures.push_back({i, errors[i]});
        }
    }
    if (static_cast<double>(failures.size()) > 0.05 * static_cast<double>(R)) {
        throw NumericError("study aborted: " + std::to_string(failures.size()) + " of " + std::to_string(R) +
                           " replications failed; first: " + failures.front().message);
    }
    return summarize_study(config, std::move(records), std::move(failures));
}

}  // namespace spde
