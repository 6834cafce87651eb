#include "spde/config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "spde/errors.hpp"

namespace spde {

using nlohmann::json;

namespace {

const std::map<std::string, std::string>& aliases() {
    static const std::map<std::string, std::string> a = {
        {"N", "grid.n_time"},          {"M", "grid.n_space"},          {"T", "grid.horizon"},
        {"K", "grid.n_modes"},         {"m", "estimation.m_spatial"},  {"N2", "estimation.n2_temporal"},
        {"delta", "estimation.delta"}, {"regime", "estimation.regime"}, {"theta0", "model.theta0"},
        {"theta1", "model.theta1"},    {"theta2", "model.theta2"},     {"sigma", "model.sigma"},
        {"replications", "study.replications"}, {"base_seed", "study.base_seed"},
        {"eta_min", "estimation.eta_min"},       {"eta_max", "estimation.eta_max"},
        {"sigma0sq_min", "estimation.sigma0sq_min"}, {"sigma0sq_max", "estimation.sigma0sq_max"},
        {"lambda_min", "estimation.lambda_min"}, {"lambda_max", "estimation.lambda_max"},
    };
    return a;
}

std::vector<std::string> split_path(const std::string& path) {
    std::vector<std::string> parts;
    std::stringstream ss(path);
    std::string item;
    while (std::getline(ss, item, '.')) {
        if (item.empty()) {
            throw ValidationError("override: malformed key '" + path + "'");
        }
        parts.push_back(item);
    }
    return parts;
}

void set_path(json& doc, const std::string& dotted, json value) {
    const auto alias = aliases().find(dotted);
    const std::vector<std::string> parts = split_path(alias != aliases().end() ? alias->second : dotted);
    json* node = &doc;
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
        json& child = (*node)[parts[i]];
        if (child.is_null()) {
            child = json::object();
        }
        if (!child.is_object()) {
            throw ValidationError(parts[i] + ": expected a section, not a value");
        }
        node = &child;
    }
    (*node)[parts.back()] = std::move(value);
}

// Short aliases at the top level of a document are rewritten to their full
// dotted paths.
json normalize_aliases(json doc) {
    json out = json::object();
    for (auto& [key, value] : doc.items()) {
        if (aliases().count(key) != 0) {
            set_path(out, key, value);
        } else if (out.contains(key) && out[key].is_object() && value.is_object()) {
            out[key].update(value);
        } else {
            out[key] = value;
        }
    }
    return out;
}

double as_number(const json& v, const std::string& key) {
    if (!v.is_number()) {
        throw ValidationError(key + ": expected a number");
    }
    const double d = v.get<double>();
    if (!std::isfinite(d)) {
        throw ValidationError(key + ": must be finite");
    }
    return d;
}

std::uint64_t as_count(const json& v, const std::string& key) {
    if (v.is_number_unsigned()) {
        return v.get<std::uint64_t>();
    }
    if (v.is_number_integer()) {
        throw ValidationError(key + ": must be >= 0");
    }
    if (v.is_number_float()) {
        const double d = v.get<double>();
        if (d >= 0.0 && d == std::floor(d) && d < 1.8e19) {
            return static_cast<std::uint64_t>(d);
        }
    }
    throw ValidationError(key + ": expected a non-negative integer");
}

std::string as_string(const json& v, const std::string& key) {
    if (!v.is_string()) {
        throw ValidationError(key + ": expected a string");
    }
    return v.get<std::string>();
}

const json& section(const json& doc, const char* name) {
    static const json empty = json::object();
    if (!doc.contains(name)) {
        return empty;
    }
    const json& s = doc.at(name);
    if (!s.is_object()) {
        throw ValidationError(std::string(name) + ": expected a section");
    }
    return s;
}

template <typename F>
void each_key(const json& sec, const std::string& prefix, F&& apply) {
    for (const auto& [key, value] : sec.items()) {
        const std::string full = prefix.empty() ? key : prefix + "." + key;
        if (!apply(key, value, full)) {
            throw ValidationError(full + ": unknown key");
        }
    }
}

template <typename F>
void prefixed(const std::string& prefix, F&& f) {
    try {
        f();
    } catch (const ValidationError& e) {
        throw ValidationError(prefix + e.what());
    }
}

std::string entry_name(const SpdeParams& p) {
    std::ostringstream os;
    os << "theta_" << p.theta0 << "_" << p.theta1 << "_" << p.theta2 << "_" << p.sigma;
    return os.str();
}

SpdeParams params_from_array(const json& v, const std::string& key) {
    if (!v.is_array() || v.size() != 4) {
        throw ValidationError(key + ": expected [theta0, theta1, theta2, sigma]");
    }
    return {as_number(v[0], key), as_number(v[1], key), as_number(v[2], key), as_number(v[3], key)};
}

}  // namespace

std::vector<GalleryEntry> default_gallery() {
    // theta0 = 5 is left out: lambda_1 < 0 there
    const std::vector<SpdeParams> thetas = {
        {0, 0.1, 0.1, 0.1}, {0, 0.1, 0.1, 1},  {0, 0.1, 0.1, 10}, {0, 0.5, 0.1, 1},
        {0, 1, 0.1, 1},     {0, -0.1, 0.1, 1}, {0, -0.5, 0.1, 1}, {0, -1, 0.1, 1},
        {0, 0.1, 0.01, 1},  {0, 0.1, 1, 1},    {-5, 0.1, 0.1, 1},
    };
    std::vector<GalleryEntry> out;
    for (const auto& t : thetas) {
        out.push_back({entry_name(t), t});
    }
    return out;
}

json RunConfig::to_json() const {
    const StudyConfig& s = study;
    json gallery_list = json::array();
    for (const auto& g : gallery) {
        gallery_list.push_back({{"name", g.name},
                                {"theta", {g.params.theta0, g.params.theta1, g.params.theta2, g.params.sigma}}});
    }
    return {
        {"seed", seed},
        {"model",
         {{"theta0", s.params_true.theta0},
          {"theta1", s.params_true.theta1},
          {"theta2", s.params_true.theta2},
          {"sigma", s.params_true.sigma}}},
        {"grid",
         {{"n_time", s.grid.n_time},
          {"n_space", s.grid.n_space},
          {"horizon", s.grid.horizon},
          {"n_modes", s.grid.n_modes}}},
        {"estimation",
         {{"regime", to_string(s.est.regime)},
          {"delta", s.est.delta_margin},
          {"m_spatial", s.est.m_spatial},
          {"n2_temporal", s.est.n2_temporal},
          {"eta_min", s.est.eta_bounds.lo},
          {"eta_max", s.est.eta_bounds.hi},
          {"sigma0sq_min", s.est.sigma0sq_bounds.lo},
          {"sigma0sq_max", s.est.sigma0sq_bounds.hi},
          {"lambda_min", s.est.lambda_bounds.lo},
          {"lambda_max", s.est.lambda_bounds.hi},
          {"eta_grid_points", s.est.eta_grid_points}}},
        {"study", {{"replications", s.replications}, {"base_seed", s.base_seed}}},
        {"gallery", {{"thetas", gallery_list}}},
    };
}

RunConfig parse_config(std::string_view document, const std::vector<std::string>& overrides) {
    json doc = json::object();
    if (document.find_first_not_of(" \t\r\n") != std::string_view::npos) {
        try {
            doc = json::parse(document);
        } catch (const json::parse_error& e) {
            throw ValidationError(std::string("config: not valid JSON: ") + e.what());
        }
        if (!doc.is_object()) {
            throw ValidationError("config: top level must be an object");
        }
    }
    doc = normalize_aliases(std::move(doc));
    for (const std::string& ov : overrides) {
        const auto eq = ov.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw ValidationError("override '" + ov + "': expected key=value");
        }
        const std::string key = ov.substr(0, eq);
        const std::string raw = ov.substr(eq + 1);
        json value;
        try {
            value = json::parse(raw);
        } catch (const json::parse_error&) {
            value = raw;
        }
        set_path(doc, key, std::move(value));
    }

    // preset, then everything else on top of it
    std::string preset = "fixed_t";
    if (doc.contains("preset")) {
        preset = as_string(doc["preset"], "preset");
    } else if (section(doc, "estimation").contains("regime")) {
        preset = as_string(doc["estimation"]["regime"], "estimation.regime");
    }
    RunConfig cfg;
    prefixed("preset: ", [&] { cfg.study = default_study_config(regime_from_string(preset)); });
    cfg.gallery = default_gallery();

    StudyConfig& s = cfg.study;
    bool auto_modes = false;

    each_key(doc, "", [&](const std::string& key, const json& v, const std::string& full) {
        if (key == "preset" || key == "model" || key == "grid" || key == "estimation" || key == "study" ||
            key == "gallery") {
            if (key != "preset" && !v.is_object()) {
                throw ValidationError(full + ": expected a section");
            }
            return true;
        }
        if (key == "seed") {
            cfg.seed = as_count(v, full);
            return true;
        }
        return false;
    });

    each_key(section(doc, "model"), "model", [&](const std::string& key, const json& v, const std::string& full) {
        if (key == "theta0") {
            s.params_true.theta0 = as_number(v, full);
        } else if (key == "theta1") {
            s.params_true.theta1 = as_number(v, full);
        } else if (key == "theta2") {
            s.params_true.theta2 = as_number(v, full);
        } else if (key == "sigma") {
            s.params_true.sigma = as_number(v, full);
        } else {
            return false;
        }
        return true;
    });

    each_key(section(doc, "grid"), "grid", [&](const std::string& key, const json& v, const std::string& full) {
        if (key == "n_time") {
            s.grid.n_time = as_count(v, full);
        } else if (key == "n_space") {
            s.grid.n_space = as_count(v, full);
        } else if (key == "horizon") {
            s.grid.horizon = as_number(v, full);
        } else if (key == "n_modes") {
            if (v.is_string() && v.get<std::string>() == "auto") {
                auto_modes = true;
            } else {
                s.grid.n_modes = as_count(v, full);
                auto_modes = s.grid.n_modes == 0;
            }
        } else {
            return false;
        }
        return true;
    });
    if (auto_modes) {
        s.grid.n_modes = default_mode_count(s.grid.n_time, s.grid.n_space);
    }

    each_key(section(doc, "estimation"), "estimation",
             [&](const std::string& key, const json& v, const std::string& full) {
                 EstimationConfig& e = s.est;
                 if (key == "regime") {
                     prefixed("estimation.", [&] { e.regime = regime_from_string(as_string(v, full)); });
                 } else if (key == "delta") {
                     e.delta_margin = as_number(v, full);
                 } else if (key == "m_spatial") {
                     e.m_spatial = as_count(v, full);
                 } else if (key == "n2_temporal") {
                     e.n2_temporal = as_count(v, full);
                 } else if (key == "eta_min") {
                     e.eta_bounds.lo = as_number(v, full);
                 } else if (key == "eta_max") {
                     e.eta_bounds.hi = as_number(v, full);
                 } else if (key == "sigma0sq_min") {
                     e.sigma0sq_bounds.lo = as_number(v, full);
                 } else if (key == "sigma0sq_max") {
                     e.sigma0sq_bounds.hi = as_number(v, full);
                 } else if (key == "lambda_min") {
                     e.lambda_bounds.lo = as_number(v, full);
                 } else if (key == "lambda_max") {
                     e.lambda_bounds.hi = as_number(v, full);
                 } else if (key == "eta_grid_points") {
                     e.eta_grid_points = as_count(v, full);
                 } else {
                     return false;
                 }
                 return true;
             });

    each_key(section(doc, "study"), "study", [&](const std::string& key, const json& v, const std::string& full) {
        if (key == "replications") {
            s.replications = as_count(v, full);
        } else if (key == "base_seed") {
            s.base_seed = as_count(v, full);
        } else {
            return false;
        }
        return true;
    });

    each_key(section(doc, "gallery"), "gallery", [&](const std::string& key, const json& v, const std::string& full) {
        if (key != "thetas") {
            return false;
        }
        if (!v.is_array()) {
            throw ValidationError(full + ": expected a list");
        }
        cfg.gallery.clear();
        for (std::size_t i = 0; i < v.size(); ++i) {
            const std::string item = full + "[" + std::to_string(i) + "]";
            GalleryEntry g;
            if (v[i].is_object()) {
                for (const auto& [k, _] : v[i].items()) {
                    if (k != "name" && k != "theta") {
                        throw ValidationError(item + "." + k + ": unknown key");
                    }
                }
                if (!v[i].contains("theta")) {
                    throw ValidationError(item + ".theta: required");
                }
                g.params = params_from_array(v[i]["theta"], item + ".theta");
                g.name = v[i].contains("name") ? as_string(v[i]["name"], item + ".name") : entry_name(g.params);
            } else {
                g.params = params_from_array(v[i], item);
                g.name = entry_name(g.params);
            }
            prefixed(item + ".", [&] { g.params.validate(/*allow_zero_sigma=*/true); });
            cfg.gallery.push_back(std::move(g));
        }
        return true;
    });

    prefixed("model.", [&] { s.params_true.validate(); });
    if (!(eigenvalue(1, s.params_true) > 0.0)) {
        throw ValidationError("model.theta0: lambda_1 = -theta0 + theta1^2/(4 theta2) + pi^2 theta2 must be > 0");
    }
    prefixed("grid.", [&] { s.grid.validate(); });
    prefixed("estimation.", [&] { s.est.validate(); });
    if (s.replications < 2) {
        throw ValidationError("study.replications: must be >= 2");
    }
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
    if (path.empty()) {
        return parse_config("", overrides);
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open config file " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), overrides);
}

}  // namespace spde
