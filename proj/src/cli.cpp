#include "tolpred/cli.hpp"

#include "tolpred/applications.hpp"
#include "tolpred/curves.hpp"
#include "tolpred/errors.hpp"
#include "tolpred/intervals.hpp"
#include "tolpred/io.hpp"
#include "tolpred/simlab.hpp"
#include "tolpred/svg.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace tolpred::cli {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

// ===========================================================================
// formatting and files

std::string num(double v) {
    if (!std::isfinite(v)) return "NA";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

ordered_json jnum(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

template <class T>
ordered_json jopt(const std::optional<T>& v) {
    return v ? ordered_json(*v) : ordered_json(nullptr);
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ordered_json parse_json(const std::string& text, const std::string& source) {
    try {
        return ordered_json::parse(text);
    } catch (const ordered_json::parse_error& e) {
        std::size_t line = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) line += text[i] == '\n';
        throw ParseError(source + " line " + std::to_string(line) + ": " + e.what(), line);
    }
}

class Outputs {
public:
    explicit Outputs(std::string dir) : dir_(std::move(dir)) {}
    bool enabled() const { return !dir_.empty(); }
    void write(const std::string& name, const std::string& content) const {
        if (!enabled()) return;
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec) throw ConfigError("cannot create output directory " + dir_ + ": " + ec.message());
        std::ofstream f(fs::path(dir_) / name, std::ios::binary);
        if (!f) throw ConfigError("cannot write " + (fs::path(dir_) / name).string());
        f << content;
    }

private:
    std::string dir_;
};

// ===========================================================================
// config plumbing

ordered_json load_config(const std::optional<std::string>& path, const std::string& command) {
    if (!path) return ordered_json::object();
    auto j = parse_json(read_text(*path), *path);
    if (!j.is_object()) throw ConfigError(*path + ": config must be a JSON object");
    if (j.value("schema_version", 0) != 1) throw ConfigError(*path + ": unsupported or missing schema_version");
    if (j.contains("command") && j["command"] != command)
        throw ConfigError(*path + ": config is for '" + j["command"].get<std::string>() + "', not '" + command + "'");
    return j;
}

template <class T>
T pick(const std::optional<T>& flag, const ordered_json& cfg, const char* key, T def) {
    if (flag) return *flag;
    if (!cfg.contains(key) || cfg[key].is_null()) return def;
    try {
        return cfg[key].get<T>();
    } catch (const ordered_json::exception& e) {
        throw ConfigError(std::string("config key '") + key + "': " + e.what());
    }
}

template <class T>
std::optional<T> pick_opt(const std::optional<T>& flag, const ordered_json& cfg, const char* key) {
    if (flag) return flag;
    if (!cfg.contains(key) || cfg[key].is_null()) return std::nullopt;
    try {
        return cfg[key].get<T>();
    } catch (const ordered_json::exception& e) {
        throw ConfigError(std::string("config key '") + key + "': " + e.what());
    }
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

std::vector<std::string> pick_list(const std::optional<std::string>& flag, const ordered_json& cfg, const char* key,
                                   std::vector<std::string> def) {
    if (flag) return split_list(*flag);
    if (!cfg.contains(key)) return def;
    if (cfg[key].is_string()) return split_list(cfg[key].get<std::string>());
    try {
        return cfg[key].get<std::vector<std::string>>();
    } catch (const ordered_json::exception& e) {
        throw ConfigError(std::string("config key '") + key + "': " + e.what());
    }
}

void check_unit(double v, const char* what) {
    if (!(v > 0.0 && v < 1.0)) throw ConfigError(std::string(what) + " must lie in (0, 1)");
}

// "a:b" period range
std::pair<int, int> parse_range(const std::string& s, const char* what) {
    const auto c = s.find(':');
    try {
        if (c == std::string::npos) {
            const int v = std::stoi(s);
            return {v, v};
        }
        return {std::stoi(s.substr(0, c)), std::stoi(s.substr(c + 1))};
    } catch (const std::exception&) {
        throw ConfigError(std::string(what) + " must look like first:last");
    }
}

template <class E, class F>
E parse_enum(const std::string& s, F from, const char* what) {
    try {
        return from(s);
    } catch (const Error&) {
        throw ConfigError(std::string("unknown ") + what + " '" + s + "'");
    }
}

Sided sided_from(const std::string& s) {
    if (s == "two") return Sided::Two;
    if (s == "lower") return Sided::Lower;
    if (s == "upper") return Sided::Upper;
    throw ConfigError("sided must be two, lower or upper");
}

// ===========================================================================
// fit serialization

ordered_json interval_json(const IntervalEstimate& iv, const std::string& label) {
    ordered_json j;
    j["method"] = label;
    j["target"] = to_string(iv.target);
    j["level"] = iv.level;
    j["content"] = jopt(iv.content_p);
    j["sided"] = to_string(iv.sided);
    j["lower"] = jnum(iv.lower);
    j["upper"] = jnum(iv.upper);
    j["point"] = iv.point ? jnum(*iv.point) : ordered_json(nullptr);
    j["lower_int"] = jopt(iv.lower_int);
    j["upper_int"] = jopt(iv.upper_int);
    return j;
}

const char* kIntervalCsvHeader = "method,target,level,content,sided,lower,upper,point,lower_int,upper_int\n";

std::string interval_csv_row(const IntervalEstimate& iv, const std::string& label) {
    std::ostringstream o;
    o << label << ',' << to_string(iv.target) << ',' << num(iv.level) << ','
      << (iv.content_p ? num(*iv.content_p) : "NA") << ',' << to_string(iv.sided) << ',' << num(iv.lower) << ','
      << num(iv.upper) << ',' << (iv.point ? num(*iv.point) : "NA") << ','
      << (iv.lower_int ? std::to_string(*iv.lower_int) : "NA") << ','
      << (iv.upper_int ? std::to_string(*iv.upper_int) : "NA") << '\n';
    return o.str();
}

ordered_json fit_json_object(const FitResult& f, double level) {
    ordered_json j;
    j["schema_version"] = 1;
    j["family"] = to_string(f.family);
    j["link"] = to_string(f.link);
    j["mu_hat"] = f.mu_hat;
    j["k_hat"] = jopt(f.k_hat);
    j["phi_hat"] = jopt(f.phi_hat);
    j["se_g_mu_model"] = f.se_g_mu_model;
    j["se_g_mu_sandwich"] = f.se_g_mu_sandwich;
    j["se_kind"] = to_string(f.se_kind);
    j["se_k"] = f.se_k;
    j["cov_mu_k"] = f.cov_mu_k;
    j["n_obs"] = f.n_obs;
    j["n_events"] = f.n_events;
    j["exposure_total"] = f.exposure_total;
    j["events_total"] = f.events_total;
    j["loglik"] = f.loglik;
    j["iterations"] = f.iterations;
    j["mean_log"] = f.mean_log;
    j["cells"] = f.cells;
    j["shape_fixed"] = f.shape_fixed;
    j["from_data"] = f.from_data;
    if (f.survival) {
        ordered_json s = ordered_json::array();
        for (const auto& x : *f.survival) s.push_back({x.time, x.event ? 1 : 0});
        j["survival"] = s;
    }
    // derived, ignored on read
    ordered_json d;
    d["estimate"] = natural_point(f);
    d["level"] = level;
    const auto w = wald_ci(f, level);
    d["wald_ci"] = {jnum(w.lower), jnum(w.upper)};
    if (f.from_data && f.family != FitFamily::QuasiPoisson) {
        try {
            const auto p = profile_lr_ci(f, Param::Mu, level);
            d["profile_ci"] = {jnum(p.lower), jnum(p.upper)};
        } catch (const Error&) {
            d["profile_ci"] = nullptr;
        }
    }
    j["derived"] = d;
    return j;
}

FitResult fit_from_object(const ordered_json& j) {
    try {
        if (j.value("schema_version", 1) != 1) throw ConfigError("fit JSON: unsupported schema_version");
        FitResult f;
        f.family = family_from_string(j.at("family").get<std::string>());
        f.link = link_from_string(j.at("link").get<std::string>());
        f.mu_hat = j.at("mu_hat").get<double>();
        if (!j.at("k_hat").is_null()) f.k_hat = j["k_hat"].get<double>();
        if (!j.at("phi_hat").is_null()) f.phi_hat = j["phi_hat"].get<double>();
        f.se_g_mu_model = j.at("se_g_mu_model").get<double>();
        f.se_g_mu_sandwich = j.at("se_g_mu_sandwich").get<double>();
        f.se_kind = se_kind_from_string(j.at("se_kind").get<std::string>());
        f.se_k = j.value("se_k", 0.0);
        f.cov_mu_k = j.at("cov_mu_k").get<std::array<double, 4>>();
        f.n_obs = j.at("n_obs").get<long long>();
        f.n_events = j.value("n_events", f.n_obs);
        f.exposure_total = j.value("exposure_total", 0.0);
        f.events_total = j.value("events_total", 0.0);
        f.loglik = j.value("loglik", 0.0);
        f.iterations = j.value("iterations", 0);
        f.mean_log = j.value("mean_log", 0.0);
        if (j.contains("cells")) f.cells = j["cells"].get<std::array<double, 4>>();
        f.shape_fixed = j.value("shape_fixed", false);
        f.from_data = j.value("from_data", false);
        if (j.contains("survival")) {
            auto v = std::make_shared<std::vector<SurvivalSample>>();
            for (const auto& r : j["survival"]) v->push_back({r.at(0).get<double>(), r.at(1).get<int>() == 1});
            f.survival = v;
        }
        return f;
    } catch (const ordered_json::exception& e) {
        throw ConfigError(std::string("fit JSON: ") + e.what());
    } catch (const DomainError& e) {
        throw ConfigError(std::string("fit JSON: ") + e.what());
    }
}

}  // namespace

std::string fit_to_json(const FitResult& fit, double level) { return fit_json_object(fit, level).dump(2) + "\n"; }

FitResult fit_from_json(const std::string& text) { return fit_from_object(parse_json(text, "fit JSON")); }

namespace {

// ===========================================================================
// fit sources

struct FitFlags {
    std::optional<std::string> fit_path, input, family, link, column, se_kind;
    bool continuity = false;
};

void add_fit_flags(CLI::App* app, FitFlags& f) {
    app->add_option("--fit", f.fit_path, "Fit JSON written by the fit command");
    app->add_option("--input", f.input, "Data CSV to fit");
    app->add_option("--family", f.family, "gamma | quasipoisson | weibull | binomial");
    app->add_option("--link", f.link, "identity | log | logit");
    app->add_option("--column", f.column, "Column holding the outcome (gamma)");
    app->add_option("--se-kind", f.se_kind, "sandwich | model");
}

struct ResolvedFit {
    FitResult fit;
    std::optional<IntervalEstimate> reported_ci;  // summary fits with a CI
};

FitResult fit_csv(const std::string& path, FitFamily family, std::optional<Link> link, const std::string& column,
                  bool continuity) {
    switch (family) {
        case FitFamily::Gamma: return fit_gamma_intercept(read_column(path, column), link.value_or(Link::Log));
        case FitFamily::QuasiPoisson: {
            const auto t = read_csv_file(path);
            std::string ex = "exposure";
            for (const auto& h : t.header)
                if (h == "exposure_days") ex = h;
            return fit_quasipoisson(t.values("events"), t.values(ex), link.value_or(Link::Log));
        }
        case FitFamily::WeibullAFT: return fit_weibull_censored(read_survival(path));
        case FitFamily::BinomialLogit: {
            const auto t = read_csv_file(path);
            std::vector<int> y, trt;
            for (double v : t.values("y")) y.push_back(static_cast<int>(v));
            for (double v : t.values("trt")) trt.push_back(static_cast<int>(v));
            return fit_binomial_logit(y, trt, continuity);
        }
    }
    throw ConfigError("unsupported family");
}

ResolvedFit summary_from_config(const ordered_json& s) {
    try {
        ResolvedFit r;
        const FitFamily fam = family_from_string(s.at("family").get<std::string>());
        const Link link = s.contains("link") ? link_from_string(s["link"].get<std::string>())
                                             : (fam == FitFamily::BinomialLogit ? Link::Logit : Link::Log);
        const double est = s.at("estimate").get<double>();
        const long long n = s.at("n").get<long long>();
        const double ci_level = s.value("ci_level", 0.95);
        double se = 0.0;
        const Link se_link = fam == FitFamily::BinomialLogit ? Link::Log : link;
        if (s.contains("se")) {
            se = s["se"].get<double>();
        } else if (s.contains("ci")) {
            const auto ci = s["ci"].get<std::array<double, 2>>();
            const std::string rule = s.value("se_rule", "widest_arm");
            if (rule != "widest_arm" && rule != "symmetric") throw ConfigError("se_rule must be widest_arm or symmetric");
            se = se_from_reported_ci(est, ci[0], ci[1], ci_level, se_link,
                                     rule == "symmetric" ? SeRule::Symmetric : SeRule::WidestArm);
            IntervalEstimate iv;
            iv.lower = ci[0];
            iv.upper = ci[1];
            iv.level = ci_level;
            iv.method = Method::WaldCI;
            iv.target = Target::Parameter;
            iv.point = est;
            r.reported_ci = iv;
        } else {
            throw ConfigError("summary fit needs se or ci");
        }
        std::optional<double> k, phi;
        if (s.contains("k_hat")) k = s["k_hat"].get<double>();
        if (s.contains("phi_hat")) phi = s["phi_hat"].get<double>();
        const double mu = fam == FitFamily::BinomialLogit ? std::log(est) : est;
        r.fit = summary_fit(fam, link, mu, se, n, k, phi);
        r.fit.exposure_total = s.value("exposure_total", fam == FitFamily::QuasiPoisson ? static_cast<double>(n) : 0.0);
        return r;
    } catch (const ordered_json::exception& e) {
        throw ConfigError(std::string("summary fit: ") + e.what());
    } catch (const DomainError& e) {
        throw ConfigError(std::string("summary fit: ") + e.what());
    }
}

ResolvedFit resolve_fit(const FitFlags& fl, const ordered_json& cfg) {
    ResolvedFit r;
    const auto fit_path = pick_opt(fl.fit_path, cfg, "fit_file");
    const auto input = pick_opt(fl.input, cfg, "input");
    const auto family = pick_opt(fl.family, cfg, "family");
    if (fit_path) {
        r.fit = fit_from_json(read_text(*fit_path));
    } else if (input) {
        if (!family) throw ConfigError("--input needs --family");
        const auto fam = parse_enum<FitFamily>(*family, family_from_string, "family");
        std::optional<Link> link;
        if (auto l = pick_opt(fl.link, cfg, "link")) link = parse_enum<Link>(*l, link_from_string, "link");
        r.fit = fit_csv(*input, fam, link, pick(fl.column, cfg, "column", std::string()),
                        fl.continuity || cfg.value("continuity", false));
    } else if (cfg.contains("fit") && cfg["fit"].is_object()) {
        if (cfg["fit"].contains("estimate")) r = summary_from_config(cfg["fit"]);
        else r.fit = fit_from_object(cfg["fit"]);
    } else {
        throw ConfigError("no fit: give --fit, --input with --family, or a fit block in the config");
    }
    if (auto k = pick_opt(fl.se_kind, cfg, "se_kind")) r.fit.se_kind = parse_enum<SeKind>(*k, se_kind_from_string, "SE kind");
    return r;
}

// ===========================================================================
// interval methods shared by predict, tolerance and curve

struct IntervalFlags {
    std::optional<double> level, future, content, threshold;
    std::optional<std::string> method, sided, reference, count_variance;
};

struct IntervalSettings {
    double level = 0.95;
    double future = 1.0;
    double content = 0.9;
    Sided sided = Sided::Two;
    PivotOptions pivot;
};

IntervalSettings interval_settings(const IntervalFlags& f, const ordered_json& cfg, bool need_future) {
    IntervalSettings s;
    s.level = pick(f.level, cfg, "level", 0.95);
    check_unit(s.level, "level");
    s.content = pick(f.content, cfg, "content", 0.9);
    check_unit(s.content, "content");
    const auto fut = pick_opt(f.future, cfg, "future");
    if (need_future && !fut) throw ConfigError("--future (N - n, future exposure, or m) is required");
    s.future = fut.value_or(1.0);
    if (!(s.future > 0.0)) throw ConfigError("future must be > 0");
    s.sided = sided_from(pick(f.sided, cfg, "sided", std::string("two")));
    s.pivot.sided = s.sided;
    if (auto r = pick_opt(f.reference, cfg, "reference"))
        s.pivot.reference = parse_enum<Reference>(*r, reference_from_string, "reference");
    const auto cv = pick(f.count_variance, cfg, "count_variance", std::string("equal"));
    if (cv == "equal") s.pivot.count_variance = CountVariance::EqualVariance;
    else if (cv == "exposure") s.pivot.count_variance = CountVariance::ExposureScaled;
    else throw ConfigError("count_variance must be equal or exposure");
    return s;
}

void add_interval_flags(CLI::App* app, IntervalFlags& f, bool tolerance) {
    app->add_option("--level", f.level, "Confidence or prediction level");
    app->add_option("--future", f.future, "N - n future observations, future exposure, or future subjects m");
    app->add_option("--method", f.method, "Comma-separated method names");
    app->add_option("--sided", f.sided, "two | lower | upper");
    app->add_option("--reference", f.reference, "t | normal");
    app->add_option("--count-variance", f.count_variance, "equal | exposure");
    if (tolerance) app->add_option("--content", f.content, "Population content p");
    else app->add_option("--threshold", f.threshold, "Odds-ratio success threshold (default: detectable effect)");
}

std::optional<IntervalEstimate> mean_ci_for(const ResolvedFit& r, double level) {
    if (r.reported_ci && std::abs(r.reported_ci->level - level) < 1e-12) return r.reported_ci;
    return std::nullopt;
}

IntervalEstimate prediction_for(const std::string& m, const ResolvedFit& r, const IntervalSettings& s) {
    const auto& f = r.fit;
    const PredictionTarget tgt{f.n_obs, s.future};
    if (m == "link_pivot") return predict_sum_link(f, tgt, s.level, s.pivot);
    if (m == "ci_plug_prediction") return predict_sum_plugci(f, tgt, s.level, mean_ci_for(r, s.level), s.sided);
    if (m == "f_pivot" || m == "f_pivot_unit") {
        if (f.family != FitFamily::Gamma) throw ConfigError(m + " needs a gamma fit");
        const double k = m == "f_pivot_unit" ? 1.0 : f.k_hat.value_or(1.0);
        return predict_sum_fpivot(f.mu_hat, f.n_obs, s.future, k, s.level, s.sided);
    }
    if (m == "plug_in") return predict_sum_plugin(f, tgt, s.level, s.sided);
    if (m == "kris_peng") return predict_count_kris(f, s.future, s.level);
    if (m == "or_prediction")
        return predict_or(f, f.n_obs, static_cast<long long>(std::llround(s.future)), s.level,
                          s.pivot.reference.value_or(Reference::Normal), s.sided);
    throw ConfigError("unknown prediction method '" + m + "'");
}

IntervalEstimate tolerance_for(const std::string& m, const ResolvedFit& r, const IntervalSettings& s) {
    const auto& f = r.fit;
    const PredictionTarget tgt{f.n_obs, s.future};
    if (m == "delta_tolerance") return tolerance_delta(f, s.content, s.level, tgt, std::nullopt, s.pivot);
    if (m == "noncentral_tolerance") return tolerance_nct(f, s.content, s.level, tgt, s.pivot);
    if (m == "ci_plug_tolerance")
        return tolerance_plugci(f, s.content, s.level, tgt, mean_ci_for(r, s.level), std::nullopt, s.sided);
    throw ConfigError("unknown tolerance method '" + m + "'");
}

std::vector<std::string> default_predict_methods(const FitResult& f) {
    switch (f.family) {
        case FitFamily::Gamma: return {"link_pivot", "ci_plug_prediction", "f_pivot", "plug_in"};
        case FitFamily::QuasiPoisson: return {"link_pivot", "ci_plug_prediction", "kris_peng"};
        case FitFamily::WeibullAFT: return {"link_pivot", "ci_plug_prediction", "plug_in"};
        case FitFamily::BinomialLogit: return {"or_prediction"};
    }
    return {"link_pivot"};
}

// ===========================================================================
// commands

struct Common {
    std::optional<std::string> config, out_dir;
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("--config", c.config, "JSON config (schema_version 1)");
    app->add_option("--out-dir", c.out_dir, "Directory for CSV and SVG outputs");
}

std::string svg_histogram(const std::vector<double>& y, const FitResult& f) {
    const auto [mn, mx] = std::minmax_element(y.begin(), y.end());
    const int bins = std::max(5, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(y.size())))));
    const double w = (*mx - *mn) / bins + 1e-12;
    svg::Series bars{"data", {}, {}, svg::Series::Style::Bars};
    std::vector<double> counts(bins, 0.0);
    for (double v : y) counts[std::min(bins - 1, static_cast<int>((v - *mn) / w))] += 1.0;
    for (int b = 0; b < bins; ++b) {
        bars.x.push_back(*mn + (b + 0.5) * w);
        bars.y.push_back(counts[b] / (y.size() * w));
    }
    svg::Series dens{"fitted gamma density"};
    const auto d = DistSpec::gamma_mean_shape(f.mu_hat, f.k_hat.value_or(1.0));
    for (int i = 0; i <= 200; ++i) {
        const double x = std::max(1e-9, *mn - w + (*mx - *mn + 2 * w) * i / 200.0);
        dens.x.push_back(x);
        dens.y.push_back(pdf(d, x));
    }
    svg::Plot p;
    p.title = "Observed values and fitted density";
    p.xlabel = "value";
    p.ylabel = "density";
    p.series = {bars, dens};
    return svg::render(p);
}

int cmd_fit(const Common& c, const FitFlags& fl, std::optional<double> level_flag, std::ostream& out) {
    const auto cfg = load_config(c.config, "fit");
    const double level = pick(level_flag, cfg, "level", 0.95);
    check_unit(level, "level");
    if (!pick_opt(fl.input, cfg, "input") && !pick_opt(fl.fit_path, cfg, "fit_file") && !cfg.contains("fit"))
        throw ConfigError("fit needs --input and --family");
    const auto r = resolve_fit(fl, cfg);
    const std::string js = fit_to_json(r.fit, level);
    out << js;
    Outputs o(pick(c.out_dir, cfg, "out_dir", std::string()));
    o.write("fit.json", js);
    std::ostringstream csv;
    csv << "parameter,value\n";
    const auto j = fit_json_object(r.fit, level);
    for (const char* key : {"mu_hat", "k_hat", "phi_hat", "se_g_mu_model", "se_g_mu_sandwich", "se_k", "n_obs",
                            "n_events", "exposure_total", "loglik"})
        csv << key << ',' << (j[key].is_null() ? "NA" : num(j[key].get<double>())) << '\n';
    o.write("fit.csv", csv.str());
    if (o.enabled() && r.fit.family == FitFamily::Gamma) {
        const auto input = pick_opt(fl.input, cfg, "input");
        if (input) o.write("fit_histogram.svg", svg_histogram(read_column(*input, pick(fl.column, cfg, "column", std::string())), r.fit));
    }
    return kOk;
}

int cmd_intervals(bool tolerance, const Common& c, const FitFlags& fl, const IntervalFlags& ifl, std::ostream& out) {
    const std::string name = tolerance ? "tolerance" : "predict";
    const auto cfg = load_config(c.config, name);
    const auto s = interval_settings(ifl, cfg, true);
    const auto r = resolve_fit(fl, cfg);
    const auto methods = pick_list(ifl.method, cfg, "method",
                                   tolerance ? std::vector<std::string>{"delta_tolerance", "noncentral_tolerance",
                                                                        "ci_plug_tolerance"}
                                             : default_predict_methods(r.fit));
    ordered_json j;
    j["command"] = name;
    j["intervals"] = ordered_json::array();
    std::string csv = kIntervalCsvHeader;
    for (const auto& m : methods) {
        const auto iv = tolerance ? tolerance_for(m, r, s) : prediction_for(m, r, s);
        j["intervals"].push_back(interval_json(iv, m));
        csv += interval_csv_row(iv, m);
    }
    if (!tolerance && r.fit.family == FitFamily::BinomialLogit) {
        const auto m = static_cast<long long>(std::llround(s.future));
        const double mde = minimum_detectable_or(r.fit, r.fit.n_obs, m, 0.95);
        const double thr = pick(ifl.threshold, cfg, "threshold", mde);
        ordered_json sc;
        sc["minimum_detectable_or"] = mde;
        sc["threshold"] = thr;
        sc["confidence"] = success_confidence(r.fit, r.fit.n_obs, m, thr, SuccessScale::OddsRatio);
        sc["p_value"] = 1.0 - sc["confidence"].get<double>();
        j["success"] = sc;
    }
    const std::string js = j.dump(2) + "\n";
    out << js;
    Outputs o(pick(c.out_dir, cfg, "out_dir", std::string()));
    o.write(name + ".json", js);
    o.write(name + ".csv", csv);
    return kOk;
}

struct CurveFlags {
    std::optional<int> points;
    std::optional<std::string> grid;
    bool log_grid = false;
};

Method curve_method(const std::string& m, CurveOptions& opt) {
    if (m == "link_pivot") return Method::LinkPivot;
    if (m == "ci_plug_prediction") return Method::CIPlugPrediction;
    if (m == "f_pivot") return Method::FPivot;
    if (m == "f_pivot_unit") {
        opt.fpivot_k = 1.0;
        return Method::FPivot;
    }
    if (m == "plug_in") return Method::PlugIn;
    if (m == "kris_peng") return Method::KrisPengCount;
    if (m == "or_prediction") return Method::ORPrediction;
    throw ConfigError("unknown curve method '" + m + "'");
}

int cmd_curve(const Common& c, const FitFlags& fl, const IntervalFlags& ifl, const CurveFlags& cf, std::ostream& out) {
    const auto cfg = load_config(c.config, "curve");
    const auto s = interval_settings(ifl, cfg, true);
    GridSpec grid;
    grid.points = pick(cf.points, cfg, "points", 2001);
    if (grid.points < 11) throw ConfigError("points must be >= 11");
    if (auto g = pick_opt(cf.grid, cfg, "grid")) {
        const auto colon = g->find(':');
        try {
            grid.lower = std::stod(g->substr(0, colon));
            grid.upper = std::stod(g->substr(colon + 1));
        } catch (const std::exception&) {
            throw ConfigError("grid must look like lower:upper");
        }
        if (colon == std::string::npos || !(grid.upper > grid.lower)) throw ConfigError("grid must look like lower:upper");
        grid.mode = cf.log_grid || cfg.value("log_grid", false) ? GridSpec::Mode::Log : GridSpec::Mode::Linear;
    }
    const auto r = resolve_fit(fl, cfg);
    std::vector<std::string> def = default_predict_methods(r.fit);
    if (r.fit.family == FitFamily::Gamma) def = {"link_pivot", "ci_plug_prediction", "f_pivot", "f_pivot_unit"};
    const auto methods = pick_list(ifl.method, cfg, "method", def);

    std::string csv = "method,value,H,H_minus,C,density\n";
    std::string xcsv = "method,level,lower,upper,point,split\n";
    ordered_json j;
    j["command"] = "curve";
    j["crossings"] = ordered_json::array();
    svg::Plot cp, dp;
    cp.title = "Prediction confidence curves";
    cp.xlabel = "hypothesized value";
    cp.ylabel = "C";
    cp.hlines = {(1.0 - s.level) / 2.0};
    dp.title = "Prediction densities";
    dp.xlabel = "hypothesized value";
    dp.ylabel = "density";
    for (const auto& m : methods) {
        CurveOptions opt;
        opt.pivot = s.pivot;
        opt.pivot.sided = Sided::Two;
        const Method method = curve_method(m, opt);
        if (method == Method::CIPlugPrediction && r.reported_ci)
            opt.arm_se = arm_se_from_reported_ci(*r.reported_ci->point, r.reported_ci->lower, r.reported_ci->upper,
                                                 r.reported_ci->level, r.fit.link);
        const auto t = build_curve(r.fit, method, {r.fit.n_obs, s.future}, grid, opt);
        for (std::size_t i = 0; i < t.grid.size(); ++i)
            csv += m + ',' + num(t.grid[i]) + ',' + num(t.H[i]) + ',' + num(t.H_minus[i]) + ',' + num(t.C[i]) + ',' +
                   num(t.density[i]) + '\n';
        const auto x = crossings(t, s.level);
        xcsv += m + ',' + num(s.level) + ',' + num(x.lower) + ',' + num(x.upper) + ',' + num(t.point) + ',' +
                num(t.split) + '\n';
        ordered_json xj;
        xj["method"] = m;
        xj["level"] = s.level;
        xj["lower"] = jnum(x.lower);
        xj["upper"] = jnum(x.upper);
        xj["point"] = jnum(t.point);
        xj["split"] = jnum(t.split);
        j["crossings"].push_back(xj);
        cp.series.push_back({m, t.grid, t.C});
        dp.series.push_back({m, t.grid, t.density});
    }
    const std::string js = j.dump(2) + "\n";
    out << js;
    Outputs o(pick(c.out_dir, cfg, "out_dir", std::string()));
    o.write("curves.csv", csv);
    o.write("crossings.csv", xcsv);
    o.write("curves.json", js);
    o.write("curves.svg", svg::render(cp));
    o.write("density.svg", svg::render(dp));
    return kOk;
}

struct SimFlags {
    std::optional<std::string> scenario, format;
    std::optional<long long> runs, max_runs;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
};

int cmd_simulate(const Common& c, const SimFlags& f, std::ostream& out, std::ostream& err) {
    const auto cfg = load_config(c.config, "simulate");
    const auto path = pick_opt(f.scenario, cfg, "scenario");
    if (!path) throw ConfigError("simulate needs --scenario");
    auto spec = load_scenario(*path);
    if (f.runs) spec.n_runs = *f.runs;
    else if (cfg.contains("runs")) spec.n_runs = cfg["runs"].get<long long>();
    if (f.seed) spec.seed = *f.seed;
    else if (cfg.contains("seed")) spec.seed = cfg["seed"].get<std::uint64_t>();
    spec.threads = pick(f.threads, cfg, "threads", spec.threads);
    try {
        validate(spec);
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
    const long long budget = pick(f.max_runs, cfg, "max_runs", 10'000'000LL);
    const long long total = spec.n_runs * static_cast<long long>(spec.cells.size());
    if (total > budget)
        throw SimulationBudgetError("scenario needs " + std::to_string(total) + " runs, budget is " +
                                    std::to_string(budget) + " (raise --max-runs)");
    const std::string fmt = pick(f.format, cfg, "format", std::string("text"));
    if (fmt != "text" && fmt != "csv") throw ConfigError("format must be text or csv");

    const auto report = run_scenario(spec);
    std::ostringstream text, csv;
    emit_table(text, report, TableFormat::Text);
    emit_table(csv, report, TableFormat::Csv);
    out << (fmt == "text" ? text.str() : csv.str());
    Outputs o(pick(c.out_dir, cfg, "out_dir", std::string()));
    o.write("table.txt", text.str());
    o.write("table.csv", csv.str());
    long long fails = 0, flagged = 0;
    for (const auto& cell : report.cells) {
        fails += !cell.pass;
        flagged += cell.flagged;
    }
    err << report.cells.size() - fails << " of " << report.cells.size() << " cells within 3 MC SE of their reference";
    if (flagged) err << ", " << flagged << " flagged for fit failures";
    err << '\n';
    return kOk;
}

struct RecruitFlags {
    std::optional<std::string> mode, series, schedule, window, transform, link, range, extrapolation, input, column;
    std::optional<double> level, target, total;
    std::optional<int> max_horizon;
};

RegressorTransform transform_from(const std::string& s) {
    RegressorTransform t;
    if (s == "log") t.kind = RegressorTransform::Kind::LogPeriod;
    else if (s == "identity") t.kind = RegressorTransform::Kind::Identity;
    else if (s.rfind("root", 0) == 0) {
        t.kind = RegressorTransform::Kind::Root;
        if (s.size() > 5 && s[4] == ':') {
            try {
                t.root = std::stod(s.substr(5));
            } catch (const std::exception&) {
                throw ConfigError("transform root order must be a number");
            }
        }
        if (!(t.root > 0.0)) throw ConfigError("root order must be > 0");
    } else {
        throw ConfigError("transform must be log, identity or root[:r]");
    }
    return t;
}

int cmd_recruit(const Common& c, const RecruitFlags& f, std::ostream& out) {
    const auto cfg = load_config(c.config, "recruit");
    const std::string mode = pick(f.mode, cfg, "mode", std::string("sitedays"));
    const double level = pick(f.level, cfg, "level", 0.95);
    check_unit(level, "level");
    Outputs o(pick(c.out_dir, cfg, "out_dir", std::string()));
    ordered_json j;
    j["command"] = "recruit";
    j["mode"] = mode;

    if (mode == "interarrival") {
        const auto input = pick_opt(f.input, cfg, "input");
        const auto total = pick_opt(f.total, cfg, "total");
        if (!input || !total) throw ConfigError("interarrival mode needs --input and --total");
        const auto tr = transform_from(pick(f.transform, cfg, "transform", std::string("log")));
        const Link link = parse_enum<Link>(pick(f.link, cfg, "link", std::string("log")), link_from_string, "link");
        const auto y = read_column(*input, pick(f.column, cfg, "column", std::string()));
        const long long n = static_cast<long long>(y.size());
        const long long N = std::llround(*total);
        if (N <= n) throw ConfigError("total must exceed the number of observed interarrivals");
        const auto t = fit_interarrival_trend(y, tr, link);
        const auto iv = predict_sum_interarrival(t, static_cast<int>(n + 1), static_cast<int>(N), level);
        j["coefficients"] = t.glm.coef;
        j["covariance"] = t.glm.cov;
        j["phi"] = t.glm.phi;
        j["remaining_time"] = interval_json(iv, "interarrival_trend");
        o.write("interarrival.csv", std::string(kIntervalCsvHeader) + interval_csv_row(iv, "interarrival_trend"));
    } else {
        const auto series_path = pick_opt(f.series, cfg, "series");
        if (!series_path) throw ConfigError(mode + " mode needs --series");
        auto series = read_recruitment(*series_path);
        if (auto sch = pick_opt(f.schedule, cfg, "schedule")) read_future_schedule(*sch, series);

        if (mode == "sitedays") {
            if (series.future_sites.empty()) throw ConfigError("sitedays mode needs --schedule");
            const auto fit = site_day_fit(series);
            const auto iv = predict_sitedays(fit, series, level);
            const auto st = stationarity(series);
            j["rate_per_site_day"] = fit.mu_hat;
            j["se_log_rate"] = fit.se_g_mu();
            j["observed_site_days"] = series.site_days();
            j["future_site_days"] = series.future_site_days();
            j["additional_subjects"] = interval_json(iv, "site_days");
            j["stationarity"] = {{"pearson", st.pearson}, {"df", st.df}, {"ratio", st.ratio}, {"p_value", st.p_value}};
            o.write("sitedays.csv", std::string(kIntervalCsvHeader) + interval_csv_row(iv, "site_days"));
        } else if (mode == "trend") {
            const auto tr = transform_from(pick(f.transform, cfg, "transform", std::string("log")));
            const Link link =
                parse_enum<Link>(pick(f.link, cfg, "link", std::string("identity")), link_from_string, "link");
            const int d = static_cast<int>(series.periods());
            const auto [first, last] = parse_range(pick(f.window, cfg, "window", "1:" + std::to_string(d)), "window");
            if (first < 1 || last > d || last < first) throw ConfigError("window must lie within the observed periods");
            const auto [from, to] =
                parse_range(pick(f.range, cfg, "range", std::to_string(last + 1) + ":" + std::to_string(last + 18)),
                            "range");
            if (from < 1 || to < from) throw ConfigError("range must be a nonempty period range");
            const std::string ex_s = pick(f.extrapolation, cfg, "extrapolation", std::string("model"));
            if (ex_s != "model" && ex_s != "constant") throw ConfigError("extrapolation must be model or constant");
            const Extrapolation ex = ex_s == "model" ? Extrapolation::Model : Extrapolation::Constant;

            const auto t = fit_trend(series, tr, link, first, last);
            std::string csv = "period,observed,fitted,lower,upper,segment\n";
            svg::Series obs{"observed", {}, {}, svg::Series::Style::Points}, fitted{"fitted"},
                lo{"lower", {}, {}, svg::Series::Style::Line, "#888", true},
                hi{"upper", {}, {}, svg::Series::Style::Line, "#888", true};
            hi.label.clear();
            for (int l = 1; l <= std::max(to, d); ++l) {
                const bool in_window = l >= first && l <= last;
                const bool in_range = l >= from && l <= to;
                if (!in_window && !in_range) {
                    if (l <= d) {
                        obs.x.push_back(l);
                        obs.y.push_back(series.events[l - 1]);
                        csv += std::to_string(l) + ',' + num(series.events[l - 1]) + ",NA,NA,NA,observed\n";
                    }
                    continue;
                }
                const auto iv = predict_rate_at(t, l, level, in_window ? Extrapolation::Model : ex);
                const double ob = l <= d ? series.events[l - 1] : NAN;
                if (l <= d) {
                    obs.x.push_back(l);
                    obs.y.push_back(ob);
                }
                fitted.x.push_back(l);
                fitted.y.push_back(*iv.point);
                lo.x.push_back(l);
                lo.y.push_back(iv.lower);
                hi.x.push_back(l);
                hi.y.push_back(iv.upper);
                csv += std::to_string(l) + ',' + num(ob) + ',' + num(*iv.point) + ',' + num(iv.lower) + ',' +
                       num(iv.upper) + ',' + (in_window ? "fit" : "extrapolated") + '\n';
            }
            const auto sum = predict_sum_rate(t, from, to, level, ex);
            j["coefficients"] = t.glm.coef;
            j["covariance"] = t.glm.cov;
            j["phi"] = t.glm.phi;
            j["window"] = {first, last};
            j["range"] = {from, to};
            j["sum"] = interval_json(sum, "trend_sum");
            if (auto target = pick_opt(f.target, cfg, "target")) {
                const auto h = solve_target_window(t, *target, level, pick(f.max_horizon, cfg, "max_horizon", 600), ex);
                j["horizon"] = {{"target", *target}, {"point", h.point}, {"optimistic", h.optimistic},
                                {"pessimistic", h.pessimistic}};
            }
            o.write("trend.csv", csv);
            o.write("trend_sum.csv", std::string(kIntervalCsvHeader) + interval_csv_row(sum, "trend_sum"));
            svg::Plot p;
            p.title = "Recruitment per period with fitted trend";
            p.xlabel = "period";
            p.ylabel = "events";
            p.series = {obs, fitted, lo, hi};
            p.vlines = {last + 0.5};
            o.write("trend.svg", svg::render(p));
        } else {
            throw ConfigError("mode must be sitedays, trend or interarrival");
        }
    }
    const std::string js = j.dump(2) + "\n";
    out << js;
    o.write("recruit.json", js);
    return kOk;
}

struct SurvivalFlags {
    std::optional<std::string> input, p_grid;
    std::optional<double> level;
    std::optional<long long> future_events;
};

std::vector<double> parse_grid(const std::string& s) {
    std::vector<double> g;
    try {
        if (s.find(':') != std::string::npos) {
            std::vector<double> parts;
            std::stringstream ss(s);
            std::string t;
            while (std::getline(ss, t, ':')) parts.push_back(std::stod(t));
            if (parts.size() != 3 || !(parts[2] > 0.0)) throw ConfigError("p grid must look like from:to:step");
            for (int i = 0;; ++i) {
                const double p = parts[0] + i * parts[2];
                if (p > parts[1] + 1e-9) break;
                g.push_back(std::round(p * 1e9) / 1e9);
            }
        } else {
            for (const auto& t : split_list(s)) g.push_back(std::stod(t));
        }
    } catch (const std::invalid_argument&) {
        throw ConfigError("p grid must be numbers");
    }
    for (double p : g)
        if (!(p > 0.0 && p < 1.0)) throw ConfigError("p grid values must lie in (0, 1)");
    if (g.empty()) throw ConfigError("p grid is empty");
    return g;
}

int cmd_survival(const Common& c, const SurvivalFlags& f, std::ostream& out) {
    const auto cfg = load_config(c.config, "survival");
    const auto input = pick_opt(f.input, cfg, "input");
    if (!input) throw ConfigError("survival needs --input");
    const double level = pick(f.level, cfg, "level", 0.95);
    check_unit(level, "level");
    const auto grid = parse_grid(pick(f.p_grid, cfg, "p_grid", std::string("0.02:0.98:0.02")));
    const long long m = pick(f.future_events, cfg, "future_events", 100LL);
    if (m < 1) throw ConfigError("future_events must be >= 1");

    const auto data = read_survival(*input);
    const auto fit = fit_weibull_censored(data);
    const auto tol = weibull_bands(fit, grid, {}, level);
    const auto rep = weibull_bands(fit, grid, {WeibullBand::Kind::RepeatedExperiment, m}, level);
    const auto subj = weibull_subject_prediction(fit, level);
    const auto km = km_estimator(data);

    std::string csv = "p,survival,estimate,tolerance_lower,tolerance_upper,prediction_lower,prediction_upper\n";
    svg::Plot p;
    p.title = "Time on treatment: Kaplan-Meier and Weibull bands";
    p.xlabel = "time";
    p.ylabel = "proportion still on treatment";
    p.yrange = std::pair{0.0, 1.0};
    svg::Series kms{"Kaplan-Meier", {0.0}, {1.0}, svg::Series::Style::Step, "#333"};
    for (std::size_t i = 0; i < km.times.size(); ++i) {
        kms.x.push_back(km.times[i]);
        kms.y.push_back(km.values[i]);
    }
    svg::Series est{"Weibull fit"}, tl{"tolerance band", {}, {}, svg::Series::Style::Line, "#2ca02c", true},
        tu{"", {}, {}, svg::Series::Style::Line, "#2ca02c", true},
        pl{"prediction band (" + std::to_string(m) + " events)", {}, {}, svg::Series::Style::Line, "#d62728", true},
        pu{"", {}, {}, svg::Series::Style::Line, "#d62728", true};
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double s = 1.0 - grid[i];
        csv += num(grid[i]) + ',' + num(s) + ',' + num(tol[i].estimate) + ',' + num(tol[i].interval.lower) + ',' +
               num(tol[i].interval.upper) + ',' + num(rep[i].interval.lower) + ',' + num(rep[i].interval.upper) + '\n';
        est.x.push_back(tol[i].estimate);
        tl.x.push_back(tol[i].interval.lower);
        tu.x.push_back(tol[i].interval.upper);
        pl.x.push_back(rep[i].interval.lower);
        pu.x.push_back(rep[i].interval.upper);
        for (auto* ser : {&est, &tl, &tu, &pl, &pu}) ser->y.push_back(s);
    }
    p.series = {kms, est, tl, tu, pl, pu};
    std::string kcsv = "time,survival\n";
    for (std::size_t i = 0; i < km.times.size(); ++i) kcsv += num(km.times[i]) + ',' + num(km.values[i]) + '\n';

    ordered_json j;
    j["command"] = "survival";
    j["fit"] = fit_json_object(fit, level);
    j["fit"].erase("survival");
    j["subject_prediction"] = interval_json(subj, "ci_plug_prediction");
    j["future_events"] = m;
    const std::string js = j.dump(2) + "\n";
    out << js;
    Outputs o(pick(c.out_dir, cfg, "out_dir", std::string()));
    o.write("bands.csv", csv);
    o.write("km.csv", kcsv);
    o.write("survival.json", js);
    o.write("survival.svg", svg::render(p));
    return kOk;
}

}  // namespace

// ===========================================================================
// entry

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Tolerance and prediction intervals for non-normal models"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "tolpred 0.1.0");

    Common common;
    FitFlags fit_flags;
    IntervalFlags iflags;
    CurveFlags cflags;
    SimFlags sflags;
    RecruitFlags rflags;
    SurvivalFlags vflags;
    std::optional<double> fit_level;

    auto* fit = app.add_subcommand("fit", "Fit a model to a CSV and print it as JSON");
    add_common(fit, common);
    add_fit_flags(fit, fit_flags);
    fit->add_flag("--continuity", fit_flags.continuity, "Continuity correction for the binomial fit");
    fit->add_option("--level", fit_level, "Level for the reported CIs");

    auto* predict = app.add_subcommand("predict", "Prediction intervals for a future sum or estimate");
    add_common(predict, common);
    add_fit_flags(predict, fit_flags);
    add_interval_flags(predict, iflags, false);

    auto* tolerance = app.add_subcommand("tolerance", "Tolerance intervals for the future-sum distribution");
    add_common(tolerance, common);
    add_fit_flags(tolerance, fit_flags);
    add_interval_flags(tolerance, iflags, true);

    auto* curve = app.add_subcommand("curve", "Prediction confidence curves and densities");
    add_common(curve, common);
    add_fit_flags(curve, fit_flags);
    add_interval_flags(curve, iflags, false);
    curve->add_option("--points", cflags.points, "Grid points");
    curve->add_option("--grid", cflags.grid, "Grid range lower:upper");
    curve->add_flag("--log-grid", cflags.log_grid, "Log-spaced grid");

    auto* simulate = app.add_subcommand("simulate", "Monte-Carlo coverage tables");
    add_common(simulate, common);
    simulate->add_option("--scenario", sflags.scenario, "Scenario JSON");
    simulate->add_option("--runs", sflags.runs, "Runs per cell");
    simulate->add_option("--seed", sflags.seed, "Master seed");
    simulate->add_option("--threads", sflags.threads, "Worker threads (default: TOLPRED_THREADS or all cores)");
    simulate->add_option("--max-runs", sflags.max_runs, "Budget on runs summed over cells");
    simulate->add_option("--format", sflags.format, "text | csv");

    auto* recruit = app.add_subcommand("recruit", "Recruitment forecasts");
    add_common(recruit, common);
    recruit->add_option("--mode", rflags.mode, "sitedays | trend | interarrival");
    recruit->add_option("--series", rflags.series, "period,events,exposure_days,active_sites CSV");
    recruit->add_option("--schedule", rflags.schedule, "period,active_sites CSV for future periods");
    recruit->add_option("--window", rflags.window, "Fit window first:last");
    recruit->add_option("--range", rflags.range, "Prediction range first:last");
    recruit->add_option("--transform", rflags.transform, "log | identity | root[:r]");
    recruit->add_option("--link", rflags.link, "identity | log");
    recruit->add_option("--extrapolation", rflags.extrapolation, "model | constant");
    recruit->add_option("--target", rflags.target, "Target subjects for the horizon search");
    recruit->add_option("--max-horizon", rflags.max_horizon, "Longest horizon searched");
    recruit->add_option("--input", rflags.input, "Interarrival CSV");
    recruit->add_option("--column", rflags.column, "Interarrival column");
    recruit->add_option("--total", rflags.total, "Total subjects N");
    recruit->add_option("--level", rflags.level, "Prediction level");

    auto* survival = app.add_subcommand("survival", "Weibull time-on-treatment bands");
    add_common(survival, common);
    survival->add_option("--input", vflags.input, "time,event CSV");
    survival->add_option("--level", vflags.level, "Band level");
    survival->add_option("--p-grid", vflags.p_grid, "from:to:step or comma list");
    survival->add_option("--future-events", vflags.future_events, "Events in the repeated experiment");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        app.exit(e, out, err);
        return kOk;
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kConfigError;
    }

    try {
        if (fit->parsed()) return cmd_fit(common, fit_flags, fit_level, out);
        if (predict->parsed()) return cmd_intervals(false, common, fit_flags, iflags, out);
        if (tolerance->parsed()) return cmd_intervals(true, common, fit_flags, iflags, out);
        if (curve->parsed()) return cmd_curve(common, fit_flags, iflags, cflags, out);
        if (simulate->parsed()) return cmd_simulate(common, sflags, out, err);
        if (recruit->parsed()) return cmd_recruit(common, rflags, out);
        if (survival->parsed()) return cmd_survival(common, vflags, out);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << '\n';
        return kParseError;
    } catch (const SimulationBudgetError& e) {
        err << "simulation budget: " << e.what() << '\n';
        return kBudgetError;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kNumericError;
    } catch (const ordered_json::exception& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    }
    return kConfigError;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::vector<const char*> argv{"tolpred"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace tolpred::cli
