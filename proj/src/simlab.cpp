#include "tolpred/simlab.hpp"

#include "tolpred/dist.hpp"
#include "tolpred/errors.hpp"
#include "tolpred/intervals.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

namespace tolpred {

namespace {

constexpr SimMethod kAllMethods[] = {SimMethod::LinkPivot,      SimMethod::CIPlugPrediction,
                                     SimMethod::FPivot,         SimMethod::FPivotUnit,
                                     SimMethod::PlugIn,         SimMethod::DeltaTolerance,
                                     SimMethod::NoncentralTolerance, SimMethod::CIPlugTolerance};

}  // namespace

std::string to_string(SimMethod m) {
    switch (m) {
        case SimMethod::LinkPivot: return "link_pivot";
        case SimMethod::CIPlugPrediction: return "ci_plug_prediction";
        case SimMethod::FPivot: return "f_pivot";
        case SimMethod::FPivotUnit: return "f_pivot_unit";
        case SimMethod::PlugIn: return "plug_in";
        case SimMethod::DeltaTolerance: return "delta_tolerance";
        case SimMethod::NoncentralTolerance: return "noncentral_tolerance";
        case SimMethod::CIPlugTolerance: return "ci_plug_tolerance";
    }
    return "unknown";
}

std::string display_name(SimMethod m) {
    switch (m) {
        case SimMethod::LinkPivot: return "Link pivot";
        case SimMethod::CIPlugPrediction: return "CI plug-in";
        case SimMethod::FPivot: return "F pivot";
        case SimMethod::FPivotUnit: return "F pivot k=1";
        case SimMethod::PlugIn: return "Plug-in";
        case SimMethod::DeltaTolerance: return "Delta tol";
        case SimMethod::NoncentralTolerance: return "NC-t tol";
        case SimMethod::CIPlugTolerance: return "CI plug-in tol";
    }
    return "unknown";
}

SimMethod sim_method_from_string(const std::string& s) {
    for (SimMethod m : kAllMethods)
        if (to_string(m) == s) return m;
    throw DomainError("unknown simulation method '" + s + "'");
}

bool is_tolerance(SimMethod m) {
    return m == SimMethod::DeltaTolerance || m == SimMethod::NoncentralTolerance || m == SimMethod::CIPlugTolerance;
}

std::string reference_key(SimMethod m, double level, const Cell& c) {
    std::ostringstream os;
    os << to_string(m) << '|' << std::fixed << std::setprecision(3) << level << '|' << c.n << '|' << c.N;
    return os.str();
}

const CoverageCell* CoverageReport::find(SimMethod m, double level, long long n, long long N) const {
    for (const auto& c : cells)
        if (c.method == m && std::abs(c.level - level) < 1e-9 && c.cell.n == n && c.cell.N == N) return &c;
    return nullptr;
}

int default_thread_count() {
    if (const char* env = std::getenv("TOLPRED_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

std::vector<double> poisson_gamma_interarrivals(const std::vector<double>& site_rates, long long count,
                                                RngStream& rng) {
    if (site_rates.empty()) throw DomainError("need at least one site");
    // next arrival time of each site's Poisson stream; merge by taking the minimum
    std::vector<double> next(site_rates.size());
    for (std::size_t j = 0; j < site_rates.size(); ++j) {
        if (!(site_rates[j] > 0.0)) throw DomainError("site rates must be > 0");
        next[j] = -std::log(rng.uniform()) / site_rates[j];
    }
    std::vector<double> out;
    out.reserve(count);
    double last = 0.0;
    for (long long i = 0; i < count; ++i) {
        const auto it = std::min_element(next.begin(), next.end());
        const std::size_t j = it - next.begin();
        out.push_back(*it - last);
        last = *it;
        next[j] += -std::log(rng.uniform()) / site_rates[j];
    }
    return out;
}

namespace {

// One run's data and truth.
struct RunData {
    std::vector<double> sample;
    double future_sum = 0.0;
    DistSpec truth;  // distribution of the future sum
};

// -1 failure, 0 miss, 1 cover; laid out method-major, level-minor.
void evaluate_run(const ScenarioSpec& spec, const Cell& cell, const RunData& d, std::int8_t* out) {
    const std::size_t L = spec.levels.size();
    const double U = static_cast<double>(cell.N - cell.n);
    const PredictionTarget tgt{cell.n, U};
    std::fill(out, out + spec.methods.size() * L, std::int8_t{-1});

    FitResult fit;
    try {
        fit = fit_gamma_intercept(d.sample, Link::Log, SeKind::Both);
    } catch (const Error&) {
        return;
    }
    fit.se_kind = spec.se_kind;
    PivotOptions po;
    po.se_kind = spec.se_kind;
    const double ybar = fit.mu_hat;
    const double p = spec.content_p;
    const double q_lo = quantile(d.truth, 0.5 * (1.0 - p));
    const double q_hi = quantile(d.truth, 0.5 * (1.0 + p));

    const bool need_ci = std::any_of(spec.methods.begin(), spec.methods.end(), [](SimMethod m) {
        return m == SimMethod::CIPlugPrediction || m == SimMethod::CIPlugTolerance;
    });
    const bool need_k = std::find(spec.methods.begin(), spec.methods.end(), SimMethod::CIPlugTolerance) !=
                        spec.methods.end();

    for (std::size_t l = 0; l < L; ++l) {
        const double lv = spec.levels[l];
        std::optional<IntervalEstimate> mu_ci, k_ci;
        try {
            if (need_ci) {
                if (spec.mean_ci == MeanCi::ProfileLR) {
                    mu_ci = profile_lr_ci(fit, Param::Mu, lv);
                    if (need_k) k_ci = profile_lr_ci(fit, Param::K, lv);
                } else {
                    mu_ci = wald_ci(fit, lv);
                }
            }
        } catch (const Error&) {
            mu_ci.reset();
            k_ci.reset();
        }
        for (std::size_t mi = 0; mi < spec.methods.size(); ++mi) {
            const SimMethod m = spec.methods[mi];
            std::int8_t& slot = out[mi * L + l];
            try {
                IntervalEstimate iv;
                switch (m) {
                    case SimMethod::LinkPivot: iv = predict_sum_link(fit, tgt, lv, po); break;
                    case SimMethod::CIPlugPrediction:
                        if (need_ci && !mu_ci) continue;
                        iv = predict_sum_plugci(fit, tgt, lv, mu_ci);
                        break;
                    case SimMethod::FPivot: iv = predict_sum_fpivot(ybar, cell.n, U, *fit.k_hat, lv); break;
                    case SimMethod::FPivotUnit: iv = predict_sum_fpivot(ybar, cell.n, U, 1.0, lv); break;
                    case SimMethod::PlugIn: iv = predict_sum_plugin(fit, tgt, lv); break;
                    case SimMethod::DeltaTolerance: iv = tolerance_delta(fit, p, lv, tgt, Link::Log, po); break;
                    case SimMethod::NoncentralTolerance: iv = tolerance_nct(fit, p, lv, tgt, po); break;
                    case SimMethod::CIPlugTolerance:
                        if (!mu_ci) continue;
                        iv = tolerance_plugci(fit, p, lv, tgt, mu_ci, k_ci);
                        break;
                }
                const bool hit = is_tolerance(m) ? (iv.lower <= q_lo && q_hi <= iv.upper) : iv.contains(d.future_sum);
                slot = hit ? 1 : 0;
            } catch (const Error&) {
                slot = -1;
            }
        }
    }
}

}  // namespace

void validate(const ScenarioSpec& spec) {
    if (spec.n_runs < 1) throw DomainError("n_runs must be >= 1");
    if (spec.levels.empty() || spec.methods.empty()) throw DomainError("scenario needs methods and levels");
    for (double lv : spec.levels)
        if (!(lv > 0.0 && lv < 1.0)) throw DomainError("levels must lie in (0, 1)");
    if (!(spec.content_p > 0.0 && spec.content_p < 1.0)) throw DomainError("content_p must lie in (0, 1)");
    if (spec.cells.empty()) throw DomainError("scenario needs at least one cell");
    for (const auto& c : spec.cells)
        if (c.n < 2 || c.N <= c.n) throw DomainError("cells need 2 <= n < N");
    if (const auto* g = std::get_if<GammaProcess>(&spec.process)) {
        if (!(g->shape > 0.0 && g->mean > 0.0)) throw DomainError("gamma process needs shape, mean > 0");
    } else {
        const auto& pg = std::get<PoissonGammaSites>(spec.process);
        if (!(pg.alpha > 0.0 && pg.beta > 0.0) || pg.n_sites < 1)
            throw DomainError("Poisson-gamma process needs alpha, beta > 0 and at least one site");
    }
}

namespace {

template <class MakeRun>
CoverageReport run_cells(const ScenarioSpec& spec, MakeRun make_run) {
    validate(spec);

    const int threads = std::max(1, spec.threads > 0 ? spec.threads : default_thread_count());
    const std::size_t slots = spec.methods.size() * spec.levels.size();
    CoverageReport report;
    report.name = spec.name;

    for (std::size_t ci = 0; ci < spec.cells.size(); ++ci) {
        const Cell cell = spec.cells[ci];
        const RngStream base(spec.seed, ci);
        std::vector<std::int8_t> results(static_cast<std::size_t>(spec.n_runs) * slots);
        std::atomic<long long> next{0};
        auto worker = [&] {
            for (long long r = next++; r < spec.n_runs; r = next++) {
                RngStream rng = base.substream(static_cast<std::uint64_t>(r));
                const RunData d = make_run(cell, rng);
                evaluate_run(spec, cell, d, results.data() + r * slots);
            }
        };
        std::vector<std::thread> pool;
        for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
        worker();
        for (auto& t : pool) t.join();

        for (std::size_t mi = 0; mi < spec.methods.size(); ++mi) {
            for (std::size_t l = 0; l < spec.levels.size(); ++l) {
                CoverageCell out;
                out.method = spec.methods[mi];
                out.level = spec.levels[l];
                out.cell = cell;
                for (long long r = 0; r < spec.n_runs; ++r) {
                    const auto v = results[r * slots + mi * spec.levels.size() + l];
                    if (v < 0) {
                        ++out.failures;
                    } else {
                        ++out.runs;
                        out.covered += v;
                    }
                }
                if (out.runs > 0) {
                    out.coverage = static_cast<double>(out.covered) / out.runs;
                    out.mc_se = std::sqrt(out.coverage * (1.0 - out.coverage) / out.runs);
                }
                const auto it = spec.reference.find(reference_key(out.method, out.level, cell));
                if (it != spec.reference.end()) out.reference = it->second;
                const double center = out.reference.value_or(out.level);
                const double band = 3.0 * std::sqrt(center * (1.0 - center) / std::max<long long>(1, out.runs));
                out.pass = out.runs > 0 && std::abs(out.coverage - center) <= band + 1e-12;
                out.flagged = out.failures * 1000 > spec.n_runs;
                report.cells.push_back(out);
            }
        }
    }
    return report;
}

}  // namespace

CoverageReport run_gamma_coverage(const ScenarioSpec& spec) {
    const auto* g = std::get_if<GammaProcess>(&spec.process);
    if (!g) throw DomainError("run_gamma_coverage needs a gamma data process");
    if (!(g->shape > 0.0 && g->mean > 0.0)) throw DomainError("gamma process needs shape, mean > 0");
    const DistSpec one = DistSpec::gamma_mean_shape(g->mean, g->shape);
    return run_cells(spec, [&](const Cell& cell, RngStream& rng) {
        RunData d;
        const double U = static_cast<double>(cell.N - cell.n);
        d.sample = sample(one, rng, static_cast<std::size_t>(cell.n));
        d.truth = DistSpec::gamma(U * g->shape, g->mean / g->shape);
        const auto fut = sample(one, rng, static_cast<std::size_t>(cell.N - cell.n));
        d.future_sum = std::accumulate(fut.begin(), fut.end(), 0.0);
        return d;
    });
}

CoverageReport run_poisson_gamma(const ScenarioSpec& spec) {
    const auto* pg = std::get_if<PoissonGammaSites>(&spec.process);
    if (!pg) throw DomainError("run_poisson_gamma needs a Poisson-gamma site process");
    if (!(pg->alpha > 0.0 && pg->beta > 0.0) || pg->n_sites < 1)
        throw DomainError("Poisson-gamma process needs alpha, beta > 0 and at least one site");
    const DistSpec rate_dist = DistSpec::gamma(pg->alpha, pg->beta);
    std::vector<double> fixed;
    if (pg->fixed_rates) {
        RngStream r(pg->rate_seed, 0);
        fixed = sample(rate_dist, r, static_cast<std::size_t>(pg->n_sites));
    }
    return run_cells(spec, [&](const Cell& cell, RngStream& rng) {
        const std::vector<double> rates =
            pg->fixed_rates ? fixed : sample(rate_dist, rng, static_cast<std::size_t>(pg->n_sites));
        const double total = std::accumulate(rates.begin(), rates.end(), 0.0);
        const auto gaps = poisson_gamma_interarrivals(rates, cell.N, rng);
        RunData d;
        d.sample.assign(gaps.begin(), gaps.begin() + cell.n);
        d.future_sum = std::accumulate(gaps.begin() + cell.n, gaps.end(), 0.0);
        d.truth = DistSpec::gamma(static_cast<double>(cell.N - cell.n), 1.0 / total);
        return d;
    });
}

CoverageReport run_scenario(const ScenarioSpec& spec) {
    return std::holds_alternative<GammaProcess>(spec.process) ? run_gamma_coverage(spec) : run_poisson_gamma(spec);
}

// ===========================================================================
// tables

void emit_table(std::ostream& os, const CoverageReport& report, TableFormat format) {
    if (format == TableFormat::Csv) {
        os << "method,level,n,N,coverage,mc_se,runs,covered,failures,reference,pass,flagged\n";
        for (const auto& c : report.cells) {
            os << to_string(c.method) << ',' << std::setprecision(6) << c.level << ',' << c.cell.n << ','
               << c.cell.N << ',' << std::setprecision(17) << c.coverage << ',' << c.mc_se << ',' << c.runs << ','
               << c.covered << ',' << c.failures << ',';
            if (c.reference) os << std::setprecision(6) << *c.reference;
            os << ',' << (c.pass ? 1 : 0) << ',' << (c.flagged ? 1 : 0) << '\n';
        }
        return;
    }
    // text: one block per method in table order, one row per nominal level,
    // one column per cell
    std::vector<Cell> cells;
    std::vector<SimMethod> methods;
    std::vector<double> levels;
    for (const auto& c : report.cells) {
        if (std::none_of(cells.begin(), cells.end(), [&](const Cell& x) { return x.n == c.cell.n && x.N == c.cell.N; }))
            cells.push_back(c.cell);
        if (std::find(methods.begin(), methods.end(), c.method) == methods.end()) methods.push_back(c.method);
        if (std::none_of(levels.begin(), levels.end(), [&](double x) { return std::abs(x - c.level) < 1e-9; }))
            levels.push_back(c.level);
    }
    std::stable_sort(methods.begin(), methods.end(),
                     [](SimMethod a, SimMethod b) { return static_cast<int>(a) < static_cast<int>(b); });
    std::sort(levels.begin(), levels.end(), std::greater<>());
    os << std::left << std::setw(16) << "Interval" << std::setw(6) << "Nom";
    for (const auto& c : cells) {
        std::ostringstream h;
        h << "n=" << c.n << "/N=" << c.N;
        os << std::right << std::setw(14) << h.str();
    }
    os << '\n';
    for (SimMethod m : methods) {
        bool first = true;
        for (double lv : levels) {
            os << std::left << std::setw(16) << (first ? display_name(m) : "") << std::setw(6) << std::fixed
               << std::setprecision(2) << lv;
            first = false;
            for (const auto& c : cells) {
                const auto* cc = report.find(m, lv, c.n, c.N);
                std::ostringstream v;
                if (cc) v << std::fixed << std::setprecision(3) << cc->coverage << (cc->pass ? " " : "*");
                os << std::right << std::setw(14) << v.str();
            }
            os << '\n';
        }
    }
    os.unsetf(std::ios::fixed);
}

CoverageReport parse_table_csv(std::istream& is) {
    CoverageReport r;
    std::string line;
    if (!std::getline(is, line)) throw ParseError("coverage CSV is empty");
    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) f.push_back(tok);
        if (line.back() == ',') f.emplace_back();
        if (f.size() != 12) throw ParseError("coverage CSV line " + std::to_string(lineno) + ": expected 12 fields");
        try {
            CoverageCell c;
            c.method = sim_method_from_string(f[0]);
            c.level = std::stod(f[1]);
            c.cell = {std::stoll(f[2]), std::stoll(f[3])};
            c.coverage = std::stod(f[4]);
            c.mc_se = std::stod(f[5]);
            c.runs = std::stoll(f[6]);
            c.covered = std::stoll(f[7]);
            c.failures = std::stoll(f[8]);
            if (!f[9].empty()) c.reference = std::stod(f[9]);
            c.pass = f[10] == "1";
            c.flagged = f[11] == "1";
            r.cells.push_back(c);
        } catch (const std::logic_error&) {
            throw ParseError("coverage CSV line " + std::to_string(lineno) + ": bad number");
        }
    }
    return r;
}

// ===========================================================================
// scenario files

ScenarioSpec scenario_from_json(const std::string& text) {
    using nlohmann::json;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("scenario JSON: ") + e.what(), e.byte == 0 ? 0 : 1 + std::count(text.begin(), text.begin() + std::min(e.byte - 1, text.size()), '\n'));
    }
    try {
        if (j.value("schema_version", 0) != 1) throw ConfigError("scenario JSON: unsupported schema_version");
        ScenarioSpec s;
        s.name = j.value("name", s.name);
        const auto& p = j.at("process");
        const std::string type = p.at("type");
        if (type == "gamma") {
            s.process = GammaProcess{p.at("shape").get<double>(), p.at("mean").get<double>()};
        } else if (type == "poisson_gamma") {
            PoissonGammaSites pg;
            pg.alpha = p.value("alpha", pg.alpha);
            pg.beta = p.value("beta", pg.beta);
            pg.n_sites = p.value("n_sites", pg.n_sites);
            pg.fixed_rates = p.value("fixed_rates", pg.fixed_rates);
            pg.rate_seed = p.value("rate_seed", pg.rate_seed);
            s.process = pg;
        } else {
            throw ConfigError("scenario JSON: unknown process type '" + type + "'");
        }
        s.cells.clear();
        for (const auto& c : j.at("cells")) s.cells.push_back({c.at(0).get<long long>(), c.at(1).get<long long>()});
        s.methods.clear();
        for (const auto& m : j.at("methods")) s.methods.push_back(sim_method_from_string(m.get<std::string>()));
        s.levels = j.at("levels").get<std::vector<double>>();
        s.content_p = j.value("content_p", s.content_p);
        s.n_runs = j.value("runs", s.n_runs);
        s.seed = j.value("seed", s.seed);
        if (j.contains("se_kind")) s.se_kind = se_kind_from_string(j["se_kind"]);
        if (j.contains("mean_ci")) {
            const std::string mc = j["mean_ci"];
            if (mc == "profile_lr") s.mean_ci = MeanCi::ProfileLR;
            else if (mc == "wald") s.mean_ci = MeanCi::Wald;
            else throw ConfigError("scenario JSON: mean_ci must be profile_lr or wald");
        }
        s.threads = j.value("threads", 0);
        if (j.contains("reference")) {
            for (const auto& r : j["reference"]) {
                const SimMethod m = sim_method_from_string(r.at("method"));
                const Cell c{r.at("n").get<long long>(), r.at("N").get<long long>()};
                s.reference[reference_key(m, r.at("level").get<double>(), c)] = r.at("coverage").get<double>();
            }
        }
        validate(s);
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("scenario JSON: ") + e.what());
    } catch (const DomainError& e) {
        throw ConfigError(std::string("scenario JSON: ") + e.what());
    }
}

ScenarioSpec load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scenario file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return scenario_from_json(ss.str());
}

}  // namespace tolpred
