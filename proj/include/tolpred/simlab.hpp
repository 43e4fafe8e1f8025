#pragma once

// Monte-Carlo coverage harness.
//
// Each run draws n observations, fits, builds every requested interval at
// every nominal level and records whether it covers the target: the future
// sum of N - n observations for prediction methods, or both true quantiles
// q_{(1-p)/2}, q_{(1+p)/2} of the future-sum distribution for tolerance
// methods. Runs use substream(run index) of the cell's stream, so results do
// not depend on the thread count.

#include "tolpred/fit.hpp"
#include "tolpred/rng.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace tolpred {

enum class SimMethod {
    LinkPivot,
    CIPlugPrediction,
    FPivot,      // shape estimated
    FPivotUnit,  // k = 1 (exponential)
    PlugIn,
    DeltaTolerance,
    NoncentralTolerance,
    CIPlugTolerance,
};

std::string to_string(SimMethod m);
std::string display_name(SimMethod m);
SimMethod sim_method_from_string(const std::string& s);
bool is_tolerance(SimMethod m);

struct GammaProcess {
    double shape = 4.0;
    double mean = 2.5;
};

// Study-level interarrivals from the superposition of Poisson site streams
// with site rates drawn from Gamma(alpha, beta) (shape, scale). With
// fixed_rates the site rates are drawn once from rate_seed and held across
// runs; otherwise they are redrawn every run.
struct PoissonGammaSites {
    double alpha = 4.0;
    double beta = 0.033 / 4.0;
    int n_sites = 10;
    bool fixed_rates = false;
    std::uint64_t rate_seed = 1;
};

struct Cell {
    long long n = 20;
    long long N = 300;
};

enum class MeanCi { ProfileLR, Wald };

struct ScenarioSpec {
    std::string name = "scenario";
    std::variant<GammaProcess, PoissonGammaSites> process = GammaProcess{};
    std::vector<Cell> cells{{20, 300}};
    std::vector<SimMethod> methods{SimMethod::LinkPivot};
    std::vector<double> levels{0.95};
    double content_p = 0.5;
    long long n_runs = 10000;
    std::uint64_t seed = 1;
    // SE used by the link pivot, the delta method and the noncentral-t form.
    SeKind se_kind = SeKind::Model;
    // CI for the mean (and lower shape limit) behind the CI plug-in methods.
    MeanCi mean_ci = MeanCi::ProfileLR;
    // Threads; 0 reads TOLPRED_THREADS, falling back to hardware concurrency.
    int threads = 0;
    // Reference coverages keyed by (method, level, n, N).
    std::map<std::string, double> reference;
};

std::string reference_key(SimMethod m, double level, const Cell& c);

struct CoverageCell {
    SimMethod method = SimMethod::LinkPivot;
    double level = 0.95;
    Cell cell;
    long long covered = 0;
    long long runs = 0;      // runs that produced an interval
    long long failures = 0;  // runs skipped after a fit or interval error
    double coverage = 0.0;
    double mc_se = 0.0;  // sqrt(c (1 - c) / runs)
    std::optional<double> reference;
    bool pass = false;     // within 3 SE of the reference (or of the nominal level)
    bool flagged = false;  // failures above 0.1% of runs
};

struct CoverageReport {
    std::string name;
    std::vector<CoverageCell> cells;

    const CoverageCell* find(SimMethod m, double level, long long n, long long N) const;
};

CoverageReport run_gamma_coverage(const ScenarioSpec& spec);
CoverageReport run_poisson_gamma(const ScenarioSpec& spec);
// Throws DomainError for runs < 1, empty methods or levels, levels or content
// outside (0, 1), cells without 2 <= n < N, or bad process parameters.
void validate(const ScenarioSpec& spec);

// Dispatches on the process type.
CoverageReport run_scenario(const ScenarioSpec& spec);

// Interarrival times of the first `count` study-level arrivals.
std::vector<double> poisson_gamma_interarrivals(const std::vector<double>& site_rates, long long count,
                                                RngStream& rng);

enum class TableFormat { Csv, Text };
void emit_table(std::ostream& os, const CoverageReport& report, TableFormat format);
CoverageReport parse_table_csv(std::istream& is);

// Malformed JSON raises ParseError; schema or parameter problems ConfigError.
ScenarioSpec scenario_from_json(const std::string& text);
ScenarioSpec load_scenario(const std::string& path);

int default_thread_count();

}  // namespace tolpred
