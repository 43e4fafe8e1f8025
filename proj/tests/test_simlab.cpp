#include "catch_amalgamated.hpp"

#include "tolpred/errors.hpp"
#include "tolpred/simlab.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

using namespace tolpred;
using Catch::Approx;

namespace {

std::string csv_of(const CoverageReport& r) {
    std::ostringstream os;
    emit_table(os, r, TableFormat::Csv);
    return os.str();
}

ScenarioSpec small_gamma() {
    ScenarioSpec s;
    s.process = GammaProcess{4.0, 2.5};
    s.cells = {{10, 11}, {20, 60}};
    s.methods = {SimMethod::LinkPivot, SimMethod::CIPlugPrediction, SimMethod::FPivot, SimMethod::PlugIn,
                 SimMethod::DeltaTolerance, SimMethod::NoncentralTolerance, SimMethod::CIPlugTolerance};
    s.levels = {0.9, 0.5};
    s.n_runs = 300;
    s.seed = 5;
    return s;
}

}  // namespace

TEST_CASE("Monte-Carlo SE and pass band") {
    ScenarioSpec s;
    s.process = GammaProcess{1.0, 1.0};
    s.cells = {{20, 300}};
    s.methods = {SimMethod::FPivotUnit};
    s.levels = {0.95};
    s.n_runs = 10000;
    s.seed = 3;
    const auto r = run_gamma_coverage(s);
    const auto& c = r.cells.at(0);
    CHECK(c.runs == 10000);
    CHECK(c.failures == 0);
    CHECK(c.mc_se == Approx(std::sqrt(c.coverage * (1 - c.coverage) / 10000)).epsilon(1e-14));
    // nominal band quoted for 10^4 runs
    const double se95 = std::sqrt(0.95 * 0.05 / 10000);
    CHECK(se95 == Approx(0.00218).margin(5e-6));
    CHECK(0.95 - 3 * se95 == Approx(0.943).margin(5e-4));
    CHECK(0.95 + 3 * se95 == Approx(0.957).margin(5e-4));
    // exact method: inside the band
    CHECK(c.pass);
}

TEST_CASE("simulation output is deterministic and thread-independent") {
    auto s = small_gamma();
    s.threads = 1;
    const auto a = csv_of(run_gamma_coverage(s));
    const auto b = csv_of(run_gamma_coverage(s));
    s.threads = 3;
    const auto c = csv_of(run_gamma_coverage(s));
    CHECK(a == b);
    CHECK(a == c);
    s.seed = 6;
    CHECK(csv_of(run_gamma_coverage(s)) != a);

    ScenarioSpec one = small_gamma();
    one.n_runs = 1;
    const auto r1 = run_gamma_coverage(one);
    const auto r2 = run_gamma_coverage(one);
    for (std::size_t i = 0; i < r1.cells.size(); ++i) {
        CHECK(r1.cells[i].runs + r1.cells[i].failures == 1);
        CHECK(r1.cells[i].covered == r2.cells[i].covered);
    }
}

TEST_CASE("merged site streams are a Poisson process with the total rate") {
    RngStream rng(9, 0);
    const std::vector<double> rates{0.01, 0.03, 0.05, 0.02};
    const auto gaps = poisson_gamma_interarrivals(rates, 40000, rng);
    const double total = 0.11;
    double m = 0, v = 0;
    for (double g : gaps) m += g;
    m /= gaps.size();
    for (double g : gaps) v += (g - m) * (g - m);
    v /= gaps.size() - 1;
    CHECK(m == Approx(1 / total).epsilon(4 / std::sqrt(40000.0)));
    CHECK(v == Approx(1 / (total * total)).epsilon(0.05));
    // exponential: P(gap > mean) = e^-1
    const double frac = std::count_if(gaps.begin(), gaps.end(), [&](double g) { return g > 1 / total; }) /
                        double(gaps.size());
    CHECK(frac == Approx(std::exp(-1.0)).margin(4 * std::sqrt(0.23 / 40000)));
    CHECK_THROWS_AS(poisson_gamma_interarrivals({}, 3, rng), DomainError);
}

TEST_CASE("Poisson-gamma process with nearly constant rates matches the exponential process") {
    ScenarioSpec s;
    s.cells = {{20, 300}};
    s.methods = {SimMethod::FPivotUnit};
    s.levels = {0.8};
    s.n_runs = 4000;
    s.seed = 12;
    PoissonGammaSites pg;
    pg.alpha = 1e8;
    pg.beta = 0.033 / 1e8;
    s.process = pg;
    const auto a = run_poisson_gamma(s).cells.at(0);
    s.process = GammaProcess{1.0, 1.0 / (10 * 0.033)};
    const auto b = run_gamma_coverage(s).cells.at(0);
    CHECK(std::abs(a.coverage - b.coverage) <= 3 * std::sqrt(2.0) * std::sqrt(0.16 / 4000));
    CHECK(a.pass);
    CHECK(b.pass);

    pg.fixed_rates = true;
    pg.alpha = 4;
    pg.beta = 0.033 / 4;
    s.process = pg;
    CHECK(run_poisson_gamma(s).cells.at(0).pass);
    CHECK_THROWS_AS(run_gamma_coverage(s), DomainError);
}

TEST_CASE("coverage tables") {
    const auto r = run_gamma_coverage(small_gamma());
    SECTION("CSV round trip") {
        const auto text = csv_of(r);
        std::istringstream is(text);
        const auto back = parse_table_csv(is);
        CHECK(csv_of(back) == text);
    }
    SECTION("text layout follows the method order") {
        std::ostringstream os;
        emit_table(os, r, TableFormat::Text);
        const auto t = os.str();
        std::size_t last = 0;
        for (SimMethod m : {SimMethod::LinkPivot, SimMethod::CIPlugPrediction, SimMethod::FPivot, SimMethod::PlugIn,
                            SimMethod::DeltaTolerance, SimMethod::NoncentralTolerance, SimMethod::CIPlugTolerance}) {
            const auto pos = t.find(display_name(m) + " ");
            REQUIRE(pos != std::string::npos);
            CHECK(pos >= last);
            last = pos;
        }
        CHECK(t.find("n=10/N=11") != std::string::npos);
    }
    SECTION("empty report prints headers only") {
        std::ostringstream a, b;
        emit_table(a, CoverageReport{}, TableFormat::Csv);
        CHECK(a.str() == "method,level,n,N,coverage,mc_se,runs,covered,failures,reference,pass,flagged\n");
        emit_table(b, CoverageReport{}, TableFormat::Text);
        const auto text = b.str();
        CHECK(std::count(text.begin(), text.end(), '\n') == 1);
    }
    SECTION("malformed CSV names the line") {
        std::istringstream is("header\nlink_pivot,0.9,10,11,x,0,1,1,0,,1,0\n");
        CHECK_THROWS_WITH(parse_table_csv(is), Catch::Matchers::ContainsSubstring("line 2"));
    }
}

TEST_CASE("scenario files") {
    const auto s = load_scenario(std::string(TOLPRED_TEST_DATA_DIR) + "/table1.json");
    CHECK(s.cells.size() == 5);
    CHECK(s.methods.size() == 7);
    CHECK(s.levels.front() == 0.95);
    CHECK(s.reference.at(reference_key(SimMethod::PlugIn, 0.95, {20, 300})) == 0.380);
    CHECK(std::get<GammaProcess>(s.process).shape == 4.0);
    const auto pg = load_scenario(std::string(TOLPRED_TEST_DATA_DIR) + "/poisson_gamma.json");
    CHECK(std::get<PoissonGammaSites>(pg.process).n_sites == 10);
    CHECK_THROWS_AS(scenario_from_json("{\"schema_version\": 2}"), ConfigError);
    CHECK_THROWS_AS(scenario_from_json("{not json"), ParseError);
    CHECK_THROWS_AS(scenario_from_json(R"({"schema_version":1,"process":{"type":"gamma","shape":1,"mean":1},
        "cells":[[5,6]],"methods":["bogus"],"levels":[0.9]})"),
                    ConfigError);
    CHECK_THROWS_AS(scenario_from_json(R"({"schema_version":1,"process":{"type":"gamma","shape":1,"mean":1},
        "cells":[[5,5]],"methods":["plug_in"],"levels":[0.9]})"),
                    ConfigError);
    ScenarioSpec bad = small_gamma();
    bad.cells = {{5, 5}};
    CHECK_THROWS_AS(run_gamma_coverage(bad), DomainError);
}
