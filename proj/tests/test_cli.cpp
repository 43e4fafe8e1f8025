#include "catch_amalgamated.hpp"

#include "tolpred/cli.hpp"
#include "tolpred/io.hpp"
#include "tolpred/svg.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

using Catch::Approx;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string kData = TOLPRED_TEST_DATA_DIR;

struct Run {
    int code;
    std::string out, err;
};

Run cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = tolpred::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("tolpred_cli_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void put(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

const char* kInterarrival = R"({"schema_version": 1,
  "fit": {"family": "gamma", "estimate": 2.61, "ci": [2.13, 3.19], "n": 20, "k_hat": 5.22},
  "future": 280, "level": 0.95})";

}  // namespace

TEST_CASE("fit command") {
    const auto dir = scratch("fit");
    SECTION("gamma fixture reports the column mean") {
        const auto r = cli({"fit", "--input", kData + "/gamma_interarrival.csv", "--family", "gamma", "--out-dir",
                            dir.string()});
        REQUIRE(r.code == 0);
        const auto y = tolpred::read_column(kData + "/gamma_interarrival.csv");
        const double mean = std::accumulate(y.begin(), y.end(), 0.0) / y.size();
        const auto j = json::parse(r.out);
        CHECK(j["mu_hat"].get<double>() == Approx(mean).epsilon(1e-14));
        CHECK(j["family"] == "gamma");
        CHECK(fs::exists(dir / "fit.json"));
        CHECK(fs::exists(dir / "fit.csv"));
        CHECK(fs::exists(dir / "fit_histogram.svg"));
        CHECK(slurp(dir / "fit.json") == r.out);
    }
    SECTION("empty and malformed files are parse errors") {
        put(dir / "empty.csv", "");
        auto r = cli({"fit", "--input", (dir / "empty.csv").string(), "--family", "gamma"});
        CHECK(r.code == tolpred::cli::kParseError);
        put(dir / "bad.csv", "y\n1.5\n2.5\noops\n");
        r = cli({"fit", "--input", (dir / "bad.csv").string(), "--family", "gamma"});
        CHECK(r.code == tolpred::cli::kParseError);
        CHECK(r.err.find("line 4") != std::string::npos);
    }
    SECTION("degenerate data is a fit error") {
        put(dir / "same.csv", "y\n2\n2\n2\n");
        CHECK(cli({"fit", "--input", (dir / "same.csv").string(), "--family", "gamma"}).code ==
              tolpred::cli::kNumericError);
    }
    SECTION("Weibull and count fits") {
        CHECK(cli({"fit", "--input", kData + "/weibull_tot.csv", "--family", "weibull"}).code == 0);
        put(dir / "counts.csv", "events,exposure\n3,1\n5,1\n2,1\n6,1\n");
        const auto r = cli({"fit", "--input", (dir / "counts.csv").string(), "--family", "quasipoisson"});
        REQUIRE(r.code == 0);
        CHECK(json::parse(r.out)["mu_hat"].get<double>() == Approx(4.0));
    }
}

TEST_CASE("fit JSON round trip reproduces intervals") {
    const auto dir = scratch("roundtrip");
    for (const std::string fam : {"gamma", "weibull"}) {
        const std::string input = kData + (fam == "gamma" ? "/gamma_interarrival.csv" : "/weibull_tot.csv");
        const std::string future = fam == "gamma" ? "280" : "1";
        REQUIRE(cli({"fit", "--input", input, "--family", fam, "--out-dir", dir.string()}).code == 0);
        for (const std::string cmd : {"predict", "tolerance"}) {
            const auto a = cli({cmd, "--fit", (dir / "fit.json").string(), "--future", future});
            const auto b = cli({cmd, "--input", input, "--family", fam, "--future", future});
            INFO(fam << " " << cmd << " " << a.err << b.err);
            REQUIRE(a.code == 0);
            CHECK(a.out == b.out);
        }
    }
}

TEST_CASE("predict and tolerance on reported summaries") {
    const auto dir = scratch("predict");
    put(dir / "cfg.json", kInterarrival);
    auto r = cli({"predict", "--config", (dir / "cfg.json").string(), "--method", "link_pivot,ci_plug_prediction",
                  "--out-dir", dir.string()});
    REQUIRE(r.code == 0);
    auto j = json::parse(r.out)["intervals"];
    CHECK(std::round(j[0]["lower"].get<double>()) == 584);
    CHECK(std::round(j[0]["upper"].get<double>()) == 915);
    CHECK(std::round(j[1]["lower"].get<double>()) == 566);
    CHECK(std::round(j[1]["upper"].get<double>()) == 940);
    CHECK(fs::exists(dir / "predict.csv"));

    SECTION("flags win over config values") {
        r = cli({"predict", "--config", (dir / "cfg.json").string(), "--level", "0.8", "--method", "link_pivot"});
        CHECK(json::parse(r.out)["intervals"][0]["level"].get<double>() == 0.8);
    }
    SECTION("odds-ratio success confidence") {
        put(dir / "or.json", R"({"schema_version": 1, "fit": {"family": "binomial", "estimate": 3.75,
            "ci": [1.03, 14.05], "n": 100}, "future": 600})");
        r = cli({"predict", "--config", (dir / "or.json").string()});
        REQUIRE(r.code == 0);
        j = json::parse(r.out);
        CHECK(j["intervals"][0]["lower"].get<double>() == Approx(0.90).margin(0.02));
        CHECK(j["intervals"][0]["upper"].get<double>() == Approx(15.62).margin(0.02));
        CHECK(j["success"]["confidence"].get<double>() == Approx(0.86).margin(0.01));
    }
    SECTION("tolerance") {
        r = cli({"tolerance", "--config", (dir / "cfg.json").string(), "--content", "0.8"});
        REQUIRE(r.code == 0);
        j = json::parse(r.out)["intervals"];
        CHECK(j.size() == 3);
        for (const auto& iv : j) CHECK(iv["content"].get<double>() == 0.8);
    }
    SECTION("config errors") {
        put(dir / "nover.json", R"({"future": 3})");
        CHECK(cli({"predict", "--config", (dir / "nover.json").string()}).code == tolpred::cli::kConfigError);
        put(dir / "broken.json", "{\n \"schema_version\": 1,\n oops }");
        r = cli({"predict", "--config", (dir / "broken.json").string()});
        CHECK(r.code == tolpred::cli::kParseError);
        CHECK(r.err.find("line 3") != std::string::npos);
        CHECK(cli({"predict", "--config", (dir / "cfg.json").string(), "--level", "1.2"}).code ==
              tolpred::cli::kConfigError);
        CHECK(cli({"predict", "--config", (dir / "cfg.json").string(), "--method", "nope"}).code ==
              tolpred::cli::kConfigError);
        CHECK(cli({"predict", "--future", "3"}).code == tolpred::cli::kConfigError);
        CHECK(cli({"predict", "--no-such-flag"}).code == tolpred::cli::kConfigError);
        CHECK(cli({}).code == tolpred::cli::kConfigError);
        CHECK(cli({"--help"}).code == 0);
    }
}

TEST_CASE("curve command reproduces the interarrival crossings") {
    const auto dir = scratch("curve");
    put(dir / "cfg.json", kInterarrival);
    const auto r = cli({"curve", "--config", (dir / "cfg.json").string(), "--out-dir", dir.string()});
    REQUIRE(r.code == 0);
    const auto csv = slurp(dir / "curves.csv");
    CHECK(csv.rfind("method,value,H,H_minus,C,density\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 4 * 2001);

    std::map<std::string, std::pair<double, double>> x;
    const auto parsed = json::parse(r.out);
    for (const auto& c : parsed["crossings"])
        x[c["method"]] = {c["lower"].get<double>(), c["upper"].get<double>()};
    REQUIRE(x.size() == 4);
    CHECK(std::abs(x["ci_plug_prediction"].first - 566) <= 1.0);
    CHECK(std::abs(x["ci_plug_prediction"].second - 940) <= 1.0);
    CHECK(std::abs(x["link_pivot"].first - 583.76) <= 1.0);
    CHECK(std::abs(x["link_pivot"].second - 914.87) <= 1.0);
    // the unit-shape F pivot is the widest of the four
    CHECK(x["f_pivot_unit"].first < x["ci_plug_prediction"].first);
    CHECK(x["f_pivot_unit"].second > x["ci_plug_prediction"].second);

    SECTION("SVG paths carry the CSV curves") {
        const std::string svg = slurp(dir / "curves.svg");
        int paths = 0;
        for (auto pos = svg.find("<path class=\"series\""); pos != std::string::npos;
             pos = svg.find("<path class=\"series\"", pos + 1)) {
            ++paths;
            const auto b = svg.find(" d=\"", pos) + 4;
            const std::string d = svg.substr(b, svg.find('"', b) - b);
            const auto segments = std::count(d.begin(), d.end(), 'L') + std::count(d.begin(), d.end(), 'M');
            CHECK(segments == 2001);
        }
        CHECK(paths == 4);
    }
    SECTION("rerun is byte-identical") {
        const auto before = slurp(dir / "curves.csv");
        REQUIRE(cli({"curve", "--config", (dir / "cfg.json").string(), "--out-dir", dir.string()}).code == 0);
        CHECK(slurp(dir / "curves.csv") == before);
    }
}

TEST_CASE("simulate command") {
    const auto dir = scratch("simulate");
    const auto a = cli({"simulate", "--scenario", kData + "/table1.json", "--runs", "150", "--seed", "7",
                        "--threads", "1", "--out-dir", dir.string()});
    REQUIRE(a.code == 0);
    const auto b = cli({"simulate", "--scenario", kData + "/table1.json", "--runs", "150", "--seed", "7",
                        "--threads", "3"});
    CHECK(a.out == b.out);
    CHECK(a.out.rfind("Interval", 0) == 0);
    CHECK(a.out.find("Link pivot") != std::string::npos);
    CHECK(slurp(dir / "table.txt") == a.out);
    CHECK(fs::exists(dir / "table.csv"));
    CHECK(cli({"simulate", "--scenario", kData + "/table1.json", "--max-runs", "100"}).code ==
          tolpred::cli::kBudgetError);
    CHECK(cli({"simulate", "--scenario", kData + "/table1.json", "--runs", "0"}).code == tolpred::cli::kConfigError);
    CHECK(cli({"simulate"}).code == tolpred::cli::kConfigError);
}

TEST_CASE("recruit command") {
    const auto dir = scratch("recruit");
    auto r = cli({"recruit", "--mode", "trend", "--series", kData + "/b38_synthetic.csv", "--window", "1:12",
                  "--range", "13:30", "--target", "300", "--out-dir", dir.string()});
    REQUIRE(r.code == 0);
    auto j = json::parse(r.out);
    CHECK(j["range"] == json::array({13, 30}));
    CHECK(j["horizon"]["optimistic"].get<int>() <= j["horizon"]["point"].get<int>());
    const auto csv = slurp(dir / "trend.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 32);
    CHECK(csv.find(",extrapolated\n") != std::string::npos);
    CHECK(fs::exists(dir / "trend.svg"));

    r = cli({"recruit", "--mode", "sitedays", "--series", kData + "/b38_synthetic.csv", "--schedule",
             kData + "/future_sites.csv"});
    REQUIRE(r.code == 0);
    j = json::parse(r.out);
    CHECK(j["future_site_days"].get<double>() == 45.0 * 273);
    CHECK(j["additional_subjects"]["lower"].get<double>() < j["additional_subjects"]["upper"].get<double>());

    CHECK(cli({"recruit", "--mode", "sitedays", "--series", kData + "/b38_synthetic.csv"}).code ==
          tolpred::cli::kConfigError);
    CHECK(cli({"recruit", "--mode", "trend", "--series", kData + "/b38_synthetic.csv", "--target", "1e9",
               "--max-horizon", "40"})
              .code == tolpred::cli::kNumericError);
    CHECK(cli({"recruit", "--mode", "interarrival", "--input", kData + "/gamma_interarrival.csv", "--total", "300"})
              .code == 0);
}

TEST_CASE("survival command") {
    const auto dir = scratch("survival");
    const auto r = cli({"survival", "--input", kData + "/weibull_tot.csv", "--out-dir", dir.string()});
    REQUIRE(r.code == 0);
    const auto t = tolpred::read_csv_file((dir / "bands.csv").string());
    REQUIRE(t.rows.size() == 49);
    const auto tl = t.values("tolerance_lower"), tu = t.values("tolerance_upper");
    const auto pl = t.values("prediction_lower"), pu = t.values("prediction_upper");
    for (std::size_t i = 0; i < tl.size(); ++i) {
        CHECK(pl[i] <= tl[i]);
        CHECK(pu[i] >= tu[i]);
    }
    CHECK(fs::exists(dir / "km.csv"));
    CHECK(fs::exists(dir / "survival.svg"));
    CHECK(cli({"survival", "--input", kData + "/weibull_tot.csv", "--p-grid", "0,0.5"}).code ==
          tolpred::cli::kConfigError);
}

TEST_CASE("svg rendering") {
    using namespace tolpred::svg;
    CHECK(nice_ticks(0.0, 1.0) == std::vector<double>{0.0, 0.2, 0.4, 0.6000000000000001, 0.8, 1.0});
    Plot p;
    p.series = {Series{"a<b", {0, 1, 2}, {0, 1, NAN}}};
    const auto s = render(p);
    CHECK(s.find("a&lt;b") != std::string::npos);
    CHECK(s == render(p));
    CHECK(s.find("nan") == std::string::npos);
}
