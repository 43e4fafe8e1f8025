#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tolpred/applications.hpp"
#include "tolpred/curves.hpp"
#include "tolpred/dist.hpp"
#include "tolpred/errors.hpp"
#include "tolpred/fit.hpp"
#include "tolpred/intervals.hpp"
#include "tolpred/simlab.hpp"

#include <sstream>

namespace py = pybind11;
using namespace tolpred;

namespace {

std::string repr(const IntervalEstimate& iv) {
    std::ostringstream os;
    os << "IntervalEstimate(" << to_string(iv.method) << ", level=" << iv.level << ", lower=" << iv.lower
       << ", upper=" << iv.upper << ")";
    return os.str();
}

py::dict curve_dict(const CurveTable& t) {
    py::dict d;
    d["grid"] = t.grid;
    d["H"] = t.H;
    d["H_minus"] = t.H_minus;
    d["C"] = t.C;
    d["density"] = t.density;
    d["method"] = to_string(t.method);
    d["point"] = t.point;
    d["split"] = t.split;
    d["clamped"] = t.clamped;
    return d;
}

CurveTable curve_from_dict(const py::dict& d) {
    CurveTable t;
    t.grid = d["grid"].cast<std::vector<double>>();
    t.H = d["H"].cast<std::vector<double>>();
    t.H_minus = d["H_minus"].cast<std::vector<double>>();
    t.C = d["C"].cast<std::vector<double>>();
    t.density = d["density"].cast<std::vector<double>>();
    t.split = d["split"].cast<double>();
    t.point = d["point"].cast<double>();
    return t;
}

py::list report_rows(const CoverageReport& r) {
    py::list rows;
    for (const auto& c : r.cells) {
        py::dict row;
        row["method"] = to_string(c.method);
        row["level"] = c.level;
        row["n"] = c.cell.n;
        row["N"] = c.cell.N;
        row["coverage"] = c.coverage;
        row["mc_se"] = c.mc_se;
        row["covered"] = c.covered;
        row["runs"] = c.runs;
        row["failures"] = c.failures;
        row["reference"] = c.reference ? py::cast(*c.reference) : py::none();
        row["pass"] = c.pass;
        rows.append(row);
    }
    return rows;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Prediction and tolerance intervals for recruitment and related targets";

    auto base = py::register_exception<Error>(m, "TolpredError", PyExc_RuntimeError);
    py::register_exception<DomainError>(m, "DomainError", base.ptr());
    py::register_exception<InsufficientDataError>(m, "InsufficientDataError", base.ptr());
    py::register_exception<DegenerateDataError>(m, "DegenerateDataError", base.ptr());
    py::register_exception<SeparationError>(m, "SeparationError", base.ptr());
    py::register_exception<ConvergenceError>(m, "ConvergenceError", base.ptr());
    py::register_exception<ConstraintError>(m, "ConstraintError", base.ptr());
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<ParseError>(m, "ParseError", base.ptr());
    py::register_exception<HorizonExceededError>(m, "HorizonExceededError", base.ptr());
    py::register_exception<SimulationBudgetError>(m, "SimulationBudgetError", base.ptr());

    py::enum_<FitFamily>(m, "FitFamily")
        .value("Gamma", FitFamily::Gamma)
        .value("QuasiPoisson", FitFamily::QuasiPoisson)
        .value("BinomialLogit", FitFamily::BinomialLogit)
        .value("WeibullAFT", FitFamily::WeibullAFT);
    py::enum_<Link>(m, "Link").value("Identity", Link::Identity).value("Log", Link::Log).value("Logit", Link::Logit);
    py::enum_<SeKind>(m, "SeKind")
        .value("Model", SeKind::Model)
        .value("Sandwich", SeKind::Sandwich)
        .value("Both", SeKind::Both);
    py::enum_<Sided>(m, "Sided").value("Two", Sided::Two).value("Lower", Sided::Lower).value("Upper", Sided::Upper);
    py::enum_<Reference>(m, "Reference").value("StudentT", Reference::StudentT).value("Normal", Reference::Normal);
    py::enum_<CountVariance>(m, "CountVariance")
        .value("EqualVariance", CountVariance::EqualVariance)
        .value("ExposureScaled", CountVariance::ExposureScaled);
    py::enum_<SeRule>(m, "SeRule").value("Symmetric", SeRule::Symmetric).value("WidestArm", SeRule::WidestArm);
    py::enum_<SuccessScale>(m, "SuccessScale")
        .value("OddsRatio", SuccessScale::OddsRatio)
        .value("ZStatistic", SuccessScale::ZStatistic);
    py::enum_<Param>(m, "Param").value("Mu", Param::Mu).value("K", Param::K);

    py::enum_<Method> method(m, "Method");
    for (int i = 0; i <= static_cast<int>(Method::ProfileLRCI); ++i) {
        const auto v = static_cast<Method>(i);
        method.value(to_string(v).c_str(), v);
    }

    py::class_<IntervalEstimate>(m, "IntervalEstimate")
        .def(py::init<>())
        .def_readwrite("lower", &IntervalEstimate::lower)
        .def_readwrite("upper", &IntervalEstimate::upper)
        .def_readwrite("level", &IntervalEstimate::level)
        .def_readwrite("content_p", &IntervalEstimate::content_p)
        .def_readwrite("method", &IntervalEstimate::method)
        .def_readwrite("sided", &IntervalEstimate::sided)
        .def_readwrite("point", &IntervalEstimate::point)
        .def_readwrite("lower_int", &IntervalEstimate::lower_int)
        .def_readwrite("upper_int", &IntervalEstimate::upper_int)
        .def_readwrite("lower_open", &IntervalEstimate::lower_open)
        .def_readwrite("upper_open", &IntervalEstimate::upper_open)
        .def_property_readonly("width", &IntervalEstimate::width)
        .def("contains", &IntervalEstimate::contains)
        .def("__repr__", &repr);

    py::class_<FitResult>(m, "FitResult")
        .def_readwrite("family", &FitResult::family)
        .def_readwrite("link", &FitResult::link)
        .def_readwrite("mu_hat", &FitResult::mu_hat)
        .def_readwrite("k_hat", &FitResult::k_hat)
        .def_readwrite("phi_hat", &FitResult::phi_hat)
        .def_readwrite("se_g_mu_model", &FitResult::se_g_mu_model)
        .def_readwrite("se_g_mu_sandwich", &FitResult::se_g_mu_sandwich)
        .def_readwrite("se_k", &FitResult::se_k)
        .def_readwrite("cov_mu_k", &FitResult::cov_mu_k)
        .def_readwrite("n_obs", &FitResult::n_obs)
        .def_readwrite("n_events", &FitResult::n_events)
        .def_readwrite("exposure_total", &FitResult::exposure_total)
        .def_readwrite("se_kind", &FitResult::se_kind)
        .def_readonly("loglik", &FitResult::loglik)
        .def_readonly("from_data", &FitResult::from_data)
        .def_property_readonly("se_g_mu", py::overload_cast<>(&FitResult::se_g_mu, py::const_))
        .def("weibull_scale", &FitResult::weibull_scale)
        .def("survival_at", &FitResult::survival_at);

    py::class_<PredictionTarget>(m, "PredictionTarget")
        .def(py::init([](long long n, double future_units) { return PredictionTarget{n, future_units}; }),
             py::arg("n"), py::arg("future_units"))
        .def_readwrite("n", &PredictionTarget::n)
        .def_readwrite("future_units", &PredictionTarget::future_units);

    py::class_<PivotOptions>(m, "PivotOptions")
        .def(py::init([](Sided sided, std::optional<Reference> ref, std::optional<SeKind> se, CountVariance cv) {
                 PivotOptions o;
                 o.sided = sided;
                 o.reference = ref;
                 o.se_kind = se;
                 o.count_variance = cv;
                 return o;
             }),
             py::arg("sided") = Sided::Two, py::arg("reference") = py::none(), py::arg("se_kind") = py::none(),
             py::arg("count_variance") = CountVariance::EqualVariance)
        .def_readwrite("sided", &PivotOptions::sided)
        .def_readwrite("reference", &PivotOptions::reference)
        .def_readwrite("se_kind", &PivotOptions::se_kind)
        .def_readwrite("count_variance", &PivotOptions::count_variance);

    // fitting
    m.def("summary_fit", &summary_fit, py::arg("family"), py::arg("link"), py::arg("mu_hat"), py::arg("se_g_mu"),
          py::arg("n_obs"), py::arg("k_hat") = py::none(), py::arg("phi_hat") = py::none());
    m.def("fit_gamma", &fit_gamma_intercept, py::arg("data"), py::arg("link") = Link::Log,
          py::arg("se_kind") = SeKind::Both);
    m.def("fit_quasipoisson", &fit_quasipoisson, py::arg("events"), py::arg("exposure"), py::arg("link") = Link::Log);
    m.def("fit_binomial_table", &fit_binomial_table, py::arg("a"), py::arg("b"), py::arg("c"), py::arg("d"),
          py::arg("continuity_correction") = false);
    m.def(
        "fit_weibull",
        [](const std::vector<double>& times, const std::vector<int>& events, std::optional<double> shape) {
            if (times.size() != events.size()) throw DomainError("times and events differ in length");
            std::vector<SurvivalSample> data;
            for (std::size_t i = 0; i < times.size(); ++i) data.push_back({times[i], events[i] != 0});
            return fit_weibull_censored(data, shape);
        },
        py::arg("times"), py::arg("events"), py::arg("fixed_shape") = py::none());
    m.def("wald_ci", &wald_ci, py::arg("fit"), py::arg("level") = 0.95, py::arg("se_kind") = py::none());
    m.def("profile_lr_ci", &profile_lr_ci, py::arg("fit"), py::arg("param") = Param::Mu, py::arg("level") = 0.95);
    m.def("se_from_reported_ci", &se_from_reported_ci, py::arg("point"), py::arg("lower"), py::arg("upper"),
          py::arg("level"), py::arg("link"), py::arg("rule") = SeRule::WidestArm);
    m.def("arm_se_from_reported_ci", &arm_se_from_reported_ci, py::arg("point"), py::arg("lower"), py::arg("upper"),
          py::arg("level"), py::arg("link"));
    m.def(
        "interval",
        [](double lower, double upper, double level) {
            IntervalEstimate iv;
            iv.lower = lower;
            iv.upper = upper;
            iv.level = level;
            return iv;
        },
        py::arg("lower"), py::arg("upper"), py::arg("level") = 0.95);

    // intervals
    m.def("link_pivot", &predict_sum_link, py::arg("fit"), py::arg("target"), py::arg("level"),
          py::arg("options") = PivotOptions{});
    m.def("ci_plug_prediction", &predict_sum_plugci, py::arg("fit"), py::arg("target"), py::arg("level"),
          py::arg("mu_ci") = py::none(), py::arg("sided") = Sided::Two);
    m.def("f_pivot", &predict_sum_fpivot, py::arg("ybar"), py::arg("n"), py::arg("future_units"), py::arg("k"),
          py::arg("level"), py::arg("sided") = Sided::Two);
    m.def("plug_in", &predict_sum_plugin, py::arg("fit"), py::arg("target"), py::arg("level"),
          py::arg("sided") = Sided::Two);
    m.def("delta_tolerance", &tolerance_delta, py::arg("fit"), py::arg("p"), py::arg("level"), py::arg("target"),
          py::arg("link") = py::none(), py::arg("options") = PivotOptions{});
    m.def("noncentral_tolerance", &tolerance_nct, py::arg("fit"), py::arg("p"), py::arg("level"), py::arg("target"),
          py::arg("options") = PivotOptions{});
    m.def("ci_plug_tolerance", &tolerance_plugci, py::arg("fit"), py::arg("p"), py::arg("level"), py::arg("target"),
          py::arg("mu_ci") = py::none(), py::arg("k_ci") = py::none(), py::arg("sided") = Sided::Two);
    m.def("kris_peng", &predict_count_kris, py::arg("fit"), py::arg("future_exposure"), py::arg("level"));
    m.def("or_prediction", &predict_or, py::arg("fit"), py::arg("n"), py::arg("m"), py::arg("level"),
          py::arg("reference") = Reference::Normal, py::arg("sided") = Sided::Two);
    m.def("scale_interval", &scale_interval, py::arg("ci"), py::arg("factor"));
    m.def("delta_quantile_se", &delta_quantile_se, py::arg("fit"), py::arg("prob"), py::arg("future_units"),
          py::arg("link"), py::arg("se_kind") = py::none());

    // curves
    m.def(
        "pvalue_upper",
        [](const FitResult& fit, double y, Method method, const PredictionTarget& target) {
            return pvalue_upper(fit, y, method, target);
        },
        py::arg("fit"), py::arg("y"), py::arg("method"), py::arg("target"));
    m.def(
        "build_curve",
        [](const FitResult& fit, Method method, const PredictionTarget& target, std::string grid, double lower,
           double upper, int points, std::optional<double> fpivot_k,
           std::optional<std::pair<double, double>> arm_se) {
            GridSpec g;
            if (grid == "auto") g.mode = GridSpec::Mode::Auto;
            else if (grid == "linear") g.mode = GridSpec::Mode::Linear;
            else if (grid == "log") g.mode = GridSpec::Mode::Log;
            else throw DomainError("grid must be auto, linear or log");
            g.lower = lower;
            g.upper = upper;
            g.points = points;
            CurveOptions o;
            o.fpivot_k = fpivot_k;
            o.arm_se = arm_se;
            return curve_dict(build_curve(fit, method, target, g, o));
        },
        py::arg("fit"), py::arg("method"), py::arg("target"), py::arg("grid") = "auto", py::arg("lower") = 0.0,
        py::arg("upper") = 0.0, py::arg("points") = 2001, py::arg("fpivot_k") = py::none(),
        py::arg("arm_se") = py::none());
    m.def(
        "crossings", [](const py::dict& curve, double level) { return crossings(curve_from_dict(curve), level); },
        py::arg("curve"), py::arg("level"));
    m.def("success_confidence", &success_confidence, py::arg("fit"), py::arg("n"), py::arg("m"), py::arg("threshold"),
          py::arg("scale") = SuccessScale::OddsRatio, py::arg("reference") = Reference::Normal);
    m.def("minimum_detectable_or", &minimum_detectable_or, py::arg("fit"), py::arg("n"), py::arg("m"),
          py::arg("level") = 0.95);

    // Weibull bands
    m.def(
        "weibull_bands",
        [](const FitResult& fit, const std::vector<double>& p_grid, double level,
           std::optional<long long> future_events) {
            WeibullBand band;
            if (future_events) {
                band.kind = WeibullBand::Kind::RepeatedExperiment;
                band.future_events = *future_events;
            }
            py::list out;
            for (const auto& b : weibull_bands(fit, p_grid, band, level)) {
                py::dict d;
                d["p"] = b.p;
                d["estimate"] = b.estimate;
                d["lower"] = b.interval.lower;
                d["upper"] = b.interval.upper;
                out.append(d);
            }
            return out;
        },
        py::arg("fit"), py::arg("p_grid"), py::arg("level") = 0.95, py::arg("future_events") = py::none());

    // distributions
    m.def("noncentral_t_cdf", &noncentral_t_cdf, py::arg("x"), py::arg("df"), py::arg("nc"));
    m.def("noncentral_t_quantile", &noncentral_t_quantile, py::arg("p"), py::arg("df"), py::arg("nc"));
    m.def("student_t_quantile", &student_t_quantile, py::arg("p"), py::arg("df"));

    // simulation
    m.def(
        "simulate",
        [](const std::string& scenario_json, std::optional<long long> runs, std::optional<std::uint64_t> seed,
           int threads) {
            auto spec = scenario_from_json(scenario_json);
            if (runs) spec.n_runs = *runs;
            if (seed) spec.seed = *seed;
            spec.threads = threads;
            CoverageReport r;
            {
                py::gil_scoped_release release;
                r = run_scenario(spec);
            }
            return report_rows(r);
        },
        py::arg("scenario_json"), py::arg("runs") = py::none(), py::arg("seed") = py::none(), py::arg("threads") = 0);
}
