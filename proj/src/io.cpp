#include "tolpred/io.hpp"

#include "tolpred/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace tolpred {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) out.push_back(trim(f));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double to_number(const std::string& f, const std::string& where) {
    double v = 0.0;
    const char* b = f.data();
    const char* e = f.data() + f.size();
    if (!f.empty() && *b == '+') ++b;
    const auto r = std::from_chars(b, e, v);
    if (f.empty() || r.ec != std::errc() || r.ptr != e || !std::isfinite(v))
        throw std::invalid_argument(where + ": '" + f + "' is not a number");
    return v;
}

}  // namespace

std::size_t CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    throw ParseError("missing column '" + name + "'", 1);
}

std::vector<double> CsvTable::values(const std::string& name) const {
    const auto c = column(name);
    std::vector<double> v;
    v.reserve(rows.size());
    for (const auto& r : rows) v.push_back(r[c]);
    return v;
}

CsvTable read_csv(std::istream& is, const std::string& source) {
    CsvTable t;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (!trim(line).empty()) break;
    }
    if (trim(line).empty()) throw ParseError(source + ": empty file", 0);
    t.header = split(trim(line));
    for (const auto& h : t.header)
        if (h.empty()) throw ParseError(source + " line " + std::to_string(lineno) + ": empty column name", lineno);
    while (std::getline(is, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto f = split(trim(line));
        const std::string where = source + " line " + std::to_string(lineno);
        if (f.size() != t.header.size())
            throw ParseError(where + ": expected " + std::to_string(t.header.size()) + " fields, got " +
                                 std::to_string(f.size()),
                             lineno);
        std::vector<double> row;
        try {
            for (const auto& x : f) row.push_back(to_number(x, where));
        } catch (const std::invalid_argument& e) {
            throw ParseError(e.what(), lineno);
        }
        t.rows.push_back(std::move(row));
        t.lines.push_back(lineno);
    }
    if (t.rows.empty()) throw ParseError(source + ": no data rows", lineno);
    return t;
}

CsvTable read_csv_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open " + path);
    return read_csv(f, path);
}

std::vector<double> read_column(const std::string& path, const std::string& name) {
    const auto t = read_csv_file(path);
    return t.values(name.empty() ? t.header.front() : name);
}

namespace {

void check_periods(const CsvTable& t, const std::string& path, double first) {
    const auto c = t.column("period");
    for (std::size_t i = 0; i < t.rows.size(); ++i)
        if (t.rows[i][c] != first + static_cast<double>(i))
            throw ParseError(path + " line " + std::to_string(t.lines[i]) + ": periods must be contiguous from " +
                                 std::to_string(static_cast<long long>(first)),
                             t.lines[i]);
}

}  // namespace

RecruitmentSeries read_recruitment(const std::string& path) {
    const auto t = read_csv_file(path);
    check_periods(t, path, 1.0);
    RecruitmentSeries s;
    s.events = t.values("events");
    s.exposure_days = t.values("exposure_days");
    s.active_sites = t.values("active_sites");
    for (std::size_t i = 0; i < t.rows.size(); ++i)
        if (s.events[i] < 0 || s.exposure_days[i] < 0 || s.active_sites[i] < 0)
            throw ParseError(path + " line " + std::to_string(t.lines[i]) + ": negative value", t.lines[i]);
    return s;
}

void read_future_schedule(const std::string& path, RecruitmentSeries& series) {
    const auto t = read_csv_file(path);
    check_periods(t, path, static_cast<double>(series.periods() + 1));
    series.future_sites = t.values("active_sites");
    series.future_exposure_days.clear();
    for (const auto& h : t.header)
        if (h == "exposure_days") series.future_exposure_days = t.values("exposure_days");
}

std::vector<SurvivalSample> read_survival(const std::string& path) {
    const auto t = read_csv_file(path);
    const auto ct = t.column("time");
    const auto ce = t.column("event");
    std::vector<SurvivalSample> out;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const double time = t.rows[i][ct], ev = t.rows[i][ce];
        const std::string where = path + " line " + std::to_string(t.lines[i]);
        if (!(time > 0.0)) throw ParseError(where + ": time must be > 0", t.lines[i]);
        if (ev != 0.0 && ev != 1.0) throw ParseError(where + ": event must be 0 or 1", t.lines[i]);
        out.push_back({time, ev == 1.0});
    }
    return out;
}

}  // namespace tolpred
