#pragma once

// CSV readers for the input schemas. Malformed rows raise ParseError naming
// the 1-based line number.

#include "tolpred/applications.hpp"
#include "tolpred/fit.hpp"

#include <istream>
#include <string>
#include <vector>

namespace tolpred {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
    std::vector<std::size_t> lines;  // source line of each row

    std::size_t column(const std::string& name) const;  // throws ParseError when absent
    std::vector<double> values(const std::string& name) const;
};

// Numeric CSV with a header row. Blank lines are skipped.
CsvTable read_csv(std::istream& is, const std::string& source = "input");
CsvTable read_csv_file(const std::string& path);

// Single numeric column: the named one, or the first when name is empty.
std::vector<double> read_column(const std::string& path, const std::string& name = "");

// period,events,exposure_days,active_sites
RecruitmentSeries read_recruitment(const std::string& path);
// period,active_sites[,exposure_days]; periods must continue the series.
void read_future_schedule(const std::string& path, RecruitmentSeries& series);
// time,event
std::vector<SurvivalSample> read_survival(const std::string& path);

}  // namespace tolpred
