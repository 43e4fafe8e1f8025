#pragma once

// Command-line front end. Every subcommand reads an optional JSON config
// (schema_version 1) whose keys mirror the long flag names with underscores;
// flags given on the command line win over config values.

#include "tolpred/fit.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace tolpred::cli {

enum ExitCode : int {
    kOk = 0,
    kConfigError = 1,
    kParseError = 2,
    kNumericError = 3,
    kBudgetError = 4,
};

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Full-precision serialization, including the sufficient statistics behind
// likelihood-ratio limits, so a fit written by `fit` reproduces every
// downstream interval exactly when read back.
std::string fit_to_json(const FitResult& fit, double level = 0.95);
FitResult fit_from_json(const std::string& text);

}  // namespace tolpred::cli
