#pragma once

#include <filesystem>
#include <ostream>
#include <string>

#include "mfbn/experiment.hpp"
#include "mfbn/learning.hpp"

namespace mfbn {

/// Shortest round-trip representation; "nan", "inf", "-inf" otherwise.
std::string format_double(double x);

/// Quotes a field when it contains a comma, quote or newline.
std::string csv_field(const std::string& text);

void write_raw_csv(const ErrorStats& stats, std::ostream& out);
void write_summary_csv(const ErrorStats& stats, std::ostream& out);
void write_histogram_csv(const Histogram& histogram, std::ostream& out);
void write_history_csv(const TrainHistory& history, std::ostream& out);

/// raw.csv, summary.csv and one histogram file per (scheme, clamp):
/// hist_<scheme>.csv when a single clamp was used, hist_<scheme>_<clamp>.csv otherwise.
void write_experiment_outputs(const ErrorStats& stats, const std::filesystem::path& dir);

}  // namespace mfbn
