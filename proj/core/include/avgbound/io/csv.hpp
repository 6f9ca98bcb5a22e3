#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "avgbound/averaging/estimator.hpp"
#include "avgbound/runner/runner.hpp"

namespace avgbound::io {

/// Shortest decimal that parses back to the same double.
std::string format_double(double x);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

/// Writes a UTF-8 CSV with LF line endings. Throws Error on I/O failure.
void write_csv(const std::filesystem::path& path, const CsvTable& table);
CsvTable read_csv(const std::filesystem::path& path);

/// Columns tau, n_P, n_E, n_Y, m_P, m_E, m_Y over the estimator samples.
CsvTable estimator_table(const averaging::EstimatorCurves& curves);
/// Columns t_orbits, absL_P, envelope_P, absL_E, envelope_E, absL_Y, envelope_Y.
CsvTable comparison_table(const runner::ComparisonReport& report);

void emit_csv(const averaging::EstimatorCurves& curves, const std::filesystem::path& path);
void emit_csv(const runner::ComparisonReport& report, const std::filesystem::path& path);

using KeyValues = std::vector<std::pair<std::string, std::string>>;

/// Flat key=value text, one pair per line; '#' starts a comment line.
void write_key_values(const std::filesystem::path& path, const KeyValues& entries);
KeyValues read_key_values(const std::filesystem::path& path);

}  // namespace avgbound::io
