#pragma once

#include <string>

#include "harness/experiment.hpp"

namespace unity::harness {

// calls.csv, cpu.csv, media.csv, summary.json, unity.log.tsv. Creates `dir`
// when missing; throws Errc::io_error.
void emit_report(const RunResult& run, const std::string& dir);
// One sub-directory per config plus ranking.csv and matrix.json.
void emit_matrix_report(const MatrixReport& report, const std::string& dir);

std::string calls_csv(const MetricsStore& store);
std::string cpu_csv(const MetricsStore& store);
std::string media_csv(const MetricsStore& store);
std::string summary_json(const RunResult& run);
std::string ranking_csv(const MatrixReport& report);

}  // namespace unity::harness
