// Copyright 2026 The Servoland Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "servoland/scenario.hpp"

namespace servoland {

inline constexpr const char* kTraceVersionLine = "# servoland-trace v1";

/// Raised on filesystem or format problems; the message names the path.
class OutputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shortest round-trip decimal form of a double.
std::string format_number(double v);

std::string format_trace_csv(const RunRecord& record);
std::string format_summary_csv(const std::vector<RunSummary>& runs);
std::string format_report_json(const MonteCarloReport& report);

void write_text_file(const std::filesystem::path& path, const std::string& text);

/// Columns of a trace CSV by header name, cell values as text.
struct TraceTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const;
    std::vector<double> numbers(const std::string& name) const;  // empty cells become NaN
};

TraceTable parse_trace_csv(const std::string& text);
TraceTable read_trace_csv(const std::filesystem::path& path);

/// Figures for one trace: laser ranges with trigger marks, feature error
/// norm, and the top-down trajectory of vehicle and deck. Returns the files
/// written.
std::vector<std::filesystem::path> write_plots(const TraceTable& trace, const std::filesystem::path& out_dir,
                                               const std::string& stem = "trace");

/// Trace CSV per run, summary.csv, and plots for every run.
void emit_run_outputs(const RunRecord& record, const std::filesystem::path& out_dir);

}  // namespace servoland
