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

#include "servoland/outputs.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace servoland {

namespace {

std::string format_optional(const std::optional<double>& v) {
    return v ? format_number(*v) : std::string();
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) {
        cells.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') {
        cells.emplace_back();
    }
    return cells;
}

// Minimal SVG line chart.
struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    std::string color;
};

std::string escape_xml(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<':
                out += "&lt;";
                break;
            case '>':
                out += "&gt;";
                break;
            case '&':
                out += "&amp;";
                break;
            default:
                out += c;
        }
    }
    return out;
}

std::string svg_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                      const std::vector<Series>& series, const std::vector<double>& marks = {}) {
    constexpr double kW = 800.0, kH = 450.0, kLeft = 70.0, kRight = 150.0, kTop = 40.0, kBottom = 50.0;
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& s : series) {
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (std::isfinite(s.x[i]) && std::isfinite(s.y[i])) {
                x0 = std::min(x0, s.x[i]);
                x1 = std::max(x1, s.x[i]);
                y0 = std::min(y0, s.y[i]);
                y1 = std::max(y1, s.y[i]);
            }
        }
    }
    if (!std::isfinite(x0)) {
        x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
    }
    if (x1 - x0 < 1e-9) {
        x1 = x0 + 1.0;
    }
    if (y1 - y0 < 1e-9) {
        y0 -= 0.5;
        y1 += 0.5;
    }
    const double pad = 0.05 * (y1 - y0);
    y0 -= pad;
    y1 += pad;
    const double pw = kW - kLeft - kRight, ph = kH - kTop - kBottom;
    auto px = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * pw; };
    auto py = [&](double y) { return kTop + (y1 - y) / (y1 - y0) * ph; };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << kW / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape_xml(title)
        << "</text>\n";
    svg << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double xv = x0 + (x1 - x0) * i / 5.0;
        const double yv = y0 + (y1 - y0) * i / 5.0;
        svg << "<text x=\"" << px(xv) << "\" y=\"" << kH - kBottom + 18 << "\" text-anchor=\"middle\">"
            << format_number(std::round(xv * 100.0) / 100.0) << "</text>\n";
        svg << "<text x=\"" << kLeft - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">"
            << format_number(std::round(yv * 100.0) / 100.0) << "</text>\n";
    }
    svg << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kH - 10 << "\" text-anchor=\"middle\">"
        << escape_xml(x_label) << "</text>\n";
    svg << "<text transform=\"translate(16," << kTop + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
        << escape_xml(y_label) << "</text>\n";
    for (double m : marks) {
        svg << "<line x1=\"" << px(m) << "\" y1=\"" << kTop << "\" x2=\"" << px(m) << "\" y2=\"" << kTop + ph
            << "\" stroke=\"red\" stroke-dasharray=\"4,3\"/>\n";
    }
    int legend = 0;
    for (const auto& s : series) {
        svg << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (std::isfinite(s.x[i]) && std::isfinite(s.y[i])) {
                svg << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
            }
        }
        svg << "\"/>\n";
        const double ly = kTop + 15.0 + 18.0 * legend++;
        svg << "<line x1=\"" << kW - kRight + 10 << "\" y1=\"" << ly << "\" x2=\"" << kW - kRight + 30 << "\" y2=\""
            << ly << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"/>\n";
        svg << "<text x=\"" << kW - kRight + 35 << "\" y=\"" << ly + 4 << "\">" << escape_xml(s.label) << "</text>\n";
    }
    if (!marks.empty()) {
        const double ly = kTop + 15.0 + 18.0 * legend;
        svg << "<line x1=\"" << kW - kRight + 10 << "\" y1=\"" << ly << "\" x2=\"" << kW - kRight + 30 << "\" y2=\""
            << ly << "\" stroke=\"red\" stroke-dasharray=\"4,3\"/>\n";
        svg << "<text x=\"" << kW - kRight + 35 << "\" y=\"" << ly + 4 << "\">trigger</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#17becf"};

}  // namespace

std::string format_number(double v) {
    if (std::isnan(v)) {
        return "nan";
    }
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string format_trace_csv(const RunRecord& record) {
    std::ostringstream out;
    out << kTraceVersionLine << '\n';
    out << "t,phase,event,uav_x,uav_y,uav_z,uav_yaw,vel_vx,vel_vy,vel_vz,vel_omega,cmd_vx,cmd_vy,cmd_vz,cmd_omega,"
           "gimbal_pitch,gimbal_pitch_cmd,deck_x,deck_y,deck_z,deck_vx,deck_vy,feature_error,detected";
    const std::size_t n_lasers = record.rows.empty() ? 0 : record.rows.front().lasers.size();
    for (std::size_t i = 0; i < n_lasers; ++i) {
        out << ",laser_" << i;
    }
    out << ",triggered\n";
    for (const auto& r : record.rows) {
        const double values[] = {r.uav_position.x(), r.uav_position.y(), r.uav_position.z(), r.uav_yaw,
                                 r.velocity.vx,      r.velocity.vy,      r.velocity.vz,      r.velocity.omega,
                                 r.command.vx,       r.command.vy,       r.command.vz,       r.command.omega,
                                 r.gimbal_pitch,     r.gimbal_pitch_cmd, r.deck_center.x(),  r.deck_center.y(),
                                 r.deck_center.z(),  r.deck_velocity.x(), r.deck_velocity.y()};
        out << format_number(r.t) << ',' << to_string(r.phase) << ',' << r.event;
        for (double v : values) {
            out << ',' << format_number(v);
        }
        out << ',' << format_optional(r.feature_error) << ',' << (r.detected ? 1 : 0);
        for (double l : r.lasers) {
            out << ',' << format_number(l);
        }
        out << ',' << (r.triggered ? 1 : 0) << '\n';
    }
    return out.str();
}

std::string format_summary_csv(const std::vector<RunSummary>& runs) {
    std::ostringstream out;
    out << "seed,result,detection_to_touchdown,touchdown_offset,touchdown_rel_speed,duration,trigger_time,"
           "first_detection,min_deck_distance,approached,final_event\n";
    for (const auto& r : runs) {
        out << r.seed << ',' << to_string(r.outcome.result) << ',' << format_optional(r.outcome.detection_to_touchdown)
            << ',' << format_optional(r.outcome.touchdown_offset) << ','
            << format_optional(r.outcome.touchdown_rel_speed) << ',' << format_number(r.duration) << ','
            << format_optional(r.trigger_time) << ',' << format_optional(r.first_detection) << ','
            << format_number(r.min_deck_distance) << ',' << (r.approached ? 1 : 0) << ',' << r.outcome.final_event
            << '\n';
    }
    return out.str();
}

std::string format_report_json(const MonteCarloReport& report) {
    using nlohmann::json;
    auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    json j;
    j["n_runs"] = report.n_runs;
    j["landed"] = report.landed;
    j["approached"] = report.approached;
    j["landing_rate"] = report.landing_rate;
    j["approach_rate"] = report.approach_rate;
    j["detection_to_touchdown"] = {{"mean", opt(report.mean_detection_to_touchdown)},
                                   {"min", opt(report.min_detection_to_touchdown)},
                                   {"max", opt(report.max_detection_to_touchdown)}};
    json runs = json::array();
    for (const auto& r : report.runs) {
        runs.push_back({{"seed", r.seed},
                        {"result", std::string(to_string(r.outcome.result))},
                        {"detection_to_touchdown", opt(r.outcome.detection_to_touchdown)},
                        {"min_deck_distance", r.min_deck_distance},
                        {"approached", r.approached}});
    }
    j["runs"] = runs;
    return j.dump(2) + "\n";
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::error_code ec;
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) {
            throw OutputError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
        }
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw OutputError("cannot open " + path.string() + " for writing");
    }
    out << text;
    if (!out) {
        throw OutputError("write failed for " + path.string());
    }
}

std::size_t TraceTable::column(const std::string& name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) {
        throw OutputError("trace has no column '" + name + "'");
    }
    return static_cast<std::size_t>(it - columns.begin());
}

std::vector<double> TraceTable::numbers(const std::string& name) const {
    const std::size_t c = column(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& row : rows) {
        const std::string& cell = row.at(c);
        double v = std::numeric_limits<double>::quiet_NaN();
        if (!cell.empty() && cell != "nan") {
            const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (res.ec != std::errc()) {
                throw OutputError("bad number '" + cell + "' in column '" + name + "'");
            }
        }
        out.push_back(v);
    }
    return out;
}

TraceTable parse_trace_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kTraceVersionLine) {
        throw OutputError("not a servoland trace (missing version line)");
    }
    TraceTable table;
    if (!std::getline(in, line)) {
        throw OutputError("trace has no header row");
    }
    table.columns = split_csv_line(line);
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        auto cells = split_csv_line(line);
        if (cells.size() != table.columns.size()) {
            throw OutputError("trace row has " + std::to_string(cells.size()) + " cells, expected " +
                              std::to_string(table.columns.size()));
        }
        table.rows.push_back(std::move(cells));
    }
    return table;
}

TraceTable read_trace_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw OutputError("cannot read trace " + path.string());
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    try {
        return parse_trace_csv(buffer.str());
    } catch (const OutputError& e) {
        throw OutputError(path.string() + ": " + e.what());
    }
}

std::vector<std::filesystem::path> write_plots(const TraceTable& trace, const std::filesystem::path& out_dir,
                                               const std::string& stem) {
    const std::vector<double> t = trace.numbers("t");
    std::vector<std::filesystem::path> written;

    std::vector<Series> lasers;
    for (std::size_t i = 0;; ++i) {
        const std::string name = "laser_" + std::to_string(i);
        if (std::find(trace.columns.begin(), trace.columns.end(), name) == trace.columns.end()) {
            break;
        }
        lasers.push_back({name, t, trace.numbers(name), kPalette[i % std::size(kPalette)]});
    }
    std::vector<double> marks;
    const auto triggered = trace.numbers("triggered");
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (triggered[i] > 0.5 && (i == 0 || triggered[i - 1] < 0.5)) {
            marks.push_back(t[i]);
        }
    }
    written.push_back(out_dir / (stem + "_lasers.svg"));
    write_text_file(written.back(), svg_chart("Laser ranges", "time (s)", "range (m)", lasers, marks));

    written.push_back(out_dir / (stem + "_feature_error.svg"));
    write_text_file(written.back(), svg_chart("Feature error", "time (s)", "||s - s*||",
                                              {{"feature error", t, trace.numbers("feature_error"), kPalette[0]}}));

    written.push_back(out_dir / (stem + "_trajectory.svg"));
    write_text_file(written.back(),
                    svg_chart("Top-down trajectory", "east (m)", "north (m)",
                              {{"vehicle", trace.numbers("uav_y"), trace.numbers("uav_x"), kPalette[0]},
                               {"deck", trace.numbers("deck_y"), trace.numbers("deck_x"), kPalette[1]}}));
    return written;
}

void emit_run_outputs(const RunRecord& record, const std::filesystem::path& out_dir) {
    const std::string csv = format_trace_csv(record);
    write_text_file(out_dir / "trace.csv", csv);
    write_text_file(out_dir / "summary.csv", format_summary_csv({record.summary}));
    write_plots(parse_trace_csv(csv), out_dir, "trace");
}

}  // namespace servoland
