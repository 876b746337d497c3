/*
 Copyright 2026 The ihreg Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#pragma once

#include "ihreg/regularizer.hpp"
#include "ihreg/trajectory.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace ihreg {

/// Filesystem or file-format failure.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr std::string_view kSweepCsvHeader =
    "T,fh_cost,transfer_cost,expected_regulation_cost,actual_regulation_cost,total_composite_cost,terminal_error,"
    "hit_omega,solver_iterations";

/// 17 significant digits; enough for any double to round-trip exactly.
inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
    // strtod accepts nan/inf spellings produced by to_chars.
    const std::string tmp(s);
    char* end = nullptr;
    const double v = std::strtod(tmp.c_str(), &end);
    if (tmp.empty() || end != tmp.c_str() + tmp.size()) throw IoError("malformed number '" + tmp + "'");
    return v;
}

inline long parse_long(std::string_view s) {
    long v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw IoError("malformed integer '" + std::string(s) + "'");
    }
    return v;
}

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

/// Writes `contents` to path via a sibling temporary and rename.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        out << contents;
        out.flush();
        if (!out) throw IoError("failed writing " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::vector<std::string> lines;
    std::istringstream in(read_file(path));
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

// ---------------------------------------------------------------------------
// sweep.csv

inline std::string sweep_csv(const std::vector<SweepRecord>& records) {
    std::string out(kSweepCsvHeader);
    out += '\n';
    for (const auto& r : records) {
        out += std::to_string(r.T);
        for (double v : {r.fh_cost, r.transfer_cost, r.expected_regulation_cost, r.actual_regulation_cost,
                         r.total_composite_cost, r.terminal_error}) {
            out += ',';
            out += format_double(v);
        }
        out += r.hit_omega ? ",1," : ",0,";
        out += std::to_string(r.solver_iterations);
        out += '\n';
    }
    return out;
}

inline void emit_csv(const std::vector<SweepRecord>& records, const std::filesystem::path& path) {
    write_file_atomic(path, sweep_csv(records));
}

/// Reads the CSV columns back; solver-status fields not in the file are left default.
inline std::vector<SweepRecord> read_sweep_csv(const std::filesystem::path& path) {
    const auto lines = read_lines(path);
    if (lines.empty() || lines.front() != kSweepCsvHeader) throw IoError(path.string() + ": bad sweep header");
    std::vector<SweepRecord> out;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const auto f = split_csv_line(lines[i]);
        if (f.size() != 9) throw IoError(path.string() + ": expected 9 fields on line " + std::to_string(i + 1));
        SweepRecord r;
        r.T = static_cast<int>(parse_long(f[0]));
        r.fh_cost = parse_double(f[1]);
        r.transfer_cost = parse_double(f[2]);
        r.expected_regulation_cost = parse_double(f[3]);
        r.actual_regulation_cost = parse_double(f[4]);
        r.total_composite_cost = parse_double(f[5]);
        r.terminal_error = parse_double(f[6]);
        r.hit_omega = parse_long(f[7]) != 0;
        r.solver_iterations = static_cast<int>(parse_long(f[8]));
        out.push_back(r);
    }
    return out;
}

// ---------------------------------------------------------------------------
// trajectory.csv: one row per time index; the final row has no control.

struct PhasedTrajectory {
    std::vector<Vector> states;
    std::vector<Vector> controls;
    int transfer_steps = 0;  ///< rows t < transfer_steps are phase "transfer"

    bool operator==(const PhasedTrajectory& o) const {
        if (transfer_steps != o.transfer_steps || states.size() != o.states.size() ||
            controls.size() != o.controls.size()) {
            return false;
        }
        for (std::size_t i = 0; i < states.size(); ++i) {
            if (states[i] != o.states[i]) return false;
        }
        for (std::size_t i = 0; i < controls.size(); ++i) {
            if (controls[i] != o.controls[i]) return false;
        }
        return true;
    }
};

inline std::string trajectory_csv_header(Eigen::Index n, Eigen::Index p) {
    std::string h = "t,phase";
    for (Eigen::Index i = 0; i < n; ++i) h += ",x" + std::to_string(i);
    for (Eigen::Index i = 0; i < p; ++i) h += ",u" + std::to_string(i);
    return h;
}

inline std::string trajectory_csv(const PhasedTrajectory& tr, Eigen::Index n, Eigen::Index p) {
    std::string out = trajectory_csv_header(n, p) + '\n';
    for (std::size_t t = 0; t < tr.states.size(); ++t) {
        out += std::to_string(t);
        out += static_cast<int>(t) < tr.transfer_steps ? ",transfer" : ",regulate";
        for (Eigen::Index i = 0; i < n; ++i) out += ',' + format_double(tr.states[t][i]);
        for (Eigen::Index i = 0; i < p; ++i) {
            out += ',';
            if (t < tr.controls.size()) out += format_double(tr.controls[t][i]);
        }
        out += '\n';
    }
    return out;
}

inline void emit_trajectory_csv(const PhasedTrajectory& tr, Eigen::Index n, Eigen::Index p,
                                const std::filesystem::path& path) {
    write_file_atomic(path, trajectory_csv(tr, n, p));
}

inline PhasedTrajectory read_trajectory_csv(const std::filesystem::path& path, Eigen::Index n, Eigen::Index p) {
    const auto lines = read_lines(path);
    if (lines.empty() || lines.front() != trajectory_csv_header(n, p)) {
        throw IoError(path.string() + ": bad trajectory header");
    }
    PhasedTrajectory tr;
    bool in_transfer = true;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const auto f = split_csv_line(lines[i]);
        if (f.size() != static_cast<std::size_t>(2 + n + p)) {
            throw IoError(path.string() + ": wrong field count on line " + std::to_string(i + 1));
        }
        if (parse_long(f[0]) != static_cast<long>(tr.states.size())) throw IoError(path.string() + ": bad t index");
        if (f[1] == "transfer") {
            if (!in_transfer) throw IoError(path.string() + ": transfer row after regulation began");
            ++tr.transfer_steps;
        } else if (f[1] == "regulate") {
            in_transfer = false;
        } else {
            throw IoError(path.string() + ": unknown phase '" + std::string(f[1]) + "'");
        }
        Vector x(n);
        for (Eigen::Index k = 0; k < n; ++k) x[k] = parse_double(f[2 + k]);
        tr.states.push_back(x);
        if (!f[2 + n].empty()) {
            Vector u(p);
            for (Eigen::Index k = 0; k < p; ++k) u[k] = parse_double(f[2 + n + k]);
            if (tr.controls.size() + 1 != tr.states.size()) throw IoError(path.string() + ": control gap");
            tr.controls.push_back(u);
        }
    }
    return tr;
}

}  // namespace ihreg
