#pragma once

#include "dynn/network.hpp"
#include "dynn/preprocess.hpp"

#include <json.hpp>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace dynn::io {

using json = nlohmann::json;

json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const json& j, const std::string& what);

// {"A":[[...]],"B":...,"C":...,"D":...}; D may be omitted (zero feedthrough)
json model_to_json(const StateSpace& ss);
StateSpace model_from_json(const json& j);

json params_to_json(const DynnParams& p);
DynnParams params_from_json(const json& j);

json read_json_file(const std::string& path);
// 17 significant digits for every double
void write_json_file(const std::string& path, const json& j);
std::string dump_json(const json& j);

StateSpace read_model(const std::string& path);
void write_model(const std::string& path, const StateSpace& ss);
DynnParams read_params(const std::string& path);
void write_params(const std::string& path, const DynnParams& p);

struct Table {
    std::vector<std::string> header;
    std::vector<double> times;
    Matrix values; // one row per time, excluding t
};

// header t,<prefix>_1..<prefix>_n
std::string format_trace_csv(const std::vector<double>& times, const Matrix& values, const std::string& prefix = "y");
void write_text_file(const std::string& path, const std::string& text);
void write_trace_csv(const std::string& path, const std::vector<double>& times, const Matrix& values,
                     const std::string& prefix = "y");
// First column is time; the rest are samples. A header row is detected and skipped.
Table read_trace_csv(const std::string& path);
Table parse_trace_csv(const std::string& text);

std::string format_double(double x);

struct Series {
    std::string label;
    std::vector<double> y;
};

// Raw SVG polylines over a shared x axis; log_y plots log10(max(y, floor)).
std::string svg_polylines(const std::vector<double>& x, const std::vector<Series>& series, const std::string& title,
                          bool log_y = false);

struct RunManifest {
    std::string command;
    json config = json::object();
    std::map<std::string, std::string> files;
    double seconds = 0.0;
    std::optional<double> cond_t;
    std::vector<Index> layer_sizes;
    std::vector<std::vector<std::size_t>> nfe;
    json errors = json::object();
    std::vector<std::string> warnings;
};

json manifest_to_json(const RunManifest& m);
RunManifest manifest_from_json(const json& j);

} // namespace dynn::io
