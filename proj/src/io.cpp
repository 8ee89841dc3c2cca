#include "dynn/io.hpp"
#include "dynn/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

namespace dynn::io {

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

double number_from_json(const json& v, const std::string& what) {
    if (v.is_number()) return v.get<double>();
    // non-finite values travel as strings
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "inf" || s == "Infinity") return std::numeric_limits<double>::infinity();
        if (s == "-inf" || s == "-Infinity") return -std::numeric_limits<double>::infinity();
        if (s == "nan" || s == "NaN") return std::numeric_limits<double>::quiet_NaN();
    }
    throw ParseError(what + ": expected a number");
}

json number_to_json(double x) {
    if (std::isfinite(x)) return x;
    if (std::isnan(x)) return "nan";
    return x > 0 ? "inf" : "-inf";
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

bool parse_double(const std::string& s, double& x) {
    if (s.empty()) return false;
    char* end = nullptr;
    x = std::strtod(s.c_str(), &end);
    while (end && (*end == ' ' || *end == '\t')) ++end;
    return end && *end == '\0';
}

} // namespace

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        json r = json::array();
        for (Index j = 0; j < m.cols(); ++j) r.push_back(number_to_json(m(i, j)));
        rows.push_back(std::move(r));
    }
    return rows;
}

Matrix matrix_from_json(const json& j, const std::string& what) {
    if (!j.is_array()) throw ParseError(what + ": expected an array of rows");
    const auto rows = static_cast<Index>(j.size());
    if (rows == 0) return Matrix(0, 0);
    if (!j[0].is_array()) throw ParseError(what + ": expected an array of rows");
    const auto cols = static_cast<Index>(j[0].size());
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i) {
        const json& r = j[static_cast<std::size_t>(i)];
        if (!r.is_array() || static_cast<Index>(r.size()) != cols)
            throw ParseError(what + ": ragged rows (row " + std::to_string(i) + ")");
        for (Index c = 0; c < cols; ++c) m(i, c) = number_from_json(r[static_cast<std::size_t>(c)], what);
    }
    return m;
}

json model_to_json(const StateSpace& ss) {
    return {{"A", matrix_to_json(ss.a)}, {"B", matrix_to_json(ss.b)}, {"C", matrix_to_json(ss.c)}, {"D", matrix_to_json(ss.d)}};
}

StateSpace model_from_json(const json& j) {
    if (!j.is_object()) throw ParseError("model: expected a JSON object");
    for (const char* key : {"A", "B", "C"})
        if (!j.contains(key)) throw ParseError(std::string("model: missing \"") + key + "\"");
    StateSpace ss;
    ss.a = matrix_from_json(j["A"], "model.A");
    ss.b = matrix_from_json(j["B"], "model.B");
    ss.c = matrix_from_json(j["C"], "model.C");
    ss.d = j.contains("D") ? matrix_from_json(j["D"], "model.D") : Matrix::Zero(ss.c.rows(), ss.b.cols());
    if (ss.d.size() == 0) ss.d = Matrix::Zero(ss.c.rows(), ss.b.cols());
    try {
        ss.validate();
    } catch (const PreconditionError& e) {
        throw ParseError(std::string("model: ") + e.what());
    }
    return ss;
}

json params_to_json(const DynnParams& p) {
    json layers = json::array();
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        const auto& layer = p.layers[l];
        json neurons = json::array();
        for (std::size_t i = 0; i < layer.size(); ++i) {
            const auto& n = layer.neurons[i];
            std::vector<json> w;
            for (Index k = 0; k < n.w.size(); ++k) w.push_back(number_to_json(n.w(k)));
            neurons.push_back({{"order", n.order == NeuronOrder::first ? 1 : 2},
                               {"m", n.m},
                               {"c", n.c},
                               {"k", n.k},
                               {"w", w},
                               {"phi", matrix_to_json(p.phi.at(l).at(i))}});
        }
        layers.push_back({{"k_r", layer.k_r}, {"k_c", layer.k_c}, {"input_dim", layer.input_dim}, {"neurons", neurons}});
    }
    return {{"format", "dynn-params/1"},
            {"input_dim", p.input_dim},
            {"output_dim", p.output_dim},
            {"psi", matrix_to_json(p.psi)},
            {"layers", layers}};
}

DynnParams params_from_json(const json& j) {
    try {
        if (!j.is_object() || j.value("format", "") != "dynn-params/1")
            throw ParseError("params: missing or unknown \"format\" (expected dynn-params/1)");
        DynnParams p;
        p.input_dim = j.at("input_dim").get<Index>();
        p.output_dim = j.at("output_dim").get<Index>();
        p.psi = matrix_from_json(j.at("psi"), "params.psi");
        if (p.psi.size() == 0) p.psi = Matrix::Zero(p.output_dim, p.input_dim);
        for (const json& jl : j.at("layers")) {
            HorizontalLayer layer;
            layer.k_r = jl.at("k_r").get<Index>();
            layer.k_c = jl.at("k_c").get<Index>();
            layer.input_dim = jl.at("input_dim").get<Index>();
            std::vector<Matrix> phi;
            for (const json& jn : jl.at("neurons")) {
                NeuronSpec n;
                const int order = jn.at("order").get<int>();
                if (order != 1 && order != 2) throw ParseError("params: neuron order must be 1 or 2");
                n.order = order == 1 ? NeuronOrder::first : NeuronOrder::second;
                n.m = number_from_json(jn.at("m"), "params.m");
                n.c = number_from_json(jn.at("c"), "params.c");
                n.k = number_from_json(jn.at("k"), "params.k");
                const json& w = jn.at("w");
                n.w.resize(static_cast<Index>(w.size()));
                for (std::size_t k = 0; k < w.size(); ++k) n.w(static_cast<Index>(k)) = number_from_json(w[k], "params.w");
                Matrix ph = matrix_from_json(jn.at("phi"), "params.phi");
                if (ph.size() == 0) ph = Matrix::Zero(p.output_dim, output_width(n.order));
                phi.push_back(std::move(ph));
                layer.neurons.push_back(std::move(n));
            }
            p.layers.push_back(std::move(layer));
            p.phi.push_back(std::move(phi));
        }
        p.validate();
        return p;
    } catch (const json::exception& e) {
        throw ParseError(std::string("params: ") + e.what());
    } catch (const PreconditionError& e) {
        throw ParseError(std::string("params: ") + e.what());
    }
}

std::string dump_json(const json& j) {
    // nlohmann prints the shortest round-trip form; force 17 digits instead
    std::function<void(const json&, std::string&, int)> emit = [&](const json& v, std::string& out, int indent) {
        const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
        const std::string pad_in(static_cast<std::size_t>(indent + 1) * 2, ' ');
        if (v.is_number_float()) {
            out += format_double(v.get<double>());
        } else if (v.is_object()) {
            if (v.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            bool first = true;
            for (auto it = v.begin(); it != v.end(); ++it) {
                if (!first) out += ",\n";
                first = false;
                out += pad_in + json(it.key()).dump() + ": ";
                emit(it.value(), out, indent + 1);
            }
            out += "\n" + pad + "}";
        } else if (v.is_array()) {
            const bool flat = std::none_of(v.begin(), v.end(), [](const json& e) { return e.is_structured(); });
            if (v.empty()) {
                out += "[]";
            } else if (flat) {
                out += "[";
                for (std::size_t k = 0; k < v.size(); ++k) {
                    if (k) out += ", ";
                    emit(v[k], out, indent + 1);
                }
                out += "]";
            } else {
                out += "[\n";
                for (std::size_t k = 0; k < v.size(); ++k) {
                    if (k) out += ",\n";
                    out += pad_in;
                    emit(v[k], out, indent + 1);
                }
                out += "\n" + pad + "]";
            }
        } else {
            out += v.dump();
        }
    };
    std::string out;
    emit(j, out, 0);
    out += "\n";
    return out;
}

json read_json_file(const std::string& path) {
    const std::string text = slurp(path);
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(path + ": " + e.what());
    }
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write " + path);
    out << text;
    if (!out) throw ParseError("write failed: " + path);
}

void write_json_file(const std::string& path, const json& j) { write_text_file(path, dump_json(j)); }

StateSpace read_model(const std::string& path) {
    try {
        return model_from_json(read_json_file(path));
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
}

void write_model(const std::string& path, const StateSpace& ss) { write_json_file(path, model_to_json(ss)); }
DynnParams read_params(const std::string& path) { return params_from_json(read_json_file(path)); }
void write_params(const std::string& path, const DynnParams& p) { write_json_file(path, params_to_json(p)); }

std::string format_trace_csv(const std::vector<double>& times, const Matrix& values, const std::string& prefix) {
    if (static_cast<Index>(times.size()) != values.rows()) throw PreconditionError("trace: one row per time expected");
    std::string out = "t";
    for (Index j = 0; j < values.cols(); ++j) out += "," + prefix + "_" + std::to_string(j + 1);
    out += "\r\n";
    for (std::size_t k = 0; k < times.size(); ++k) {
        out += format_double(times[k]);
        for (Index j = 0; j < values.cols(); ++j) out += "," + format_double(values(static_cast<Index>(k), j));
        out += "\r\n";
    }
    return out;
}

void write_trace_csv(const std::string& path, const std::vector<double>& times, const Matrix& values,
                     const std::string& prefix) {
    write_text_file(path, format_trace_csv(times, values, prefix));
}

Table parse_trace_csv(const std::string& text) {
    Table t;
    std::vector<std::vector<double>> rows;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0, width = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        std::vector<double> vals(cells.size());
        bool numeric = true;
        for (std::size_t k = 0; k < cells.size(); ++k) numeric = numeric && parse_double(cells[k], vals[k]);
        if (!numeric) {
            if (rows.empty() && t.header.empty()) {
                t.header = cells;
                continue;
            }
            throw ParseError("csv line " + std::to_string(line_no) + ": non-numeric cell");
        }
        if (width == 0) width = vals.size();
        if (vals.size() != width) throw ParseError("csv line " + std::to_string(line_no) + ": wrong number of cells");
        rows.push_back(std::move(vals));
    }
    if (rows.empty()) throw ParseError("csv: no data rows");
    if (!t.header.empty() && t.header.size() != width) throw ParseError("csv: header width differs from data");
    t.values.resize(static_cast<Index>(rows.size()), static_cast<Index>(width) - 1);
    for (std::size_t k = 0; k < rows.size(); ++k) {
        t.times.push_back(rows[k][0]);
        for (std::size_t j = 1; j < width; ++j) t.values(static_cast<Index>(k), static_cast<Index>(j) - 1) = rows[k][j];
    }
    for (std::size_t k = 1; k < t.times.size(); ++k)
        if (!(t.times[k] > t.times[k - 1])) throw ParseError("csv: times must be strictly increasing");
    return t;
}

Table read_trace_csv(const std::string& path) { return parse_trace_csv(slurp(path)); }

std::string svg_polylines(const std::vector<double>& x, const std::vector<Series>& series, const std::string& title,
                          bool log_y) {
    const double w = 640, h = 400, m = 50;
    auto ty = [&](double v) { return log_y ? std::log10(std::max(v, 1e-300)) : v; };
    double x0 = x.empty() ? 0.0 : x.front(), x1 = x.empty() ? 1.0 : x.back();
    double y0 = std::numeric_limits<double>::infinity(), y1 = -y0;
    for (const auto& s : series)
        for (double v : s.y)
            if (std::isfinite(ty(v))) {
                y0 = std::min(y0, ty(v));
                y1 = std::max(y1, ty(v));
            }
    if (!std::isfinite(y0)) y0 = 0.0, y1 = 1.0;
    if (y1 - y0 < 1e-300) y1 = y0 + 1.0;
    if (x1 - x0 < 1e-300) x1 = x0 + 1.0;
    static const char* colours[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
    out << "<text x=\"" << m << "\" y=\"20\" font-size=\"14\">" << title << "</text>\n";
    out << "<text x=\"5\" y=\"" << m << "\" font-size=\"10\">" << format_double(log_y ? std::pow(10.0, y1) : y1) << "</text>\n";
    out << "<text x=\"5\" y=\"" << h - m << "\" font-size=\"10\">" << format_double(log_y ? std::pow(10.0, y0) : y0) << "</text>\n";
    out << "<rect x=\"" << m << "\" y=\"" << m << "\" width=\"" << w - 2 * m << "\" height=\"" << h - 2 * m
        << "\" fill=\"none\" stroke=\"#888\"/>\n";
    for (std::size_t s = 0; s < series.size(); ++s) {
        out << "<polyline fill=\"none\" stroke=\"" << colours[s % 6] << "\" points=\"";
        for (std::size_t k = 0; k < x.size() && k < series[s].y.size(); ++k) {
            const double v = ty(series[s].y[k]);
            if (!std::isfinite(v)) continue;
            const double px = m + (x[k] - x0) / (x1 - x0) * (w - 2 * m);
            const double py = h - m - (v - y0) / (y1 - y0) * (h - 2 * m);
            out << px << "," << py << " ";
        }
        out << "\"/>\n";
        out << "<text x=\"" << w - m + 4 << "\" y=\"" << m + 14 * (s + 1) << "\" font-size=\"10\" fill=\"" << colours[s % 6]
            << "\">" << series[s].label << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

json manifest_to_json(const RunManifest& m) {
    json j;
    j["command"] = m.command;
    j["config"] = m.config;
    j["files"] = m.files;
    j["seconds"] = m.seconds;
    j["cond_t"] = m.cond_t ? number_to_json(*m.cond_t) : json(nullptr);
    j["layer_sizes"] = m.layer_sizes;
    j["nfe"] = m.nfe;
    j["errors"] = m.errors;
    j["warnings"] = m.warnings;
    return j;
}

RunManifest manifest_from_json(const json& j) {
    try {
        RunManifest m;
        m.command = j.at("command").get<std::string>();
        m.config = j.value("config", json::object());
        m.files = j.value("files", std::map<std::string, std::string>{});
        m.seconds = j.value("seconds", 0.0);
        if (j.contains("cond_t") && !j["cond_t"].is_null()) m.cond_t = number_from_json(j["cond_t"], "manifest.cond_t");
        m.layer_sizes = j.value("layer_sizes", std::vector<Index>{});
        m.nfe = j.value("nfe", std::vector<std::vector<std::size_t>>{});
        m.errors = j.value("errors", json::object());
        m.warnings = j.value("warnings", std::vector<std::string>{});
        return m;
    } catch (const json::exception& e) {
        throw ParseError(std::string("manifest: ") + e.what());
    }
}

} // namespace dynn::io
