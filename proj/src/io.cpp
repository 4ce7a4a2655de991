#include "cforge/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cforge/errors.hpp"

namespace cforge {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void ensure_directory(const std::string& path) {
    std::error_code ec;
    std::filesystem::create_directories(path, ec);
    if (ec) throw ConfigError("cannot create output directory '" + path + "': " + ec.message());
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out << text;
}

void write_field_csv(const std::string& path, const GridChart& chart, const std::string& name,
                     const std::vector<double>& values, int components) {
    std::ostringstream os;
    const int d = chart.dim();
    os << "dim," << d << "\nnodes";
    for (int a = 0; a < d; ++a) os << ',' << chart.nodes(a);
    os << "\nspacing";
    for (int a = 0; a < d; ++a) os << ',' << format_double(chart.spacing(a));
    os << "\nfield," << name << "\ncomponents," << components << '\n';
    const auto c = static_cast<std::size_t>(components);
    for (std::size_t p = 0; p < chart.node_count(); ++p) {
        for (std::size_t i = 0; i < c; ++i) os << (i ? "," : "") << format_double(values[p * c + i]);
        os << '\n';
    }
    write_text(path, os.str());
}

void write_scalar_csv(const std::string& path, const GridChart& chart, const std::string& name,
                      const std::vector<double>& f) {
    write_field_csv(path, chart, name, f, 1);
}

void write_vector_csv(const std::string& path, const GridChart& chart, const std::string& name,
                      const std::vector<Vec3>& v) {
    const int d = chart.dim();
    std::vector<double> flat;
    flat.reserve(v.size() * static_cast<std::size_t>(d));
    for (const Vec3& x : v)
        for (int i = 0; i < d; ++i) flat.push_back(x[static_cast<std::size_t>(i)]);
    write_field_csv(path, chart, name, flat, d);
}

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
}

double to_double(const std::string& s, const std::string& path) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("'" + path + "': bad number '" + s + "'");
    }
}

}  // namespace

FieldDump read_field_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read field dump '" + path + "'");
    FieldDump d;
    std::string line;
    auto header = [&](const char* key) {
        if (!std::getline(in, line)) throw ConfigError("'" + path + "': truncated header");
        std::vector<std::string> cells = split(line);
        if (cells.empty() || cells[0] != key) throw ConfigError("'" + path + "': expected header '" + key + "'");
        cells.erase(cells.begin());
        return cells;
    };
    d.dim = static_cast<int>(to_double(header("dim").at(0), path));
    for (const auto& s : header("nodes")) d.nodes.push_back(static_cast<int>(to_double(s, path)));
    for (const auto& s : header("spacing")) d.spacing.push_back(to_double(s, path));
    d.name = header("field").at(0);
    d.components = static_cast<int>(to_double(header("components").at(0), path));
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const std::vector<std::string> cells = split(line);
        if (static_cast<int>(cells.size()) != d.components)
            throw ConfigError("'" + path + "': row with the wrong number of components");
        for (const auto& s : cells) d.values.push_back(to_double(s, path));
    }
    return d;
}

namespace {

void check_dump(const FieldDump& d, const GridChart& chart) {
    bool ok = d.dim == chart.dim() && static_cast<int>(d.nodes.size()) == chart.dim();
    for (int a = 0; ok && a < chart.dim(); ++a) ok = d.nodes[static_cast<std::size_t>(a)] == chart.nodes(a);
    if (!ok || d.values.size() != chart.node_count() * static_cast<std::size_t>(d.components))
        throw ConfigError("field dump '" + d.name + "' does not match the chart");
}

}  // namespace

std::vector<double> dump_scalar(const FieldDump& d, const GridChart& chart) {
    check_dump(d, chart);
    if (d.components != 1) throw ConfigError("field dump '" + d.name + "' is not scalar");
    return d.values;
}

std::vector<Vec3> dump_vector(const FieldDump& d, const GridChart& chart) {
    check_dump(d, chart);
    if (d.components != chart.dim()) throw ConfigError("field dump '" + d.name + "' is not a vector field");
    std::vector<Vec3> v(chart.node_count(), Vec3{});
    const auto c = static_cast<std::size_t>(d.components);
    for (std::size_t p = 0; p < v.size(); ++p)
        for (std::size_t i = 0; i < c; ++i) v[p][i] = d.values[p * c + i];
    return v;
}

void Report::add(const std::string& key, const std::string& value) { entries_.emplace_back(key, value); }
void Report::add(const std::string& key, double value) { add(key, format_double(value)); }
void Report::add(const std::string& key, long long value) { add(key, std::to_string(value)); }
void Report::add(const std::string& key, bool value) { add(key, std::string(value ? "true" : "false")); }

std::string Report::str() const {
    std::string s;
    for (const auto& [k, v] : entries_) s += k + " = " + v + "\n";
    return s;
}

void Report::write(const std::string& path) const { write_text(path, str()); }

}  // namespace cforge
