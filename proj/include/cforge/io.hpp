#pragma once

#include <string>
#include <utility>
#include <vector>

#include "cforge/geometry.hpp"

namespace cforge {

/// Field dump: a fixed header (dim, nodes, spacing, field, components)
/// followed by one row per node in index order, values in %.17g.
void write_field_csv(const std::string& path, const GridChart& chart, const std::string& name,
                     const std::vector<double>& values, int components = 1);
void write_scalar_csv(const std::string& path, const GridChart& chart, const std::string& name,
                      const std::vector<double>& f);
void write_vector_csv(const std::string& path, const GridChart& chart, const std::string& name,
                      const std::vector<Vec3>& v);

struct FieldDump {
    int dim = 0;
    std::vector<int> nodes;
    std::vector<double> spacing;
    std::string name;
    int components = 1;
    std::vector<double> values;
};

FieldDump read_field_csv(const std::string& path);
std::vector<double> dump_scalar(const FieldDump& d, const GridChart& chart);
std::vector<Vec3> dump_vector(const FieldDump& d, const GridChart& chart);

/// Ordered "key = value" report.
class Report {
public:
    void add(const std::string& key, const std::string& value);
    void add(const std::string& key, double value);
    void add(const std::string& key, long long value);
    void add(const std::string& key, int value) { add(key, static_cast<long long>(value)); }
    void add(const std::string& key, std::size_t value) { add(key, static_cast<long long>(value)); }
    void add(const std::string& key, bool value);
    std::string str() const;
    void write(const std::string& path) const;
    const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

/// %.17g, with inf/nan spelled out.
std::string format_double(double v);

void write_text(const std::string& path, const std::string& text);
void ensure_directory(const std::string& path);

}  // namespace cforge
