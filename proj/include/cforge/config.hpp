#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cforge/barriers.hpp"
#include "cforge/conformal_data.hpp"
#include "cforge/geometry.hpp"
#include "cforge/verification.hpp"

namespace cforge {

enum class RouteChoice { automatic, linear_nonvacuum, yamabe };

struct ChartSpec {
    int dim = 3;
    std::vector<double> extents;
    std::vector<int> nodes;
    std::vector<BoundaryKind> boundary;
    std::vector<double> origin;
};

struct SolverSettings {
    double linear_tol = 1e-12;
    double picard_tol = 1e-10;
    double outer_tol = 1e-8;
    double eigen_tol = 1e-8;
    int max_iter = 500;
    int max_outer = 100;
    bool newton = false;
    double mp_slack = 1e-8;
};

struct BarrierSettings {
    RouteChoice route = RouteChoice::automatic;
    double c_plus = 0.0;
    double c_minus = -1.0;  ///< < 0 selects min Λ₋/a
    YamabeChoice yamabe = YamabeChoice::R_tau;
    double yamabe_u0 = 0.0;
    CertifyMode certify = CertifyMode::posteriori;
    double c_cert = 1.0;
    double lp = 0.0;
};

struct MmsSettings {
    bool enabled = false;
    MmsTargets targets;
    std::vector<int> resolutions;
};

struct SweepSettings {
    double lo = 0.1;
    double hi = 10.0;
    int steps = 20;
    double c_target = 1.0;
};

struct RunConfig {
    ChartSpec chart;
    MetricSpec metric;
    int n = 3;
    DataSpec data;
    SolverSettings solver;
    BarrierSettings barriers;
    int exhaustion_levels = 1;
    double exhaustion_shrink = 0.0;
    MmsSettings mms;
    SweepSettings sweep;
    std::string output_dir = "out";
    std::uint64_t seed = 0;
    /// SHA-256 of the config text.
    std::string hash;
};

/// Parses YAML text; every failure raises ConfigError.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Hex SHA-256 digest.
std::string sha256_hex(const std::string& bytes);

}  // namespace cforge
