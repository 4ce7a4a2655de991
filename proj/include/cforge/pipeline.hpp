#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cforge/barriers.hpp"
#include "cforge/config.hpp"
#include "cforge/coupled.hpp"
#include "cforge/io.hpp"
#include "cforge/verification.hpp"

namespace cforge {

inline constexpr const char* kToolVersion = "constraint-forge 0.1.0";

/// Chart, metric, curvature and data assembled from a config.
struct Problem {
    RunConfig cfg;
    GridChart chart;
    MetricField metric;
    CurvaturePack curv;
    ConformalConstants k;
    ConformalData data;
};

/// `nodes` overrides the per-axis node count (all axes) when positive.
Problem build_problem(const RunConfig& cfg, int nodes = 0);

LinearSolveOptions linear_options(const SolverSettings& s);
PicardOptions picard_options(const SolverSettings& s);
EigenOptions eigen_options(const RunConfig& cfg);
CoupledOptions coupled_options(const RunConfig& cfg);

/// φ₊ from the linear supersolution and φ₋ from the configured route; the
/// automatic route falls back to the Yamabe construction on VacuumError.
BarrierPair build_barriers(const Problem& P, const DiscreteOperator& lap);

/// Constant barriers of a forced problem: l from h(l) ≤ 0 with |K̃|² = 0 and
/// m from h(m) ≥ 0 with |K̃|² = 2 k2_max + 1 and ε₂ raised by 2 eps2_extra.
BarrierPair mms_barriers(const Problem& P, const ConformalData& forced, double k2_max, double eps2_extra);

struct SolveOutcome {
    BarrierPair barriers;
    SolveSession session;
    Certificate worst_case;
    Certificate posteriori;
    HypothesisReport hypotheses;
    std::optional<ResidualReport> residuals;
    double trace_defect = 0.0;
};

SolveOutcome run_solve(const Problem& P);

struct MmsRun {
    double err_phi = 0.0;
    double err_X = 0.0;
    double err_f = 0.0;
    SolveSession session;
    Certificate posteriori;
};

/// Manufactured solution from the config's mms section at `nodes` per axis.
MmsRun run_mms(const RunConfig& cfg, int nodes);

/// Each writes its artifacts and manifest into `out` and returns the summary.
Report solve_command(const RunConfig& cfg, const std::string& out);
Report certify_command(const RunConfig& cfg, const std::string& out);
Report eigen_command(const RunConfig& cfg);
Report verify_command(const RunConfig& cfg, const std::string& fields_dir);
Report mms_command(const RunConfig& cfg, const std::string& out);
Report sweep_command(const RunConfig& cfg, const std::string& out);

void write_manifest(const RunConfig& cfg, const std::string& out, const std::string& command,
                    const std::vector<std::string>& artifacts);

}  // namespace cforge
