#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cforge/conformal_data.hpp"
#include "cforge/continuum.hpp"

namespace cforge {

/// Physical initial data g = φ^{4/(n−2)}γ, K = φ^{−2}(£X + U) + (τ/n)g and,
/// with an EM pack, E = φ^{−2n/(n−2)}γ⁻¹(∇f + V) and F = F̃.
struct InitialDataSet {
    MetricField g;
    std::vector<Mat3> K;
    std::vector<Vec3> E;  ///< vector (upper index); empty without EM
    std::vector<Mat3> F;
    /// max |tr_g K − τ|.
    double trace_defect = 0.0;
};

InitialDataSet reconstruct(const MetricField& gamma, const std::vector<double>& phi, const std::vector<Vec3>& X,
                           const std::vector<double>& f, const ConformalData& data, const ConformalConstants& k);

struct FieldNorms {
    double l2 = 0.0;
    double linf = 0.0;
};

struct ResidualReport {
    /// R_g + τ² − |K|²_g − 2ε − 2Λ at every node (0 outside the measured set).
    std::vector<double> hamiltonian;
    /// div_g K − dτ − J.
    std::vector<Vec3> momentum;
    /// div_g E − q̃ (empty without EM).
    std::vector<double> em;
    FieldNorms hamiltonian_norm, momentum_norm, em_norm;
    /// Nodes entering the norms.
    std::size_t measured = 0;
};

struct ResidualOptions {
    /// Nodes within this many steps of a Dirichlet face are skipped (1 = only the faces).
    int boundary_layer = 1;
    double cosmological = 0.0;
};

/// ε as seen by the physical metric: ε₁ + ε₂φ^{−4(n−1)/(n−2)} + ε₃φ^{−8/(n−2)}.
std::vector<double> physical_energy(const std::vector<double>& phi, const ConformalData& data,
                                    const ConformalConstants& k);

/// J = ω₁φ^{2/(n−2)} − ω₂φ^{−2n/(n−2)}.
std::vector<Vec3> physical_momentum(const std::vector<double>& phi, const ConformalData& data,
                                    const ConformalConstants& k);

/// Residuals with Christoffels rebuilt from g. `phi` supplies the source
/// scaling; manufactured forcings stored in `data` are accounted for. With an
/// EM pack, `data` must already carry the Ẽ-dependent ε₂ and ω₂.
ResidualReport constraint_residuals(const InitialDataSet& ids, const std::vector<double>& phi,
                                    const ConformalData& data, const ConformalConstants& k,
                                    const ResidualOptions& opt = {});

struct MmsTargets {
    Expression phi = Expression::constant(1.0);
    std::array<Expression, 3> X{};
    std::optional<Expression> f;
};

struct MmsFields {
    std::vector<double> phi;
    std::vector<Vec3> X;
    std::vector<double> f;
    std::vector<double> force_phi;
    std::vector<Vec3> force_X;
    std::vector<double> force_f;
};

/// Forcings that make the targets exact solutions of the continuum system,
/// evaluated at the nodes with exact derivatives. The data's dτ is used as is.
MmsFields mms_forcing(const ContinuumMetric& metric, const GridChart& chart, const MmsTargets& targets,
                      const ConformalData& data, const ConformalConstants& k);

/// Copies the forcings into the data and sets the Dirichlet values to the targets.
void apply_mms(ConformalData& data, const MmsFields& mms);

struct ConvergenceTable {
    std::vector<int> resolutions;
    std::vector<std::string> fields;
    /// errors[r][f].
    std::vector<std::vector<double>> errors;
    /// orders[r][f] between resolutions r and r+1.
    std::vector<std::vector<double>> orders;
};

/// Runs `run(nodes)` per resolution (nodes per axis) and fits observed orders
/// log(e₁/e₂)/log(h₁/h₂) with h ∝ 1/(nodes − 1), or 1/nodes on periodic charts.
ConvergenceTable convergence_study(const std::function<std::vector<double>(int)>& run,
                                   const std::vector<int>& resolutions, std::vector<std::string> fields,
                                   bool periodic = false);

}  // namespace cforge
