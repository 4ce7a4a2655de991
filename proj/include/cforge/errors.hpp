#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace cforge {

/// Process exit codes; stable across versions.
enum class ExitCode : int {
    ok = 0,
    failure = 1,
    hypothesis = 2,
    nonconvergence = 3,
    config = 4,
};

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what, ExitCode code = ExitCode::failure)
        : std::runtime_error(what), code_(code) {}
    ExitCode code() const noexcept { return code_; }

private:
    ExitCode code_;
};

/// Invalid user input: config files, expressions, grid sizes, data fields.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(what, ExitCode::config) {}
};

class ExpressionError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

/// Non-SPD metric at a node.
class MetricError : public ConfigError {
public:
    MetricError(const std::string& what, std::size_t node) : ConfigError(what), node_(node) {}
    std::size_t node() const noexcept { return node_; }

private:
    std::size_t node_;
};

class DataError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

/// A function was called outside its documented domain (e.g. non-positive φ).
class DomainError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

class PreconditionError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

/// An analytic hypothesis of the existence theory fails on the supplied data.
class HypothesisError : public Error {
public:
    explicit HypothesisError(const std::string& what, long node = -1)
        : Error(what, ExitCode::hypothesis), node_(node) {}
    long node() const noexcept { return node_; }

private:
    long node_;
};

/// ε-positivity fails; the caller should try the Yamabe route.
class VacuumError : public HypothesisError {
public:
    using HypothesisError::HypothesisError;
};

/// Constant auxiliary barriers for the Yamabe route do not exist.
class RouteError : public HypothesisError {
public:
    using HypothesisError::HypothesisError;
};

/// λ₁ of the conformal Killing Laplacian is not bounded away from zero.
class SpectralError : public HypothesisError {
public:
    using HypothesisError::HypothesisError;
};

class NonConvergenceError : public Error {
public:
    explicit NonConvergenceError(const std::string& what)
        : Error(what, ExitCode::nonconvergence) {}
};

/// Linear solver ran out of iterations; carries its best iterate.
class SolverError : public NonConvergenceError {
public:
    SolverError(const std::string& what, std::vector<double> best, double residual)
        : NonConvergenceError(what), best_(std::move(best)), residual_(residual) {}
    const std::vector<double>& best_iterate() const noexcept { return best_; }
    double residual() const noexcept { return residual_; }

private:
    std::vector<double> best_;
    double residual_;
};

class SingularOperatorError : public NonConvergenceError {
public:
    using NonConvergenceError::NonConvergenceError;
};

class EigenError : public NonConvergenceError {
public:
    using NonConvergenceError::NonConvergenceError;
};

/// An iterate left [φ₋ − ε, φ₊ + ε].
class BracketingError : public NonConvergenceError {
public:
    BracketingError(const std::string& what, std::size_t node, int iterate)
        : NonConvergenceError(what), node_(node), iterate_(iterate) {}
    std::size_t node() const noexcept { return node_; }
    int iterate() const noexcept { return iterate_; }

private:
    std::size_t node_;
    int iterate_;
};

}  // namespace cforge
