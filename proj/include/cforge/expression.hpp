#pragma once

#include <array>
#include <memory>
#include <string>
#include <string_view>

#include "cforge/jet.hpp"

namespace cforge {

/// A parsed field expression over the coordinate symbols x, y, z.
///
/// Supports + - * / ^ with the usual precedence, unary minus, the constant
/// pi, and the functions sin, cos, exp, log, sqrt, tanh, abs, min, max.
/// Evaluation with Jet gives exact first and second derivatives, which the
/// manufactured-solution machinery uses in place of symbolic algebra.
class Expression {
public:
    struct Node;

    Expression();  ///< The constant 0.
    static Expression parse(std::string_view text);
    static Expression constant(double c);

    double operator()(double x, double y = 0.0, double z = 0.0) const;
    double eval(const std::array<double, 3>& p) const;
    Jet jet(const std::array<double, 3>& p) const;

    const std::string& text() const { return text_; }
    bool depends_on_coordinates() const;

private:
    Expression(std::shared_ptr<const Node> root, std::string text);

    std::shared_ptr<const Node> root_;
    std::string text_;
};

}  // namespace cforge
