#include "cforge/expression.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <vector>

#include "cforge/errors.hpp"

namespace cforge {

enum class Op { number, variable, neg, add, sub, mul, div, pow, call };
enum class Fn { sin, cos, exp, log, sqrt, tanh, abs, min, max };

struct Expression::Node {
    Op op = Op::number;
    double value = 0.0;
    int var = 0;
    Fn fn = Fn::sin;
    std::vector<std::shared_ptr<const Node>> args;
    bool uses_coordinates = false;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;

NodePtr make(Op op, std::vector<NodePtr> args) {
    auto n = std::make_shared<Expression::Node>();
    n->op = op;
    for (const auto& a : args) n->uses_coordinates = n->uses_coordinates || a->uses_coordinates;
    n->args = std::move(args);
    return n;
}

NodePtr number(double v) {
    auto n = std::make_shared<Expression::Node>();
    n->value = v;
    return n;
}

class Parser {
public:
    explicit Parser(std::string_view s) : s_(s) {}

    NodePtr parse() {
        NodePtr e = expr();
        skip();
        if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const {
        throw ExpressionError("expression '" + std::string(s_) + "': " + msg + " at offset " +
                              std::to_string(pos_));
    }

    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) fail(std::string("expected '") + c + "'");
    }

    NodePtr expr() {
        NodePtr lhs = term();
        for (;;) {
            if (accept('+'))
                lhs = make(Op::add, {lhs, term()});
            else if (accept('-'))
                lhs = make(Op::sub, {lhs, term()});
            else
                return lhs;
        }
    }

    NodePtr term() {
        NodePtr lhs = unary();
        for (;;) {
            if (accept('*'))
                lhs = make(Op::mul, {lhs, unary()});
            else if (accept('/'))
                lhs = make(Op::div, {lhs, unary()});
            else
                return lhs;
        }
    }

    NodePtr unary() {
        if (accept('-')) return make(Op::neg, {unary()});
        if (accept('+')) return unary();
        return power();
    }

    NodePtr power() {
        NodePtr base = primary();
        if (accept('^')) return make(Op::pow, {base, unary()});
        return base;
    }

    NodePtr primary() {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end");
        const char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            NodePtr e = expr();
            expect(')');
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return literal();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
        fail(std::string("unexpected '") + c + "'");
    }

    NodePtr literal() {
        double v = 0.0;
        const char* first = s_.data() + pos_;
        const char* last = s_.data() + s_.size();
        auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc()) fail("malformed number");
        pos_ += static_cast<std::size_t>(ptr - first);
        return number(v);
    }

    NodePtr identifier() {
        const std::size_t start = pos_;
        while (pos_ < s_.size() &&
               (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
            ++pos_;
        const std::string name(s_.substr(start, pos_ - start));
        if (name == "x" || name == "y" || name == "z") {
            auto n = std::make_shared<Expression::Node>();
            n->op = Op::variable;
            n->var = name[0] - 'x';
            n->uses_coordinates = true;
            return n;
        }
        if (name == "pi") return number(std::numbers::pi);

        static const std::pair<const char*, Fn> table[] = {
            {"sin", Fn::sin},   {"cos", Fn::cos},   {"exp", Fn::exp},
            {"log", Fn::log},   {"sqrt", Fn::sqrt}, {"tanh", Fn::tanh},
            {"abs", Fn::abs},   {"min", Fn::min},   {"max", Fn::max},
        };
        for (const auto& [fname, fn] : table) {
            if (name != fname) continue;
            expect('(');
            std::vector<NodePtr> args{expr()};
            while (accept(',')) args.push_back(expr());
            expect(')');
            const std::size_t want = (fn == Fn::min || fn == Fn::max) ? 2 : 1;
            if (args.size() != want)
                fail(name + " takes " + std::to_string(want) + " argument(s)");
            auto n = std::const_pointer_cast<Expression::Node>(make(Op::call, std::move(args)));
            n->fn = fn;
            return n;
        }
        fail("unknown identifier '" + name + "'");
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

template <class T>
T lift(double c) {
    if constexpr (std::is_same_v<T, double>)
        return c;
    else
        return Jet::constant(c);
}

double constant_value(const Expression::Node& n);

template <class T>
T evaluate(const Expression::Node& n, const std::array<T, 3>& vars) {
    using std::abs, std::cos, std::exp, std::log, std::max, std::min, std::pow, std::sin,
        std::sqrt, std::tanh;
    switch (n.op) {
    case Op::number: return lift<T>(n.value);
    case Op::variable: return vars[static_cast<std::size_t>(n.var)];
    case Op::neg: return -evaluate(*n.args[0], vars);
    case Op::add: return evaluate(*n.args[0], vars) + evaluate(*n.args[1], vars);
    case Op::sub: return evaluate(*n.args[0], vars) - evaluate(*n.args[1], vars);
    case Op::mul: return evaluate(*n.args[0], vars) * evaluate(*n.args[1], vars);
    case Op::div: return evaluate(*n.args[0], vars) / evaluate(*n.args[1], vars);
    case Op::pow: {
        const T base = evaluate(*n.args[0], vars);
        if constexpr (std::is_same_v<T, double>) {
            return pow(base, evaluate(*n.args[1], vars));
        } else {
            if (!n.args[1]->uses_coordinates) return pow(base, constant_value(*n.args[1]));
            return exp(evaluate(*n.args[1], vars) * log(base));
        }
    }
    case Op::call: {
        const T a = evaluate(*n.args[0], vars);
        switch (n.fn) {
        case Fn::sin: return sin(a);
        case Fn::cos: return cos(a);
        case Fn::exp: return exp(a);
        case Fn::log: return log(a);
        case Fn::sqrt: return sqrt(a);
        case Fn::tanh: return tanh(a);
        case Fn::abs: return abs(a);
        case Fn::min: return min(a, evaluate(*n.args[1], vars));
        case Fn::max: return max(a, evaluate(*n.args[1], vars));
        }
    }
    }
    return lift<T>(0.0);
}

double constant_value(const Expression::Node& n) {
    return evaluate<double>(n, {0.0, 0.0, 0.0});
}

}  // namespace

Expression::Expression() : Expression(number(0.0), "0") {}

Expression::Expression(std::shared_ptr<const Node> root, std::string text)
    : root_(std::move(root)), text_(std::move(text)) {}

Expression Expression::parse(std::string_view text) {
    return Expression(Parser(text).parse(), std::string(text));
}

Expression Expression::constant(double c) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, c);
    (void)ec;
    return Expression(number(c), std::string(buf, ptr));
}

double Expression::operator()(double x, double y, double z) const {
    return evaluate<double>(*root_, {x, y, z});
}

double Expression::eval(const std::array<double, 3>& p) const { return evaluate<double>(*root_, p); }

Jet Expression::jet(const std::array<double, 3>& p) const {
    return evaluate<Jet>(*root_, {Jet::variable(p[0], 0), Jet::variable(p[1], 1),
                                  Jet::variable(p[2], 2)});
}

bool Expression::depends_on_coordinates() const { return root_->uses_coordinates; }

}  // namespace cforge
