#pragma once

#include <cstdint>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "steam/errors.hpp"
#include "steam/value.hpp"

namespace steam::expr {

/// Result of expression evaluation. Booleans exist only inside the evaluator;
/// they coerce to Number 1/0 at the enrichment boundary.
class EvalValue {
public:
    enum class Kind : std::uint8_t { Missing, Number, Boolean, Text };

    static EvalValue missing() { return EvalValue{}; }
    static EvalValue number(double v) {
        EvalValue out;
        out.kind_ = Kind::Number;
        out.num_ = v;
        return out;
    }
    static EvalValue boolean(bool b) {
        EvalValue out;
        out.kind_ = Kind::Boolean;
        out.num_ = b ? 1.0 : 0.0;
        return out;
    }
    static EvalValue text() {
        EvalValue out;
        out.kind_ = Kind::Text;
        return out;
    }

    static EvalValue from(const Value& v) {
        switch (v.kind()) {
            case Value::Kind::Number: return number(v.num());
            case Value::Kind::Missing: return missing();
            default: return text();
        }
    }

    Kind kind() const { return kind_; }
    bool is_missing() const { return kind_ == Kind::Missing; }
    bool is_number() const { return kind_ == Kind::Number; }
    bool is_boolean() const { return kind_ == Kind::Boolean; }

    double num() const { return num_; }
    bool truth() const { return num_ != 0.0; }

    /// Enrichment boundary: Boolean -> Number 1/0, Text never leaves the
    /// evaluator as a result, so it maps to Missing.
    Value to_value() const {
        switch (kind_) {
            case Kind::Number: return Value::number(num_);
            case Kind::Boolean: return Value::number(num_);
            default: return Value::missing();
        }
    }

private:
    Kind kind_{Kind::Missing};
    double num_{0.0};
};

/// Name resolution for evaluation. Returns nullptr for unknown names
/// (build-time validation makes that unreachable in the pipeline).
class EvalEnv {
public:
    virtual ~EvalEnv() = default;
    virtual const Value* lookup(std::string_view name) const = 0;
};

/// Evaluation incident counters, owned by the caller and shared across a run.
struct EvalStats {
    std::uint64_t type_errors{0};
    std::uint64_t divide_by_zero{0};
    std::uint64_t overflow{0};

    std::uint64_t total() const { return type_errors + divide_by_zero + overflow; }
};

enum class BinaryOp : std::uint8_t { Add, Sub, Mul, Div, Lt, Le, Gt, Ge, Eq, Ne, And, Or };
enum class UnaryOp : std::uint8_t { Neg, Not };
enum class Builtin : std::uint8_t { Max, Min, Abs };

struct Node;
using NodePtr = std::unique_ptr<Node>;

struct Node {
    enum class Type : std::uint8_t { Literal, Identifier, Unary, Binary, Call };

    Type type;
    double literal{0.0};
    std::string name;
    UnaryOp unary_op{UnaryOp::Neg};
    BinaryOp binary_op{BinaryOp::Add};
    Builtin builtin{Builtin::Max};
    NodePtr lhs;
    NodePtr rhs;
    std::vector<NodePtr> args;
};

/// Parsed, immutable expression. Operators by descending precedence:
/// unary -/not; * /; + -; comparisons (non-associative); and; or.
/// Calls: max(...), min(...) variadic, abs(x). Whitespace (newlines included)
/// is insignificant.
class Expression {
public:
    Expression() = default;

    /// Throws SyntaxError/ArityError with a byte offset.
    static Expression parse(std::string_view source);

    bool valid() const { return root_ != nullptr; }
    const std::string& source() const { return source_; }

    /// Strict Missing propagation, short-circuit and/or over booleans,
    /// divide-by-zero and type errors surface as Missing plus a counter.
    EvalValue evaluate(const EvalEnv& env, EvalStats* stats = nullptr) const;

    /// Fully parenthesized rendering; reparsing yields an identical tree.
    std::string print() const;

    void collect_identifiers(std::set<std::string>& out) const;

    /// Structural comparison, used by round-trip checks.
    bool same_shape(const Expression& other) const;

private:
    std::string source_;
    NodePtr root_;
};

}  // namespace steam::expr
