#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "steam/expr.hpp"
#include "steam/packet.hpp"

namespace steam {

enum class ConditionKind : std::uint8_t { Always, Threshold, MissingValue, Equation };

/// Threshold bound: either a column/function-id lookup or a numeric literal.
struct BoundRef {
    std::string name;                 // set when the bound resolves by lookup
    std::optional<double> literal;    // set when the bound is a number

    bool is_literal() const { return literal.has_value(); }
};

/// Per-endpoint event gate, evaluated on the enriched packet.
struct ConditionSpec {
    ConditionKind kind{ConditionKind::Always};

    // threshold
    std::string column;
    std::optional<BoundRef> upper;
    std::optional<BoundRef> lower;

    // missing_value
    std::vector<std::string> columns;

    // equation: source text, parsed at build; an equation-function id is
    // also accepted and treated as the expression consisting of that name
    std::string equation;
};

/// Compiled condition. Pure: same enriched packet, same verdict.
class Condition {
public:
    /// Throws ConfigError listing every violation; `universe` is the set of
    /// resolvable names after enrichment (parser columns + function ids).
    static Condition build(const ConditionSpec& spec,
                           const std::vector<std::string>& universe);

    /// Missing never fires threshold/equation conditions; missing_value fires
    /// on any named column being Missing or absent.
    bool check(const DataPacket& enriched, expr::EvalStats* stats = nullptr) const;

    ConditionKind kind() const { return spec_.kind; }
    const ConditionSpec& spec() const { return spec_; }

private:
    ConditionSpec spec_;
    expr::Expression expr_;  // equation kind only
};

}  // namespace steam
