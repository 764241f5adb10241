#include "steam/conditions.hpp"

#include <algorithm>
#include <set>

#include "steam/errors.hpp"

namespace steam {

namespace {

class PacketEnv : public expr::EvalEnv {
public:
    explicit PacketEnv(const DataPacket& packet) : packet_(packet) {}

    const Value* lookup(std::string_view name) const override {
        const Column* c = packet_.find(name);
        return c ? &c->value : nullptr;
    }

private:
    const DataPacket& packet_;
};

std::optional<double> resolve_bound(const BoundRef& bound, const DataPacket& packet) {
    if (bound.is_literal()) return bound.literal;
    Value v = packet.value_or_missing(bound.name);
    if (!v.is_number()) return std::nullopt;  // Missing or text: bound unusable
    return v.num();
}

}  // namespace

Condition Condition::build(const ConditionSpec& spec,
                           const std::vector<std::string>& universe) {
    std::vector<std::string> issues;
    std::set<std::string> names(universe.begin(), universe.end());

    Condition out;
    out.spec_ = spec;

    switch (spec.kind) {
        case ConditionKind::Always:
            break;
        case ConditionKind::Threshold:
            if (spec.column.empty()) {
                issues.push_back("threshold condition: column is required");
            } else if (!names.count(spec.column)) {
                issues.push_back("threshold condition: unknown column '" + spec.column + "'");
            }
            if (!spec.upper && !spec.lower) {
                issues.push_back("threshold condition: needs upper and/or lower");
            }
            for (const auto* bound : {&spec.upper, &spec.lower}) {
                if (*bound && !(*bound)->is_literal() && !names.count((*bound)->name)) {
                    issues.push_back("threshold condition: unknown bound '" +
                                     (*bound)->name + "'");
                }
            }
            break;
        case ConditionKind::MissingValue:
            if (spec.columns.empty()) {
                issues.push_back("missing_value condition: columns list is required");
            }
            for (const auto& c : spec.columns) {
                if (!names.count(c)) {
                    issues.push_back("missing_value condition: unknown column '" + c + "'");
                }
            }
            break;
        case ConditionKind::Equation:
            if (spec.equation.empty()) {
                issues.push_back("equation condition: expression is required");
            } else {
                try {
                    out.expr_ = expr::Expression::parse(spec.equation);
                    std::set<std::string> ids;
                    out.expr_.collect_identifiers(ids);
                    for (const auto& id : ids) {
                        if (!names.count(id)) {
                            issues.push_back("equation condition: unknown name '" + id + "'");
                        }
                    }
                } catch (const SyntaxError& e) {
                    issues.push_back(std::string("equation condition: ") + e.what());
                }
            }
            break;
    }

    if (!issues.empty()) throw ConfigError(std::move(issues));
    return out;
}

bool Condition::check(const DataPacket& enriched, expr::EvalStats* stats) const {
    switch (spec_.kind) {
        case ConditionKind::Always:
            return true;

        case ConditionKind::Threshold: {
            Value v = enriched.value_or_missing(spec_.column);
            if (!v.is_number()) return false;
            if (spec_.upper) {
                if (auto bound = resolve_bound(*spec_.upper, enriched);
                    bound && v.num() > *bound) {
                    return true;
                }
            }
            if (spec_.lower) {
                if (auto bound = resolve_bound(*spec_.lower, enriched);
                    bound && v.num() < *bound) {
                    return true;
                }
            }
            return false;
        }

        case ConditionKind::MissingValue:
            return std::any_of(spec_.columns.begin(), spec_.columns.end(),
                               [&](const std::string& c) {
                                   const Column* col = enriched.find(c);
                                   return col == nullptr || col->value.is_missing();
                               });

        case ConditionKind::Equation: {
            PacketEnv env(enriched);
            expr::EvalValue v = expr_.evaluate(env, stats);
            if (v.is_boolean()) return v.truth();
            if (v.is_number()) return v.num() != 0.0;
            return false;  // Missing or text never fires
        }
    }
    return false;
}

}  // namespace steam
