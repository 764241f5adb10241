#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "steam/expr.hpp"
#include "steam/packet.hpp"
#include "steam/value.hpp"
#include "steam/window.hpp"

namespace steam {

enum class FunctionKind : std::uint8_t {
    Min, Max, Sum, Count, Mean, Median, Ewma, Stdev, Slope, ArForecast, Equation,
};

/// One analytic computed per packet over the sliding window.
struct FunctionSpec {
    FunctionKind kind{FunctionKind::Mean};
    std::string id;                       // defaults to the kind name
    std::string attribute{"value"};      // column the function reads
    std::optional<std::size_t> batchlen;  // defaults to the window capacity
    std::optional<NumericFormat> format;  // serialization hint for the result
    std::optional<double> alpha;          // ewma; defaults to 2/(batchlen+1)
    std::size_t order{1};                 // ar_forecast
    std::string equation;                 // equation source text
};

/// Missing-filtered aggregate of the last `batchlen` entries of `values`
/// (the full sequence when batchlen is 0/omitted by the caller).
/// count -> Number of present values; the rest -> Missing on an empty filter.
Value window_aggregate(FunctionKind kind, const std::vector<Value>& values);

/// EWMA recursion over present values oldest->newest, gaps skipped.
Value ewma(const std::vector<Value>& values, double alpha);

/// Least-squares slope of present values against their window sample index
/// (unit spacing). Missing with fewer than two present values.
Value slope(const std::vector<Value>& values);

/// One-step-ahead AR(p) forecast fitted by ordinary least squares with
/// intercept on the present values. Needs at least p+2 present values.
Value ar_forecast(const std::vector<Value>& values, std::size_t p);

/// Validated, ready-to-run function list. Evaluation order is declaration
/// order; equations see parser columns of the current packet plus results of
/// previously declared functions.
class FunctionSet {
public:
    /// Throws ConfigError listing every violation: duplicate ids, id/column
    /// collisions, forward references in equations, references to unknown
    /// names, bad parameters (alpha, order, batchlen).
    static FunctionSet build(std::vector<FunctionSpec> specs,
                             const std::vector<std::string>& parser_columns,
                             std::size_t window_capacity);

    /// Results in declaration order. Per-function evaluation errors produce a
    /// Missing result and increment `stats`; remaining functions still run.
    std::vector<std::pair<std::string, Value>> evaluate(const SlidingWindow& window,
                                                        const DataPacket& current,
                                                        expr::EvalStats* stats = nullptr) const;

    const std::vector<FunctionSpec>& specs() const { return specs_; }

    /// All names an equation or condition may reference after enrichment.
    const std::vector<std::string>& result_ids() const { return ids_; }

private:
    std::vector<FunctionSpec> specs_;
    std::vector<expr::Expression> equations_;  // parallel to specs_, non-empty for Equation kind
    std::vector<std::string> ids_;
};

const char* function_kind_name(FunctionKind kind);
std::optional<FunctionKind> function_kind_from(const std::string& name);

/// Parses "{:.2f}" / "{: .2f}" format strings. std::nullopt for anything else.
std::optional<NumericFormat> parse_numeric_format(const std::string& text);

}  // namespace steam
