#include "steam/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "steam/errors.hpp"

namespace steam {

namespace {

std::vector<double> present(const std::vector<Value>& values) {
    std::vector<double> out;
    out.reserve(values.size());
    for (const auto& v : values) {
        if (v.is_number()) out.push_back(v.num());
    }
    return out;
}

double mean_of(const std::vector<double>& xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

}  // namespace

Value window_aggregate(FunctionKind kind, const std::vector<Value>& values) {
    std::vector<double> xs = present(values);
    if (kind == FunctionKind::Count) return Value::number(static_cast<double>(xs.size()));
    if (xs.empty()) return Value::missing();

    switch (kind) {
        case FunctionKind::Min:
            return Value::number(*std::min_element(xs.begin(), xs.end()));
        case FunctionKind::Max:
            return Value::number(*std::max_element(xs.begin(), xs.end()));
        case FunctionKind::Sum: {
            double s = 0.0;
            for (double x : xs) s += x;
            return Value::number(s);
        }
        case FunctionKind::Mean:
            return Value::number(mean_of(xs));
        case FunctionKind::Median: {
            std::sort(xs.begin(), xs.end());
            std::size_t n = xs.size();
            if (n % 2 == 1) return Value::number(xs[n / 2]);
            return Value::number((xs[n / 2 - 1] + xs[n / 2]) / 2.0);
        }
        case FunctionKind::Stdev: {
            double m = mean_of(xs);
            double acc = 0.0;
            for (double x : xs) acc += (x - m) * (x - m);
            return Value::number(std::sqrt(acc / static_cast<double>(xs.size())));
        }
        default:
            return Value::missing();
    }
}

Value ewma(const std::vector<Value>& values, double alpha) {
    bool seeded = false;
    double s = 0.0;
    for (const auto& v : values) {
        if (!v.is_number()) continue;  // recursion carries state across gaps
        if (!seeded) {
            s = v.num();
            seeded = true;
        } else {
            s = alpha * v.num() + (1.0 - alpha) * s;
        }
    }
    return seeded ? Value::number(s) : Value::missing();
}

Value slope(const std::vector<Value>& values) {
    // Least squares of present values against their sample index in the
    // window slice; Missing entries keep their index but contribute nothing.
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!values[i].is_number()) continue;
        double x = static_cast<double>(i);
        double y = values[i].num();
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n < 2) return Value::missing();
    double denom = static_cast<double>(n) * sxx - sx * sx;
    if (denom == 0.0) return Value::missing();
    return Value::number((static_cast<double>(n) * sxy - sx * sy) / denom);
}

namespace {

/// Solves A x = b in place by Gaussian elimination with partial pivoting.
/// A zero pivot leaves the corresponding coefficient at zero instead of
/// failing, so degenerate (e.g. constant) regressors stay harmless.
std::vector<double> solve_normal_equations(std::vector<std::vector<double>> a,
                                           std::vector<double> b) {
    std::size_t n = b.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;

    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
        }
        if (std::fabs(a[pivot][col]) < 1e-12) {
            for (std::size_t r = col; r < n; ++r) a[r][col] = 0.0;
            continue;
        }
        std::swap(a[col], a[pivot]);
        std::swap(b[col], b[pivot]);
        for (std::size_t r = col + 1; r < n; ++r) {
            double f = a[r][col] / a[col][col];
            if (f == 0.0) continue;
            for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }

    std::vector<double> x(n, 0.0);
    for (std::size_t i = n; i-- > 0;) {
        if (a[i][i] == 0.0) {
            x[i] = 0.0;  // dropped column: coefficient zero
            continue;
        }
        double acc = b[i];
        for (std::size_t c = i + 1; c < n; ++c) acc -= a[i][c] * x[c];
        x[i] = acc / a[i][i];
    }
    return x;
}

}  // namespace

Value ar_forecast(const std::vector<Value>& values, std::size_t p) {
    std::vector<double> xs = present(values);
    if (p < 1 || xs.size() < p + 2) return Value::missing();

    // Regress x[t] on [1, x[t-1], ..., x[t-p]] over the gap-free present
    // sequence, then forecast one step ahead.
    std::size_t dim = p + 1;
    std::size_t rows = xs.size() - p;
    std::vector<std::vector<double>> ata(dim, std::vector<double>(dim, 0.0));
    std::vector<double> atb(dim, 0.0);
    for (std::size_t t = p; t < xs.size(); ++t) {
        std::vector<double> row(dim, 1.0);
        for (std::size_t k = 1; k <= p; ++k) row[k] = xs[t - k];
        for (std::size_t i = 0; i < dim; ++i) {
            for (std::size_t j = 0; j < dim; ++j) ata[i][j] += row[i] * row[j];
            atb[i] += row[i] * xs[t];
        }
    }
    (void)rows;
    std::vector<double> coef = solve_normal_equations(std::move(ata), std::move(atb));

    double forecast = coef[0];
    for (std::size_t k = 1; k <= p; ++k) forecast += coef[k] * xs[xs.size() - k];
    return Value::number(forecast);  // non-finite collapses to Missing
}

const char* function_kind_name(FunctionKind kind) {
    switch (kind) {
        case FunctionKind::Min: return "min";
        case FunctionKind::Max: return "max";
        case FunctionKind::Sum: return "sum";
        case FunctionKind::Count: return "count";
        case FunctionKind::Mean: return "mean";
        case FunctionKind::Median: return "median";
        case FunctionKind::Ewma: return "ewma";
        case FunctionKind::Stdev: return "stdev";
        case FunctionKind::Slope: return "slope";
        case FunctionKind::ArForecast: return "ar_forecast";
        case FunctionKind::Equation: return "equation";
    }
    return "?";
}

std::optional<FunctionKind> function_kind_from(const std::string& name) {
    static const std::pair<const char*, FunctionKind> table[] = {
        {"min", FunctionKind::Min},       {"max", FunctionKind::Max},
        {"sum", FunctionKind::Sum},       {"count", FunctionKind::Count},
        {"mean", FunctionKind::Mean},     {"median", FunctionKind::Median},
        {"ewma", FunctionKind::Ewma},     {"stdev", FunctionKind::Stdev},
        {"slope", FunctionKind::Slope},   {"ar_forecast", FunctionKind::ArForecast},
        {"equation", FunctionKind::Equation},
    };
    for (const auto& [n, k] : table) {
        if (name == n) return k;
    }
    return std::nullopt;
}

std::optional<NumericFormat> parse_numeric_format(const std::string& text) {
    // Accepted shapes: "{:.Nf}" and "{: .Nf}" with N in 0..18.
    if (text.size() < 6 || text.front() != '{' || text.back() != '}') return std::nullopt;
    std::string_view body(text.data() + 1, text.size() - 2);
    if (body.empty() || body.front() != ':') return std::nullopt;
    body.remove_prefix(1);
    NumericFormat fmt;
    if (!body.empty() && body.front() == ' ') {
        fmt.space_flag = true;
        body.remove_prefix(1);
    }
    if (body.size() < 3 || body.front() != '.' || body.back() != 'f') return std::nullopt;
    body.remove_prefix(1);
    body.remove_suffix(1);
    int precision = 0;
    if (body.empty() || body.size() > 2) return std::nullopt;
    for (char c : body) {
        if (c < '0' || c > '9') return std::nullopt;
        precision = precision * 10 + (c - '0');
    }
    fmt.precision = precision;
    return fmt;
}

namespace {

/// Equation name resolution: current packet columns first, then the results
/// computed so far this packet.
class EquationEnv : public expr::EvalEnv {
public:
    EquationEnv(const DataPacket& packet,
                const std::vector<std::pair<std::string, Value>>& results)
        : packet_(packet), results_(results) {}

    const Value* lookup(std::string_view name) const override {
        if (const Column* c = packet_.find(name)) return &c->value;
        for (const auto& [id, v] : results_) {
            if (id == name) return &v;
        }
        return nullptr;
    }

private:
    const DataPacket& packet_;
    const std::vector<std::pair<std::string, Value>>& results_;
};

}  // namespace

FunctionSet FunctionSet::build(std::vector<FunctionSpec> specs,
                               const std::vector<std::string>& parser_columns,
                               std::size_t window_capacity) {
    std::vector<std::string> issues;
    std::set<std::string> column_set(parser_columns.begin(), parser_columns.end());
    std::set<std::string> ids_so_far;

    FunctionSet out;
    out.equations_.resize(specs.size());

    for (std::size_t i = 0; i < specs.size(); ++i) {
        FunctionSpec& spec = specs[i];
        if (spec.id.empty()) spec.id = function_kind_name(spec.kind);
        const std::string where = "function '" + spec.id + "': ";

        if (column_set.count(spec.id)) {
            issues.push_back(where + "id collides with a parser column");
        }
        if (!ids_so_far.insert(spec.id).second) {
            issues.push_back(where + "duplicate id");
        }
        if (spec.batchlen) {
            if (*spec.batchlen == 0) {
                issues.push_back(where + "batchlen must be positive");
            } else if (*spec.batchlen > window_capacity) {
                issues.push_back(where + "batchlen exceeds the window capacity");
            }
        }
        if (spec.kind == FunctionKind::Ewma) {
            if (!spec.alpha) {
                std::size_t n = spec.batchlen.value_or(window_capacity);
                spec.alpha = 2.0 / (static_cast<double>(n) + 1.0);
            } else if (!(*spec.alpha > 0.0 && *spec.alpha <= 1.0)) {
                issues.push_back(where + "alpha must be in (0, 1]");
            }
        }
        if (spec.kind == FunctionKind::ArForecast && spec.order < 1) {
            issues.push_back(where + "order must be at least 1");
        }
        if (spec.kind == FunctionKind::Equation) {
            if (spec.equation.empty()) {
                issues.push_back(where + "equation text is required");
            } else {
                try {
                    out.equations_[i] = expr::Expression::parse(spec.equation);
                    std::set<std::string> names;
                    out.equations_[i].collect_identifiers(names);
                    for (const auto& name : names) {
                        if (!column_set.count(name) && !ids_so_far.count(name)) {
                            issues.push_back(where + "references unknown name '" + name + "'");
                        } else if (name == spec.id) {
                            issues.push_back(where + "references itself");
                        }
                    }
                } catch (const SyntaxError& e) {
                    issues.push_back(where + e.what());
                }
            }
        } else if (!column_set.count(spec.attribute)) {
            issues.push_back(where + "attribute '" + spec.attribute +
                             "' is not a parser column");
        }
    }

    if (!issues.empty()) throw ConfigError(std::move(issues));

    out.specs_ = std::move(specs);
    out.ids_.reserve(out.specs_.size());
    for (const auto& s : out.specs_) out.ids_.push_back(s.id);
    return out;
}

std::vector<std::pair<std::string, Value>> FunctionSet::evaluate(
    const SlidingWindow& window, const DataPacket& current, expr::EvalStats* stats) const {
    std::vector<std::pair<std::string, Value>> results;
    results.reserve(specs_.size());

    for (std::size_t i = 0; i < specs_.size(); ++i) {
        const FunctionSpec& spec = specs_[i];
        Value result;

        if (spec.kind == FunctionKind::Equation) {
            EquationEnv env(current, results);
            result = equations_[i].evaluate(env, stats).to_value();
        } else {
            std::vector<Value> column = window.column(spec.attribute);
            if (spec.batchlen && column.size() > *spec.batchlen) {
                column.erase(column.begin(),
                             column.end() - static_cast<std::ptrdiff_t>(*spec.batchlen));
            }
            switch (spec.kind) {
                case FunctionKind::Ewma:
                    result = ewma(column, *spec.alpha);
                    break;
                case FunctionKind::Slope:
                    result = slope(column);
                    break;
                case FunctionKind::ArForecast:
                    result = ar_forecast(column, spec.order);
                    break;
                default:
                    result = window_aggregate(spec.kind, column);
                    break;
            }
        }
        results.emplace_back(spec.id, std::move(result));
    }
    return results;
}

}  // namespace steam
