#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>

namespace steam {

/// Tagged scalar flowing through every pipeline layer. Missing is a
/// first-class state, distinct from Number(0) and Text("").
class Value {
public:
    enum class Kind : std::uint8_t { Missing, Number, Text, Timestamp };

    Value() = default;

    static Value missing() { return Value{}; }

    /// Non-finite inputs collapse to Missing so analytics never see NaN/Inf.
    static Value number(double v) {
        Value out;
        if (std::isfinite(v)) {
            out.kind_ = Kind::Number;
            out.num_ = v;
        }
        return out;
    }

    static Value text(std::string s) {
        Value out;
        out.kind_ = Kind::Text;
        out.str_ = std::move(s);
        return out;
    }

    /// ISO-8601 text kept verbatim; analytics never interpret it.
    static Value timestamp(std::string s) {
        Value out;
        out.kind_ = Kind::Timestamp;
        out.str_ = std::move(s);
        return out;
    }

    Kind kind() const { return kind_; }
    bool is_missing() const { return kind_ == Kind::Missing; }
    bool is_number() const { return kind_ == Kind::Number; }
    bool is_text() const { return kind_ == Kind::Text || kind_ == Kind::Timestamp; }

    /// Valid only when is_number().
    double num() const { return num_; }

    /// Valid only for Text/Timestamp.
    const std::string& str() const { return str_; }

    bool operator==(const Value& other) const {
        if (kind_ != other.kind_) return false;
        switch (kind_) {
            case Kind::Missing: return true;
            case Kind::Number: return num_ == other.num_;
            default: return str_ == other.str_;
        }
    }

private:
    Kind kind_{Kind::Missing};
    double num_{0.0};
    std::string str_;
};

/// Fixed-point serialization hint attached to computed columns, parsed from
/// format strings of the shape "{:.2f}" or "{: .2f}" (optional space flag).
struct NumericFormat {
    bool space_flag{false};
    int precision{2};

    std::string apply(double v) const;
};

}  // namespace steam
