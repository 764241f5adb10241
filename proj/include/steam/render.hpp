#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "steam/packet.hpp"
#include "steam/value.hpp"

namespace steam {

enum class FormatKind : std::uint8_t { Json, Tsv, Csv, Message };

/// Message template references a name absent from the enriched column
/// universe. Raised while building the pipeline, never mid-run.
class TemplateKeyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Compiled `{name}` / `{name:.2f}` template. Literal text (HTML fragments
/// included) passes through verbatim; Missing renders as an em dash.
class MessageTemplate {
public:
    MessageTemplate() = default;

    /// Throws TemplateKeyError on malformed placeholders.
    static MessageTemplate parse(const std::string& text);

    std::string render(const DataPacket& packet) const;

    /// Placeholder names, for build-time resolution checks.
    std::vector<std::string> names() const;

    const std::string& source() const { return source_; }

private:
    struct Segment {
        std::string literal;                  // emitted verbatim when name is empty
        std::string name;                     // placeholder column
        std::optional<NumericFormat> format;  // explicit :FMT beats column metadata
    };

    std::string source_;
    std::vector<Segment> segments_;
};

/// How an endpoint serializes the enriched packet.
struct FormatSpec {
    FormatKind kind{FormatKind::Json};
    MessageTemplate message;  // Message kind only
};

/// Appends computed results as new columns after the originals, in result
/// order, carrying each function's format hint. Collisions are rejected when
/// the pipeline is built, so this never fails.
DataPacket enrich(const DataPacket& packet,
                  const std::vector<std::pair<std::string, Value>>& results,
                  const std::vector<std::optional<NumericFormat>>& formats);

/// Shortest round-trip decimal text for a double.
std::string render_number(double v);

/// Number text honoring optional fixed-point metadata.
std::string render_value_text(const Value& v, const std::optional<NumericFormat>& format);

/// Serializes the enriched packet:
///  - json: one line, keys in column order, format metadata honored,
///    Missing -> null, trailing newline;
///  - tsv/csv: values joined, Missing -> empty field, trailing newline,
///    csv fields double-quoted when they contain separator/quote/newline;
///  - message: template substitution, no added newline.
std::string render(const FormatSpec& format, const DataPacket& enriched);

const char* format_kind_name(FormatKind kind);
std::optional<FormatKind> format_kind_from(const std::string& name);

}  // namespace steam
