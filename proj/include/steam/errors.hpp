#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace steam {

/// Pipeline/scenario configuration rejected. Collects every diagnostic found,
/// not just the first.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> issues)
        : std::runtime_error(join(issues)), issues_(std::move(issues)) {}
    explicit ConfigError(std::string issue)
        : ConfigError(std::vector<std::string>{std::move(issue)}) {}

    const std::vector<std::string>& issues() const { return issues_; }

private:
    static std::string join(const std::vector<std::string>& issues) {
        std::string out = "invalid configuration:";
        for (const auto& s : issues) {
            out += "\n  - ";
            out += s;
        }
        return out;
    }

    std::vector<std::string> issues_;
};

/// Frame field count does not match the parser column list. The frame is
/// dropped and counted; the pipeline continues.
class FrameArityError : public std::runtime_error {
public:
    FrameArityError(std::size_t expected, std::size_t got)
        : std::runtime_error("frame has " + std::to_string(got) +
                             " fields, parser expects " + std::to_string(expected)),
          expected_(expected),
          got_(got) {}

    std::size_t expected() const { return expected_; }
    std::size_t got() const { return got_; }

private:
    std::size_t expected_;
    std::size_t got_;
};

/// Expression source rejected; offset is the byte position of the failure.
class SyntaxError : public std::runtime_error {
public:
    SyntaxError(const std::string& what, std::size_t offset)
        : std::runtime_error(what + " (at offset " + std::to_string(offset) + ")"),
          offset_(offset) {}

    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

/// Wrong number of call arguments in an expression (abs wants exactly one,
/// max/min at least one).
class ArityError : public SyntaxError {
public:
    ArityError(const std::string& what, std::size_t offset) : SyntaxError(what, offset) {}
};

/// TCP listener could not bind. Fatal at startup.
class BindError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// File source/sink failed. Fatal at startup, counted mid-run.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Benchmark report requested over an empty log.
class ReportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace steam
