#ifndef TNSGA_ERRORS_HPP
#define TNSGA_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <utility>

namespace tnsga {

// Error categories. The CLI maps each category onto a distinct exit code.

struct ParameterError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

struct EmptySelectionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InfeasibleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    ConfigError(std::string field, std::string const& what)
        : std::runtime_error(field + ": " + what), field_(std::move(field)) {}

    [[nodiscard]] auto field() const noexcept -> std::string const& { return field_; }

private:
    std::string field_;
};

struct ParseError : std::runtime_error {
    ParseError(std::size_t line, std::string const& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

    [[nodiscard]] auto line() const noexcept -> std::size_t { return line_; }

private:
    std::size_t line_;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace tnsga

#endif
