#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dehum {

// Base class for every failure raised by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed input data. Carries a 1-based line number when one is known.
class ParseError : public Error {
public:
    explicit ParseError(const std::string& what) : Error(what) {}
    ParseError(const std::string& what, std::size_t line)
        : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}

    std::size_t line() const { return line_; }

private:
    std::size_t line_ = 0;
};

// Invalid configuration or unusable inputs. The CLI maps this to exit code 2.
class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace dehum
