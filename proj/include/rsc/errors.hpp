#pragma once

#include <stdexcept>
#include <string>

namespace rsc {

/// Precondition violated on a physical quantity (negative mass, R >= 1, ...).
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Configuration rejected during validation. `path` is the dotted key path.
class ConfigError : public std::runtime_error {
public:
  ConfigError(std::string path, const std::string& what)
      : std::runtime_error(path.empty() ? what : path + ": " + what), path_(std::move(path))
  {
  }
  const std::string& path() const noexcept { return path_; }

private:
  std::string path_;
};

/// Malformed input file; `line` is 1-based, 0 when not applicable.
class ParseError : public std::runtime_error {
public:
  ParseError(std::string file, std::size_t line, const std::string& what)
      : std::runtime_error(file + (line ? ":" + std::to_string(line) : std::string()) + ": " + what),
        line_(line)
  {
  }
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

/// Integrator, minimiser or iteration failed to converge.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Spectrum fit did not converge or produced unusable parameters.
class FitError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace rsc
