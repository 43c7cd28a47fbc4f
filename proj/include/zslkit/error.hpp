#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace zslkit {

/// Base class of every exception thrown by zslkit.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string &what) : std::runtime_error(what) {}
    /// Short machine-readable category, used by the CLI error JSON.
    [[nodiscard]] virtual const char *kind() const noexcept { return "error"; }
};

/// Argument or precondition violation (dimension mismatch, empty input, bad range).
class InvalidArgument : public Error {
  public:
    using Error::Error;
    [[nodiscard]] const char *kind() const noexcept override { return "invalid_argument"; }
};

/// Malformed input file. Carries the 1-based line number when known (0 otherwise).
class ParseError : public Error {
  public:
    ParseError(const std::string &what, std::size_t line = 0)
        : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_{ line } {}
    [[nodiscard]] std::size_t line() const noexcept { return line_; }
    [[nodiscard]] const char *kind() const noexcept override { return "parse_error"; }

  private:
    std::size_t line_;
};

/// A label token without an entry in the embedding store.
class VocabularyError : public Error {
  public:
    explicit VocabularyError(const std::string &token)
        : Error("token '" + token + "' is not in the embedding vocabulary"), token_{ token } {}
    [[nodiscard]] const std::string &token() const noexcept { return token_; }
    [[nodiscard]] const char *kind() const noexcept override { return "vocabulary_error"; }

  private:
    std::string token_;
};

/// The dual solver hit its iteration cap. Holds the best iterate's diagnostics.
class ConvergenceError : public Error {
  public:
    ConvergenceError(std::size_t iterations, double violation, double objective)
        : Error("dual solver did not converge after " + std::to_string(iterations) + " iterations (KKT violation " + std::to_string(violation) + ", objective " + std::to_string(objective) + ")"),
          iterations_{ iterations },
          violation_{ violation },
          objective_{ objective } {}
    [[nodiscard]] std::size_t iterations() const noexcept { return iterations_; }
    [[nodiscard]] double violation() const noexcept { return violation_; }
    [[nodiscard]] double objective() const noexcept { return objective_; }
    [[nodiscard]] const char *kind() const noexcept override { return "convergence_error"; }

  private:
    std::size_t iterations_;
    double violation_;
    double objective_;
};

}  // namespace zslkit
