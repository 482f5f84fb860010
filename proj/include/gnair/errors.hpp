#ifndef GNAIR_ERRORS_HPP
#define GNAIR_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace gnair
{

/// Malformed or inconsistent configuration. Maps to CLI exit code 1.
class ConfigError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

/// Argument outside an operation's domain.
class DomainError : public std::domain_error
{
  public:
    using std::domain_error::domain_error;
};

/// Iterative solver failed to meet its tolerance. Maps to CLI exit code 2.
class ConvergenceError : public std::runtime_error
{
  public:
    ConvergenceError(const std::string& what, double residual)
        : std::runtime_error(what + " (residual " + std::to_string(residual) + ")"), residual_(residual)
    {
    }

    double residual() const noexcept { return residual_; }

  private:
    double residual_;
};

/// File system failure. Maps to CLI exit code 3.
class IoError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

} // namespace gnair

#endif // GNAIR_ERRORS_HPP
