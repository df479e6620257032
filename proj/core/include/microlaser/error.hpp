#pragma once

#include <stdexcept>
#include <string>

namespace microlaser {

/// Base class for every error raised by the library. `code()` is a short
/// machine-readable tag used by the command-line tool's error JSON.
class Error : public std::runtime_error
{
  public:
    Error(std::string code, const std::string& what)
        : std::runtime_error(what), code_(std::move(code))
    {
    }

    const std::string& code() const noexcept { return code_; }

  private:
    std::string code_;
};

class InvalidArgument : public Error
{
  public:
    explicit InvalidArgument(const std::string& what)
        : Error("invalid_argument", what)
    {
    }
};

/// A Fock-space or photon-number truncation was too small for the state.
class TruncationError : public Error
{
  public:
    explicit TruncationError(const std::string& what)
        : Error("truncation", what)
    {
    }
};

class NoStableBranch : public Error
{
  public:
    explicit NoStableBranch(const std::string& what)
        : Error("no_stable_branch", what)
    {
    }
};

class FitError : public Error
{
  public:
    explicit FitError(const std::string& what) : Error("fit_failed", what) {}
};

class InsufficientData : public Error
{
  public:
    explicit InsufficientData(const std::string& what)
        : Error("insufficient_data", what)
    {
    }
};

class NonIdentifiable : public Error
{
  public:
    explicit NonIdentifiable(const std::string& what)
        : Error("non_identifiable", what)
    {
    }
};

}  // namespace microlaser
