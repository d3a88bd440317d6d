#pragma once

#include <exception>
#include <stdexcept>
#include <string>

namespace uwsr {

// Malformed input files or command-line values.
class ParseError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Numerical failure: non-convergence, breakdown, domain violations.
class NumericError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Failure inside a named pipeline stage; keeps the category of the cause.
class StageError : public std::runtime_error {
public:
  enum class Cause { Parse, Numeric, Other };

  StageError(std::string stage, Cause cause, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)), cause_(cause) {}

  const std::string& stage() const noexcept { return stage_; }
  Cause cause() const noexcept { return cause_; }

private:
  std::string stage_;
  Cause cause_;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitOther = 1;
inline constexpr int kExitParse = 2;
inline constexpr int kExitNumeric = 3;

// Process exit code for an exception escaping a command.
inline int exit_code(const std::exception_ptr& error) {
  if (!error) return kExitOk;
  try {
    std::rethrow_exception(error);
  } catch (const StageError& e) {
    switch (e.cause()) {
      case StageError::Cause::Parse: return kExitParse;
      case StageError::Cause::Numeric: return kExitNumeric;
      default: return kExitOther;
    }
  } catch (const ParseError&) {
    return kExitParse;
  } catch (const NumericError&) {
    return kExitNumeric;
  } catch (const std::invalid_argument&) {
    return kExitParse;
  } catch (...) {
    return kExitOther;
  }
}

}  // namespace uwsr
