// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace trajsql {

/// Root of every error thrown by the library. `code()` is a stable
/// machine-readable name used in structured CLI output and corpus logs.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

/// Source position, 1-based.
struct SourcePos {
  std::size_t line = 1;
  std::size_t column = 1;
};

class SyntaxError : public Error {
 public:
  SyntaxError(SourcePos pos, const std::string& expected, const std::string& found)
      : Error("SyntaxError", "line " + std::to_string(pos.line) + ", column " +
                                 std::to_string(pos.column) + ": expected " + expected +
                                 (found.empty() ? std::string() : ", found " + found)),
        pos_(pos),
        expected_(expected) {}
  SourcePos pos() const noexcept { return pos_; }
  const std::string& expected() const noexcept { return expected_; }

 private:
  SourcePos pos_;
  std::string expected_;
};

#define TRAJSQL_DEFINE_ERROR(Name)                                             \
  class Name : public Error {                                                  \
   public:                                                                     \
    explicit Name(const std::string& message) : Error(#Name, message) {}       \
  };

TRAJSQL_DEFINE_ERROR(UnknownAction)
TRAJSQL_DEFINE_ERROR(BindingError)
TRAJSQL_DEFINE_ERROR(UnsupportedSql)
TRAJSQL_DEFINE_ERROR(SchemaMismatch)
TRAJSQL_DEFINE_ERROR(AmbiguousColumn)
TRAJSQL_DEFINE_ERROR(JoinPathNotFound)
TRAJSQL_DEFINE_ERROR(InvalidChain)
TRAJSQL_DEFINE_ERROR(ArityMismatch)
TRAJSQL_DEFINE_ERROR(KindMismatch)
TRAJSQL_DEFINE_ERROR(NoViablePerturbation)
TRAJSQL_DEFINE_ERROR(MissingSchema)
TRAJSQL_DEFINE_ERROR(StageOutputInvalid)
TRAJSQL_DEFINE_ERROR(BackendUnavailable)
TRAJSQL_DEFINE_ERROR(TemplateNotFound)
TRAJSQL_DEFINE_ERROR(EngineUnavailable)
TRAJSQL_DEFINE_ERROR(GoldExecutionFailed)
TRAJSQL_DEFINE_ERROR(AlignmentError)
TRAJSQL_DEFINE_ERROR(IoError)
TRAJSQL_DEFINE_ERROR(UsageError)

#undef TRAJSQL_DEFINE_ERROR

/// Malformed file input (schema files, corpus files, seed files).
class FormatError : public Error {
 public:
  FormatError(std::size_t line, const std::string& reason)
      : Error("FormatError", "line " + std::to_string(line) + ": " + reason),
        line_(line),
        reason_(reason) {}
  std::size_t line() const noexcept { return line_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::size_t line_;
  std::string reason_;
};

}  // namespace trajsql
