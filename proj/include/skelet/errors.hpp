#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace skelet {

// Broad failure categories; the CLI maps each to its own exit code.
enum class ErrorCategory {
  kDimension,
  kConfig,
  kIndex,
  kNumeric,
  kLayout,
  kPartition,
  kFormat,
  kParse,
  kUsage,
  kInsufficientData,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

#define SKELET_DEFINE_ERROR(Name, Category)                      \
  class Name : public Error {                                    \
   public:                                                       \
    explicit Name(const std::string& what)                       \
        : Error(ErrorCategory::Category, what) {}                \
  };

SKELET_DEFINE_ERROR(DimensionError, kDimension)
SKELET_DEFINE_ERROR(ConfigError, kConfig)
SKELET_DEFINE_ERROR(IndexError, kIndex)
SKELET_DEFINE_ERROR(NumericError, kNumeric)
SKELET_DEFINE_ERROR(LayoutError, kLayout)
SKELET_DEFINE_ERROR(PartitionError, kPartition)
SKELET_DEFINE_ERROR(UsageError, kUsage)
SKELET_DEFINE_ERROR(InsufficientDataError, kInsufficientData)

#undef SKELET_DEFINE_ERROR

/// Malformed binary input. Carries the byte offset at which decoding failed.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::uint64_t offset)
      : Error(ErrorCategory::kFormat,
              what + " (at byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

/// Malformed text input. Carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(ErrorCategory::kParse,
              "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace skelet
