#pragma once

#include <stdexcept>
#include <string>

namespace wo {

// Bad flags, bad config keys, inconsistent options. CLI exit code 1.
class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

// Unreadable/malformed input files, mismatched artifacts, divergence. Exit code 2.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Violated internal invariants (e.g. a non-permutation decode). Exit code 3.
class InternalError : public std::logic_error {
 public:
  explicit InternalError(const std::string& what) : std::logic_error(what) {}
};

}  // namespace wo
