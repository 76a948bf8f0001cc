#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ensemblekit {

// A caller broke an operation's precondition (wrong shape or an
// out-of-range setting, for example).
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The header is unreadable or declares an unsupported version.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The header parsed but the payload is shorter or longer than it declares.
class CorruptionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A record holds a value outside its domain, such as a NaN feature or a
// label other than 0 or 1.
class DataError : public std::runtime_error {
 public:
  DataError(const std::string& what, std::size_t record_index)
      : std::runtime_error(what + " (record " + std::to_string(record_index) + ")"),
        record_index_(record_index) {}

  std::size_t record_index() const noexcept { return record_index_; }

 private:
  std::size_t record_index_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ensemblekit
