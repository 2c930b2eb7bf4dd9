#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace semsum {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class DegenerateVectorError : public Error {
 public:
  using Error::Error;
};

class DuplicateIdError : public Error {
 public:
  using Error::Error;
};

class UnknownDocumentError : public Error {
 public:
  using Error::Error;
};

class StaleVersionError : public Error {
 public:
  using Error::Error;
};

class VersionOrderError : public Error {
 public:
  using Error::Error;
};

class SnapshotFormatError : public Error {
 public:
  SnapshotFormatError(const std::string& what, std::size_t offset)
      : Error(what + " (at byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class EmptyInputError : public Error {
 public:
  using Error::Error;
};

/// Transport-level failure; callers may retry.
class ProviderUnavailableError : public Error {
 public:
  using Error::Error;
};

class ProviderProtocolError : public Error {
 public:
  using Error::Error;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

class CorpusParseError : public Error {
 public:
  CorpusParseError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class IntegrityError : public Error {
 public:
  using Error::Error;
};

class SpecError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace semsum
