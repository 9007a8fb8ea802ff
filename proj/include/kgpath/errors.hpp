#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace kgpath {

// Base for every error raised by the library. The CLI maps subclasses onto
// exit codes: DataError -> 2, TransportError -> 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input data.
class DataError : public Error {
 public:
  using Error::Error;
};

class ParseError : public DataError {
 public:
  ParseError(std::string source, std::size_t line, const std::string& what)
      : DataError(source + ":" + std::to_string(line) + ": " + what),
        source_(std::move(source)),
        line_(line) {}

  const std::string& source() const noexcept { return source_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string source_;
  std::size_t line_;
};

// A handle or argument violates an operation's precondition.
class ContractError : public DataError {
 public:
  using DataError::DataError;
};

// Plan names relations the graph does not know.
class UngroundedPlanError : public DataError {
 public:
  explicit UngroundedPlanError(std::vector<std::string> unknown)
      : DataError(make_message(unknown)), unknown_(std::move(unknown)) {}

  const std::vector<std::string>& unknown() const noexcept { return unknown_; }

 private:
  static std::string make_message(const std::vector<std::string>& names) {
    std::string msg = "plan is not grounded in the graph; unknown relations:";
    for (const auto& n : names) msg += " " + n;
    return msg;
  }
  std::vector<std::string> unknown_;
};

class DomainError : public DataError {
 public:
  using DataError::DataError;
};

// Endpoint unreachable or kept failing after all retries.
class TransportError : public Error {
 public:
  TransportError(const std::string& what, std::vector<std::string> attempts)
      : Error(what), attempts_(std::move(attempts)) {}

  const std::vector<std::string>& attempts() const noexcept { return attempts_; }

 private:
  std::vector<std::string> attempts_;
};

// Endpoint answered, but with something we cannot interpret.
class ProtocolError : public Error {
 public:
  ProtocolError(const std::string& what, std::string raw)
      : Error(what), raw_(std::move(raw)) {}

  const std::string& raw() const noexcept { return raw_; }

 private:
  std::string raw_;
};

}  // namespace kgpath
