#pragma once

#include <stdexcept>
#include <string>

namespace mmpc {

// Invalid arguments: dimension mismatches, nonpositive entries, bad indices.
class ArgumentError : public std::invalid_argument {
public:
  explicit ArgumentError(const std::string& what) : std::invalid_argument(what) {}
};

// An InterferenceMapping violated its contract (nonpositive or non-finite output).
class MappingContractError : public std::runtime_error {
public:
  explicit MappingContractError(const std::string& what) : std::runtime_error(what) {}
};

// A user whose rate is identically zero cannot be served.
class DegenerateUserError : public std::runtime_error {
public:
  DegenerateUserError(int user, const std::string& what)
      : std::runtime_error(what), user_(user) {}
  int user() const { return user_; }

private:
  int user_;
};

// Configuration document errors, with the offending line when known.
class ParseError : public std::runtime_error {
public:
  ParseError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  explicit ParseError(const std::string& what) : std::runtime_error(what), line_(0) {}
  int line() const { return line_; }

private:
  int line_;
};

// Sample-cache file errors (bad magic, truncation, invariant violations).
class CacheError : public std::runtime_error {
public:
  explicit CacheError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mmpc
