#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace bass {

// Root of every error thrown by the library. The CLI maps IoError and
// BackendError (and their subclasses) to exit code 2, everything else to 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class ParseError : public ValidationError {
 public:
  ParseError(const std::string& what, std::size_t line = 0, std::string raw = {})
      : ValidationError(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line),
        raw_(std::move(raw)) {}

  std::size_t line() const { return line_; }
  // Unparsed input that triggered the error (LLM responses keep theirs here).
  const std::string& raw() const { return raw_; }

 private:
  std::size_t line_;
  std::string raw_;
};

class DuplicateIdError : public ValidationError {
 public:
  explicit DuplicateIdError(std::string id)
      : ValidationError("duplicate document id \"" + id + "\""), id_(std::move(id)) {}
  const std::string& id() const { return id_; }

 private:
  std::string id_;
};

class LookupError : public Error {
 public:
  using Error::Error;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

// No unlabeled documents remain for selection.
class ExhaustedError : public Error {
 public:
  using Error::Error;
};

// Classifier has no classes yet.
class EmptyModelError : public Error {
 public:
  using Error::Error;
};

class UndefinedAlphaError : public Error {
 public:
  using Error::Error;
};

class ConnectivityError : public ValidationError {
 public:
  ConnectivityError(const std::string& what, std::vector<std::vector<std::string>> components)
      : ValidationError(what), components_(std::move(components)) {}
  const std::vector<std::vector<std::string>>& components() const { return components_; }

 private:
  std::vector<std::vector<std::string>> components_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class BackendError : public Error {
 public:
  using Error::Error;
};

class TimeoutError : public BackendError {
 public:
  using BackendError::BackendError;
};

}  // namespace bass
