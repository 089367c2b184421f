#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace textailor {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class MissingUvError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class NonFiniteError : public Error {
 public:
  using Error::Error;
};

/// Base of every failure raised by a denoiser backend.
class BackendError : public Error {
 public:
  using Error::Error;
};

class ConnectionError : public BackendError {
 public:
  using BackendError::BackendError;
};

class ProtocolError : public BackendError {
 public:
  using BackendError::BackendError;
};

class VersionMismatchError : public ProtocolError {
 public:
  using ProtocolError::ProtocolError;
};

class ResponseShapeError : public ProtocolError {
 public:
  using ProtocolError::ProtocolError;
};

class PipelineError : public Error {
 public:
  using Error::Error;
};

}  // namespace textailor
