#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace mmshape {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Mesh connectivity violates a structural requirement (non-manifold edge, open loop, ...).
class TopologyError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

class UnsupportedVersion : public ParseError {
 public:
  using ParseError::ParseError;
};

/// Geometry outside what the cut engine handles (non-convex footprint, ...).
class UnsupportedGeometry : public Error {
 public:
  using Error::Error;
};

/// Overlapping footprints, halo violations and similar multimesh layout problems.
class UnsupportedConfiguration : public Error {
 public:
  using Error::Error;
};

class ConsistencyError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  SolverError(const std::string& what, double residual)
      : Error(what + " (relative residual " + format(residual) + ")"), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  static std::string format(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
  }
  double residual_;
};

/// A design update produced an inverted or degenerate cell; callers shrink the step.
class InvalidStep : public Error {
 public:
  using Error::Error;
};

class LineSearchFailure : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace mmshape
