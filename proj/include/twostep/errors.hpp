#pragma once

#include <stdexcept>
#include <string>

namespace twostep {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A cell centroid was not matched by any region predicate.
class UncoveredRegion : public Error {
 public:
  UncoveredRegion(std::size_t cell, const std::string& what) : Error(what), cell_(cell) {}
  std::size_t cell() const noexcept { return cell_; }

 private:
  std::size_t cell_;
};

class UnknownLabel : public Error {
 public:
  using Error::Error;
};

/// The edge graph or the constrained boundary is not connected; the gauge needs both.
class UnsupportedTopology : public Error {
 public:
  using Error::Error;
};

class SingularMatrix : public Error {
 public:
  SingularMatrix(double min_pivot, const std::string& what) : Error(what), min_pivot_(min_pivot) {}
  double min_pivot() const noexcept { return min_pivot_; }

 private:
  double min_pivot_;
};

/// Conductor component with no scalar Dirichlet node: the static current flow block is singular.
class StaticSingularity : public Error {
 public:
  StaticSingularity(int component, const std::string& what) : Error(what), component_(component) {}
  int component() const noexcept { return component_; }

 private:
  int component_;
};

class ConfigError : public Error {
 public:
  ConfigError(int line, const std::string& what)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace twostep
