#pragma once

#include <stdexcept>
#include <string>
#include <vector>
#include <complex>

namespace dyson {

// Base for every error raised by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ValidationError : Error {
  std::string field;
  ValidationError(std::string field_path, const std::string& what)
      : Error(field_path + ": " + what), field(std::move(field_path)) {}
};

struct PoleError : Error {
  double location;
  PoleError(double loc, const std::string& what) : Error(what), location(loc) {}
};

struct RangeError : Error {
  std::size_t index;
  double value;
  RangeError(std::size_t i, double v, const std::string& what)
      : Error(what), index(i), value(v) {}
};

struct StepUnderflowError : Error {
  double time;
  double dt;
  StepUnderflowError(double t, double h, const std::string& what)
      : Error(what), time(t), dt(h) {}
};

struct RootFindError : Error {
  std::vector<std::complex<double>> candidates;
  RootFindError(std::vector<std::complex<double>> roots, const std::string& what)
      : Error(what), candidates(std::move(roots)) {}
};

struct ExtrapolationError : Error {
  double last;
  double previous;
  ExtrapolationError(double a, double b, const std::string& what)
      : Error(what), last(a), previous(b) {}
};

struct QuadratureError : Error {
  double last;
  double previous;
  QuadratureError(double a, double b, const std::string& what)
      : Error(what), last(a), previous(b) {}
};

struct DomainTooSmallError : Error {
  using Error::Error;
};

struct ResolutionError : Error {
  using Error::Error;
};

}  // namespace dyson
