#pragma once

#include <stdexcept>
#include <string>

namespace solitonscope {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad arguments: out-of-range parameters, incompatible grids, unknown keys.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Time integration failed (blow-up, non-finite values, Picard stall).
class SolverError : public Error {
 public:
  SolverError(const std::string& what, long step, double time)
      : Error(what), step_(step), time_(time) {}

  long step() const noexcept { return step_; }
  double time() const noexcept { return time_; }

 private:
  long step_;
  double time_;
};

/// Phase lifting failed because adjacent samples are too far apart.
class UnderResolvedPhase : public Error {
 public:
  UnderResolvedPhase(const std::string& what, std::size_t time_index,
                     std::size_t node_index)
      : Error(what), time_index_(time_index), node_index_(node_index) {}

  std::size_t time_index() const noexcept { return time_index_; }
  std::size_t node_index() const noexcept { return node_index_; }

 private:
  std::size_t time_index_;
  std::size_t node_index_;
};

/// Shooting could not bracket a ground state.
class BracketError : public Error {
 public:
  using Error::Error;
};

}  // namespace solitonscope
