#pragma once

#include <stdexcept>
#include <string>

namespace equivoq {

// Bad shapes, invalid distributions, overlapping axes and similar caller errors.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The problem instance admits no feasible point (D below d_min, empty feasible set,
// no code meeting the distortion constraint).
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An enumeration would exceed its point budget. Raised before any work starts.
class ResourceError : public std::runtime_error {
 public:
  ResourceError(const std::string& what, double count)
      : std::runtime_error(what), count_(count) {}
  double count() const noexcept { return count_; }

 private:
  double count_;
};

// Iterative solver ran out of iterations. Carries the last iterate.
template <typename Iterate>
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, Iterate last)
      : std::runtime_error(what), last_(std::move(last)) {}
  const Iterate& last_iterate() const noexcept { return last_; }

 private:
  Iterate last_;
};

}  // namespace equivoq
