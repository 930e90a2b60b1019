#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dlo {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument does not hold.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Malformed on-disk data; carries the byte offset where parsing stopped.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t offset)
      : Error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// An image without any positive pixel was given where one is required.
class EmptyInputError : public Error {
 public:
  using Error::Error;
};

/// The skeleton does not have a usable pair of ends.
class AmbiguityError : public Error {
 public:
  explicit AmbiguityError(int endpoint_count)
      : Error("ambiguous skeleton: " + std::to_string(endpoint_count) + " endpoints"),
        endpoint_count_(endpoint_count) {}
  int endpoint_count() const noexcept { return endpoint_count_; }

 private:
  int endpoint_count_;
};

class ReachabilityError : public Error {
 public:
  using Error::Error;
};

class CollisionError : public Error {
 public:
  using Error::Error;
};

/// The goal cannot be evaluated against a contact (no goal point in its search annulus).
class InfeasibleGoalError : public Error {
 public:
  explicit InfeasibleGoalError(std::size_t contact)
      : Error("goal curve has no point in the search annulus of contact " +
              std::to_string(contact + 1)),
        contact_(contact) {}
  std::size_t contact() const noexcept { return contact_; }

 private:
  std::size_t contact_;
};

/// No feasible grasp/motion exists for the requested primitive.
class PlanningInfeasibleError : public Error {
 public:
  using Error::Error;
};

class DegenerateDirectionError : public Error {
 public:
  using Error::Error;
};

}  // namespace dlo
