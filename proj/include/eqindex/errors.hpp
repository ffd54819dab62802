#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace eqindex {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input: malformed spec, mismatched truncations, non-symmetric matrix.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// A mathematical identity that must hold did not (CLI exit status 2).
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

/// No admissible band gap exists around the offending eigenvalue.
class SplitError : public Error {
 public:
  SplitError(const std::string& what, double eigenvalue)
      : Error(what), eigenvalue_(eigenvalue) {}
  double eigenvalue() const noexcept { return eigenvalue_; }

 private:
  double eigenvalue_;
};

/// Projections moved too far for the subspace-aligning map to exist.
class AlignmentError : public Error {
 public:
  AlignmentError(const std::string& what, double max_distance)
      : Error(what), max_distance_(max_distance) {}
  double max_distance() const noexcept { return max_distance_; }

 private:
  double max_distance_;
};

/// The field vanishes (or nearly) on the boundary of a region.
class BoundaryZeroError : public Error {
 public:
  BoundaryZeroError(const std::string& what, std::vector<double> location)
      : Error(what), location_(std::move(location)) {}
  const std::vector<double>& location() const noexcept { return location_; }

 private:
  std::vector<double> location_;
};

/// A located zero has a (numerically) singular Jacobian.
class DegenerateZeroError : public Error {
 public:
  DegenerateZeroError(const std::string& what, std::vector<double> location)
      : Error(what), location_(std::move(location)) {}
  const std::vector<double>& location() const noexcept { return location_; }

 private:
  std::vector<double> location_;
};

/// Residual of the quadratic manifold decays slower than cubically.
class OrderCheckFailure : public ConsistencyError {
 public:
  struct Row {
    double radius;
    double residual;
  };
  OrderCheckFailure(const std::string& what, double slope, std::vector<Row> table)
      : ConsistencyError(what), slope_(slope), table_(std::move(table)) {}
  double slope() const noexcept { return slope_; }
  const std::vector<Row>& table() const noexcept { return table_; }

 private:
  double slope_;
  std::vector<Row> table_;
};

/// A theorem guarantees an equilibrium but none was located.
class ConfirmationFailure : public ConsistencyError {
 public:
  using ConsistencyError::ConsistencyError;
};

}  // namespace eqindex
