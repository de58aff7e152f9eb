#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace igac {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr const char* kVersion = "1.0.0";

// Error taxonomy. Every failure surfaced by the toolkit derives from Error so
// front ends can map categories onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parameters or inputs outside the declared domain of a family or field.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Quadrature, factorization or integration failure.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Requested operation has no meaning for the given object.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// Adaptive quadrature did not reach the requested tolerance.
class QuadratureError : public NumericalError {
 public:
  QuadratureError(const std::string& what, double achieved)
      : NumericalError(what + " (achieved error estimate " + std::to_string(achieved) + ")"), achieved_(achieved) {}
  double achieved() const noexcept { return achieved_; }

 private:
  double achieved_;
};

/// Metric not positive definite / not invertible at a point.
class SingularMetricError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Geodesic or Jacobi integration left the metric domain.
class TruncationError : public NumericalError {
 public:
  TruncationError(const std::string& what, double last_tau)
      : NumericalError(what + " (last valid tau " + std::to_string(last_tau) + ")"), last_tau_(last_tau) {}
  double last_valid_tau() const noexcept { return last_tau_; }

 private:
  double last_tau_;
};

/// Adaptive step size fell below the minimum admissible step.
class StiffnessError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// A point of a coordinate chart: the values of the macrovariables.
class ParamPoint {
 public:
  ParamPoint() = default;
  explicit ParamPoint(Vector coords) : coords_(std::move(coords)) { check(); }
  ParamPoint(std::initializer_list<double> coords)
      : coords_(Eigen::Map<const Vector>(coords.begin(), static_cast<Eigen::Index>(coords.size()))) {
    check();
  }
  explicit ParamPoint(std::span<const double> coords)
      : coords_(Eigen::Map<const Vector>(coords.data(), static_cast<Eigen::Index>(coords.size()))) {
    check();
  }

  int chart_dim() const noexcept { return static_cast<int>(coords_.size()); }
  const Vector& coords() const noexcept { return coords_; }
  double operator[](int i) const { return coords_[i]; }

  ParamPoint with(int i, double value) const {
    Vector c = coords_;
    c[i] = value;
    return ParamPoint(std::move(c));
  }

 private:
  void check() const {
    for (Eigen::Index i = 0; i < coords_.size(); ++i)
      if (!std::isfinite(coords_[i])) throw DomainError("ParamPoint: non-finite coordinate");
  }

  Vector coords_;
};

/// Closed or open bounds for one chart coordinate. Infinite bounds are allowed.
struct Interval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();

  bool contains(double x) const noexcept { return x > lo && x < hi; }
  double distance_to_boundary(double x) const noexcept { return std::min(x - lo, hi - x); }
};

/// Axis-aligned open box used as the domain of every chart in the toolkit.
struct Domain {
  std::vector<Interval> bounds;

  static Domain unbounded(int dim) { return Domain{std::vector<Interval>(dim)}; }

  int dim() const noexcept { return static_cast<int>(bounds.size()); }
  bool contains(const Vector& x) const {
    if (x.size() != dim()) return false;
    for (int i = 0; i < dim(); ++i)
      if (!bounds[i].contains(x[i])) return false;
    return true;
  }
  double distance_to_boundary(const Vector& x) const {
    double d = std::numeric_limits<double>::infinity();
    for (int i = 0; i < dim(); ++i) d = std::min(d, bounds[i].distance_to_boundary(x[i]));
    return d;
  }
};

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace igac
