#pragma once

#include <functional>
#include <vector>

#include "igac/core.hpp"

namespace igac {

struct QuadratureSpec {
  double rel_tol = 1e-10;
  double abs_tol = 1e-13;
  int max_subdivisions = 4000;
};

struct QuadratureResult {
  Vector value;
  double error = 0.0;  // infinity-norm error estimate
  int evaluations = 0;
};

using VectorIntegrand = std::function<Vector(double)>;
using ScalarIntegrand = std::function<double(double)>;

/// Globally adaptive 15-point Gauss-Kronrod on a finite interval for a
/// vector-valued integrand; converges when the summed error estimate is below
/// max(abs_tol, rel_tol * |I|_inf). Throws QuadratureError otherwise.
QuadratureResult integrate(const VectorIntegrand& f, double a, double b, const QuadratureSpec& spec = {});

double integrate(const ScalarIntegrand& f, double a, double b, const QuadratureSpec& spec = {});

/// Tensor-product integration over a box by nesting the 1-D rule; the inner
/// integrals are solved to a tolerance ten times tighter than the outer one.
QuadratureResult integrate_box(const std::function<Vector(const Vector&)>& f, const std::vector<Interval>& box,
                               const QuadratureSpec& spec = {});

}  // namespace igac
