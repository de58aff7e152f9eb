#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "igac/core.hpp"
#include "igac/hyperdual.hpp"
#include "igac/quadrature.hpp"

namespace igac {

// Closed-form metric g(theta) written once as a generic function and exposed
// both for plain doubles and for hyper-dual numbers (exact derivatives).
struct ClosedFormMetric {
  std::function<Matrix(const Vector&)> value;
  std::function<std::vector<HyperDual>(const std::vector<HyperDual>&)> hyperdual;  // row-major n*n
};

template <class F>
ClosedFormMetric make_closed_form(int dim, F f) {
  ClosedFormMetric m;
  m.value = [dim, f](const Vector& x) {
    std::vector<double> xs(x.data(), x.data() + x.size());
    const std::vector<double> g = f(xs);
    Matrix out(dim, dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) out(i, j) = g[i * dim + j];
    return out;
  };
  m.hyperdual = [f](const std::vector<HyperDual>& x) { return f(x); };
  return m;
}

class DensityFamily;
using FamilyPtr = std::shared_ptr<const DensityFamily>;

/// Independent sub-distribution of a product family: its own family acting on a
/// subset of the chart coordinates and a subset of the microvariables.
struct Factor {
  FamilyPtr family;
  std::vector<int> chart_indices;
  std::vector<int> sample_indices;
};

// A parametric probability family p(x | theta). Parameters are passed
// explicitly; the family object carries only structural constants.
class DensityFamily {
 public:
  virtual ~DensityFamily() = default;

  virtual std::string name() const = 0;
  virtual int chart_dim() const = 0;
  virtual int sample_dim() const = 0;
  virtual Domain domain() const = 0;

  /// Natural log of the density; -infinity outside the support.
  virtual double log_density(const ParamPoint& params, const Vector& x) const = 0;
  /// Gradient of log_density with respect to the chart coordinates.
  virtual Vector score(const ParamPoint& params, const Vector& x) const = 0;
  /// One draw from p(. | params).
  virtual Vector draw(const ParamPoint& params, std::mt19937_64& rng) const = 0;
  /// Truncated box carrying all but a negligible (< 1e-30) part of the mass.
  virtual std::vector<Interval> integration_box(const ParamPoint& params) const = 0;

  virtual std::vector<Factor> factors() const { return {}; }
  virtual std::optional<ClosedFormMetric> closed_form_metric() const { return std::nullopt; }

  /// Batch sampling with an explicit seed. Deterministic for a given seed.
  std::vector<Vector> sample(const ParamPoint& params, std::uint64_t seed, std::size_t count) const;

  double density(const ParamPoint& params, const Vector& x) const;
  void require_domain(const ParamPoint& params) const;
};

/// Convenience pairing of a family with a concrete parameter point.
struct ModelInstance {
  FamilyPtr family;
  ParamPoint params;
};

// ---------------------------------------------------------------------------
// Built-in families

/// Product of independent univariate Gaussians; chart (mu_1, sigma_1, mu_2, sigma_2, ...).
FamilyPtr gaussian_product_family(int blocks);
/// Bivariate Gaussian with fixed correlation r; chart (mu_x, sigma_x, mu_y, sigma_y).
FamilyPtr correlated_gaussian_family(double r);
FamilyPtr exponential_family();
/// Weibull with chart (lambda_scale, shape_n).
FamilyPtr weibull_family();
FamilyPtr wigner_dyson_family();
/// Poisson spacing x exponential field bath; chart (mu_A, mu_B).
FamilyPtr integrable_composite_family();
/// Wigner-Dyson spacing x Gaussian field bath; chart (mu_A', mu_B', sigma_B').
FamilyPtr chaotic_composite_family();
/// Uniform density on a box; zero-dimensional chart. Default entropy reference.
FamilyPtr uniform_family(std::vector<Interval> box);

struct GaussianProductModel {
  int l = 1;
  std::vector<double> means;  // 3l entries
  std::vector<double> stds;   // 3l entries
  ModelInstance instance() const;
};

struct CorrelatedGaussianModel {
  double mu_x = 0.0;
  double mu_y = 0.0;
  double sigma_x = 1.0;
  double sigma_y = 1.0;
  double r = 0.0;
  ModelInstance instance() const;
};

struct ExponentialModel {
  double theta = 1.0;
  ModelInstance instance() const;
};

struct WeibullModel {
  double lambda_scale = 1.0;
  double shape_n = 2.0;
  ModelInstance instance() const;
};

struct WignerDysonModel {
  double phi = 1.0;
  ModelInstance instance() const;
};

struct IntegrableComposite {
  double mu_A = 1.0;
  double mu_B = 1.0;
  ModelInstance instance() const;
};

struct ChaoticComposite {
  double mu_A_p = 1.0;
  double mu_B_p = 0.0;
  double sigma_B_p = 1.0;
  ModelInstance instance() const;
};

// ---------------------------------------------------------------------------
// Change of variables

/// Strictly monotone map of a single microvariable.
struct MonotoneMap {
  std::function<double(double)> forward;
  std::function<double(double)> inverse;
  std::function<double(double)> derivative;
  Interval domain;
  Interval codomain;

  static MonotoneMap identity();
  /// y = (x / zeta)^(1/n) on x > 0.
  static MonotoneMap power_law(double zeta, double n);
};

/// Density of y = f(x): p_new(y) = p_old(f^-1(y)) / |f'(f^-1(y))|. The returned
/// family shares the chart of the base family. Throws UnsupportedError when the
/// map is not invertible on the base support.
FamilyPtr pushforward(const FamilyPtr& family, const ParamPoint& params, const MonotoneMap& map);

// ---------------------------------------------------------------------------
// Integral functionals

struct NormalizationReport {
  double integral = 0.0;
  double error = 0.0;
  Vector mean;  // per microvariable
  Vector std;   // per microvariable, sqrt of the second central moment
};

NormalizationReport normalization_integral(const DensityFamily& family, const ParamPoint& params,
                                           const QuadratureSpec& quadrature = {});

/// S = -integral p log(p / m). Zero iff p = m almost everywhere.
double relative_entropy(const DensityFamily& p_family, const ParamPoint& p_params, const DensityFamily& m_family,
                        const ParamPoint& m_params, const QuadratureSpec& quadrature = {});

/// Relative entropy against the uniform reference on the family's integration box.
double relative_entropy(const DensityFamily& p_family, const ParamPoint& p_params,
                        const QuadratureSpec& quadrature = {});

/// Expectation of a vector function of the microstate under p, by quadrature.
/// Product families with more than two microvariables must be handled per factor.
QuadratureResult expectation(const DensityFamily& family, const ParamPoint& params,
                             const std::function<Vector(const Vector&)>& f, const QuadratureSpec& quadrature = {});

}  // namespace igac
