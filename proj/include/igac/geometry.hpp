#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "igac/core.hpp"
#include "igac/models.hpp"
#include "igac/quadrature.hpp"

namespace igac {

// Dense rank-3 and rank-4 arrays over a chart of dimension n.
class Tensor3 {
 public:
  Tensor3() = default;
  explicit Tensor3(int n) : n_(n), data_(static_cast<std::size_t>(n) * n * n, 0.0) {}
  int dim() const noexcept { return n_; }
  double& operator()(int a, int b, int c) { return data_[(a * n_ + b) * n_ + c]; }
  double operator()(int a, int b, int c) const { return data_[(a * n_ + b) * n_ + c]; }
  double max_abs() const;

 private:
  int n_ = 0;
  std::vector<double> data_;
};

class Tensor4 {
 public:
  Tensor4() = default;
  explicit Tensor4(int n) : n_(n), data_(static_cast<std::size_t>(n) * n * n * n, 0.0) {}
  int dim() const noexcept { return n_; }
  double& operator()(int a, int b, int c, int d) { return data_[((a * n_ + b) * n_ + c) * n_ + d]; }
  double operator()(int a, int b, int c, int d) const { return data_[((a * n_ + b) * n_ + c) * n_ + d]; }
  double max_abs() const;

 private:
  int n_ = 0;
  std::vector<double> data_;
};

struct MetricValue {
  ParamPoint point;
  Matrix matrix;  // g_{mu nu}
};

enum class Provenance { Analytic, Quadrature, Pullback, Explicit };
std::string to_string(Provenance p);

/// First and second coordinate derivatives of the metric components:
/// first[k] = d_k g, second[k][l] = d_k d_l g (empty when not requested).
struct MetricDerivatives {
  std::vector<Matrix> first;
  std::vector<std::vector<Matrix>> second;
};

// A Riemannian metric on an open box of R^n. Fields built from closed forms
// also carry exact derivatives; all others fall back to finite differences.
class MetricField {
 public:
  using Evaluator = std::function<Matrix(const Vector&)>;
  using DerivativeEvaluator = std::function<MetricDerivatives(const Vector&, bool with_second)>;

  MetricField(int chart_dim, Evaluator evaluator, Domain domain, Provenance provenance, std::string label,
              DerivativeEvaluator exact_derivatives = {});

  int chart_dim() const noexcept { return dim_; }
  const Domain& domain() const noexcept { return domain_; }
  Provenance provenance() const noexcept { return provenance_; }
  const std::string& label() const noexcept { return label_; }
  bool has_exact_derivatives() const noexcept { return static_cast<bool>(exact_); }

  Matrix matrix(const Vector& x) const;
  MetricValue evaluate(const ParamPoint& p) const;
  MetricDerivatives exact_derivatives(const Vector& x, bool with_second) const;

 private:
  int dim_;
  Evaluator eval_;
  Domain domain_;
  Provenance provenance_;
  std::string label_;
  DerivativeEvaluator exact_;
};

struct FdStepPolicy {
  double relative_step = 1e-5;       // h = relative_step * max(1, |x|)
  double christoffel_factor = 10.0;  // step for derivatives of Gamma is factor * h
  double boundary_guard = 1e-6;      // refuse FD stencils this close to a domain boundary
  bool use_exact = true;             // prefer exact derivatives when the field has them
};

struct ChristoffelValue {
  ParamPoint point;
  Tensor3 gamma;  // gamma(rho, mu, nu) = Gamma^rho_{mu nu}
};

/// Connection together with its coordinate derivatives:
/// dgamma(nu, rho, mu, sigma) = d_nu Gamma^rho_{mu sigma}.
struct ConnectionJet {
  Matrix metric;
  Matrix inverse;
  Tensor3 gamma;
  Tensor4 dgamma;
};

struct CurvatureBundle {
  ParamPoint point;
  Matrix metric;
  Tensor4 riemann;        // R^a_{b r s}
  Tensor4 riemann_lower;  // R_{m n r s} = g_{m a} R^a_{n r s}
  Matrix ricci;           // R_{m n} = R^a_{m a n}
  double scalar = 0.0;    // g^{m n} R_{m n}
  Tensor4 weyl_projective;
};

// Factories ----------------------------------------------------------------

/// Fisher-Rao metric by quadrature: g = E[score score^T].
MetricValue fisher_metric(const DensityFamily& family, const ParamPoint& params, const QuadratureSpec& quadrature = {});

/// Field whose evaluator is the family's closed-form metric; exact derivatives
/// come from hyper-dual evaluation. Throws UnsupportedError without a closed form.
MetricField analytic_metric(const FamilyPtr& family);
MetricField quadrature_metric(const FamilyPtr& family, const QuadratureSpec& quadrature = {});
MetricField explicit_metric(int chart_dim, MetricField::Evaluator evaluator, Domain domain, std::string label);
MetricField euclidean_metric(int chart_dim);

/// Coordinate change theta = map(theta_hat) with Jacobian d theta / d theta_hat.
struct Reparametrization {
  int dim = 0;
  std::function<Vector(const Vector&)> map;
  std::function<Matrix(const Vector&)> jacobian;
  Domain domain;  // domain of the new coordinates
};

/// g_hat(theta_hat) = J^T g(theta(theta_hat)) J.
MetricField pullback_metric(const MetricField& base, const Reparametrization& reparam);

// Curvature stack -----------------------------------------------------------

Matrix inverse_metric(const Matrix& g);

MetricDerivatives metric_derivatives(const MetricField& field, const Vector& x, bool with_second,
                                     const FdStepPolicy& policy = {});

ChristoffelValue christoffel(const MetricField& field, const ParamPoint& point, const FdStepPolicy& policy = {});

/// Gamma and d Gamma at a point. Used by curvature and by the Jacobi integrator.
ConnectionJet connection_jet(const MetricField& field, const Vector& x, const FdStepPolicy& policy = {});

/// Riemann tensor from a connection jet in the convention
/// R^a_{brs} = d_r G^a_{bs} - d_s G^a_{br} + G^a_{rl} G^l_{sb} - G^a_{sl} G^l_{rb}.
Tensor4 riemann_from_jet(const ConnectionJet& jet);

CurvatureBundle curvature(const MetricField& field, const ParamPoint& point, const FdStepPolicy& policy = {});

/// Sectional curvature of the plane spanned by a and b.
double sectional_curvature(const CurvatureBundle& bundle, const Vector& a, const Vector& b);
double sectional_curvature(const MetricField& field, const ParamPoint& point, const Vector& a, const Vector& b,
                           const FdStepPolicy& policy = {});

/// Symmetrized covariant derivative D_m K_n + D_n K_m of the vector field with
/// contravariant components k_field(x); zero iff K is a Killing field.
Matrix killing_residual(const MetricField& field, const ParamPoint& point,
                        const std::function<Vector(const Vector&)>& k_field, const FdStepPolicy& policy = {});

}  // namespace igac
