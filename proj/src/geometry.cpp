#include "igac/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace igac {
namespace {

double fd_step(const FdStepPolicy& policy, double x) { return policy.relative_step * std::max(1.0, std::abs(x)); }

void require_interior(const MetricField& field, const Vector& x) {
  if (x.size() != field.chart_dim()) throw DomainError(field.label() + ": point has wrong dimension");
  if (!field.domain().contains(x)) throw DomainError(field.label() + ": point outside metric domain");
}

// FD stencils must stay in the domain and away from its boundary.
void require_stencil(const MetricField& field, const Vector& x, double reach, const FdStepPolicy& policy) {
  require_interior(field, x);
  for (int i = 0; i < x.size(); ++i) {
    const Interval& iv = field.domain().bounds[i];
    if (iv.distance_to_boundary(x[i]) < policy.boundary_guard)
      throw DomainError(field.label() + ": point within boundary guard of the domain edge");
    if (!iv.contains(x[i] - reach * std::max(1.0, std::abs(x[i]))) ||
        !iv.contains(x[i] + reach * std::max(1.0, std::abs(x[i]))))
      throw DomainError(field.label() + ": finite-difference stencil leaves the domain");
  }
}

std::vector<Matrix> fd_first(const MetricField& field, const Vector& x, const FdStepPolicy& policy) {
  const int n = field.chart_dim();
  std::vector<Matrix> d(n);
  for (int k = 0; k < n; ++k) {
    const double h = fd_step(policy, x[k]);
    Vector xp = x, xm = x;
    xp[k] += h;
    xm[k] -= h;
    d[k] = (field.matrix(xp) - field.matrix(xm)) / (2.0 * h);
  }
  return d;
}

Tensor3 gamma_from(const Matrix& ginv, const std::vector<Matrix>& dg) {
  const int n = static_cast<int>(ginv.rows());
  Tensor3 gamma(n);
  for (int r = 0; r < n; ++r)
    for (int m = 0; m < n; ++m)
      for (int v = m; v < n; ++v) {
        double acc = 0.0;
        for (int s = 0; s < n; ++s) acc += ginv(r, s) * (dg[m](s, v) + dg[v](m, s) - dg[s](m, v));
        gamma(r, m, v) = gamma(r, v, m) = 0.5 * acc;
      }
  return gamma;
}

}  // namespace

double Tensor3::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

double Tensor4::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::Analytic:
      return "analytic";
    case Provenance::Quadrature:
      return "quadrature";
    case Provenance::Pullback:
      return "pullback";
    case Provenance::Explicit:
      return "explicit";
  }
  return "unknown";
}

MetricField::MetricField(int chart_dim, Evaluator evaluator, Domain domain, Provenance provenance, std::string label,
                         DerivativeEvaluator exact_derivatives)
    : dim_(chart_dim),
      eval_(std::move(evaluator)),
      domain_(std::move(domain)),
      provenance_(provenance),
      label_(std::move(label)),
      exact_(std::move(exact_derivatives)) {
  if (dim_ < 1) throw DomainError("metric field: chart dimension must be positive");
  if (domain_.dim() != dim_) throw DomainError("metric field: domain dimension mismatch");
}

Matrix MetricField::matrix(const Vector& x) const {
  if (x.size() != dim_) throw DomainError(label_ + ": point has wrong dimension");
  if (!domain_.contains(x)) throw DomainError(label_ + ": point outside metric domain");
  Matrix g = eval_(x);
  if (g.rows() != dim_ || g.cols() != dim_) throw NumericalError(label_ + ": evaluator returned wrong shape");
  return g;
}

MetricValue MetricField::evaluate(const ParamPoint& p) const { return MetricValue{p, matrix(p.coords())}; }

MetricDerivatives MetricField::exact_derivatives(const Vector& x, bool with_second) const {
  if (!exact_) throw UnsupportedError(label_ + ": no exact derivatives");
  require_interior(*this, x);
  return exact_(x, with_second);
}

// ---------------------------------------------------------------------------

MetricValue fisher_metric(const DensityFamily& family, const ParamPoint& params, const QuadratureSpec& quadrature) {
  family.require_domain(params);
  const int n = family.chart_dim();
  Matrix g = Matrix::Zero(n, n);

  if (family.sample_dim() > 2) {
    const auto parts = family.factors();
    if (parts.empty()) throw UnsupportedError(family.name() + ": no factorization for Fisher quadrature");
    // Independent factors have zero-mean scores, so cross blocks vanish.
    for (const auto& part : parts) {
      Vector sub(part.chart_indices.size());
      for (std::size_t i = 0; i < part.chart_indices.size(); ++i) sub[i] = params[part.chart_indices[i]];
      const Matrix block = fisher_metric(*part.family, ParamPoint(sub), quadrature).matrix;
      for (std::size_t i = 0; i < part.chart_indices.size(); ++i)
        for (std::size_t j = 0; j < part.chart_indices.size(); ++j)
          g(part.chart_indices[i], part.chart_indices[j]) = block(i, j);
    }
  } else {
    const auto r = expectation(
        family, params,
        [&](const Vector& x) {
          const Vector s = family.score(params, x);
          Vector outer(n * (n + 1) / 2);
          int k = 0;
          for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) outer[k++] = s[i] * s[j];
          return outer;
        },
        quadrature);
    int k = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) g(i, j) = g(j, i) = r.value[k++];
  }

  Eigen::LLT<Matrix> llt(g);
  if (llt.info() != Eigen::Success) throw NumericalError(family.name() + ": Fisher metric is not positive definite");
  return MetricValue{params, g};
}

MetricField analytic_metric(const FamilyPtr& family) {
  const auto closed = family->closed_form_metric();
  if (!closed) throw UnsupportedError(family->name() + ": no closed-form metric");
  const int n = family->chart_dim();
  auto hd = closed->hyperdual;

  auto derivs = [n, hd](const Vector& x, bool with_second) {
    MetricDerivatives d;
    d.first.assign(n, Matrix::Zero(n, n));
    if (with_second) d.second.assign(n, std::vector<Matrix>(n, Matrix::Zero(n, n)));
    std::vector<HyperDual> seed(n);
    for (int k = 0; k < n; ++k) {
      for (int l = with_second ? k : k; l < (with_second ? n : k + 1); ++l) {
        for (int i = 0; i < n; ++i) seed[i] = HyperDual(x[i]);
        seed[k].b = 1.0;
        seed[l].c = 1.0;
        const auto g = hd(seed);
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) {
            const HyperDual& e = g[i * n + j];
            if (l == k) d.first[k](i, j) = e.b;
            if (with_second) d.second[k][l](i, j) = d.second[l][k](i, j) = e.d;
          }
      }
    }
    return d;
  };
  return MetricField(n, closed->value, family->domain(), Provenance::Analytic, family->name(), derivs);
}

MetricField quadrature_metric(const FamilyPtr& family, const QuadratureSpec& quadrature) {
  return MetricField(
      family->chart_dim(),
      [family, quadrature](const Vector& x) { return fisher_metric(*family, ParamPoint(x), quadrature).matrix; },
      family->domain(), Provenance::Quadrature, family->name() + "/quadrature");
}

MetricField explicit_metric(int chart_dim, MetricField::Evaluator evaluator, Domain domain, std::string label) {
  return MetricField(chart_dim, std::move(evaluator), std::move(domain), Provenance::Explicit, std::move(label));
}

MetricField euclidean_metric(int chart_dim) {
  return explicit_metric(
      chart_dim, [chart_dim](const Vector&) { return Matrix(Matrix::Identity(chart_dim, chart_dim)); },
      Domain::unbounded(chart_dim), "euclidean");
}

MetricField pullback_metric(const MetricField& base, const Reparametrization& reparam) {
  if (reparam.dim != base.chart_dim()) throw DomainError("pullback: reparametrization dimension mismatch");
  if (reparam.domain.dim() != reparam.dim) throw DomainError("pullback: domain dimension mismatch");
  auto eval = [base, reparam](const Vector& x_hat) {
    const Matrix jac = reparam.jacobian(x_hat);
    const double scale = std::max(1.0, jac.cwiseAbs().maxCoeff());
    if (std::abs(jac.determinant()) < 1e-14 * std::pow(scale, jac.rows()))
      throw SingularMetricError("pullback: singular Jacobian");
    return Matrix(jac.transpose() * base.matrix(reparam.map(x_hat)) * jac);
  };
  return MetricField(reparam.dim, eval, reparam.domain, Provenance::Pullback, "pullback(" + base.label() + ")");
}

// ---------------------------------------------------------------------------

Matrix inverse_metric(const Matrix& g) {
  Eigen::LLT<Matrix> llt(g);
  if (llt.info() != Eigen::Success) throw SingularMetricError("metric is not positive definite");
  Matrix inv = llt.solve(Matrix::Identity(g.rows(), g.cols()));
  if (!inv.allFinite()) throw SingularMetricError("metric inverse is not finite");
  return inv;
}

MetricDerivatives metric_derivatives(const MetricField& field, const Vector& x, bool with_second,
                                     const FdStepPolicy& policy) {
  if (policy.use_exact && field.has_exact_derivatives()) return field.exact_derivatives(x, with_second);
  const int n = field.chart_dim();
  MetricDerivatives d;
  require_stencil(field, x, policy.relative_step * (with_second ? 2.0 : 1.0), policy);
  d.first = fd_first(field, x, policy);
  if (with_second) {
    d.second.assign(n, std::vector<Matrix>(n));
    for (int k = 0; k < n; ++k) {
      const double hk = fd_step(policy, x[k]);
      for (int l = k; l < n; ++l) {
        const double hl = fd_step(policy, x[l]);
        auto at = [&](double sk, double sl) {
          Vector y = x;
          y[k] += sk;
          y[l] += sl;
          return field.matrix(y);
        };
        Matrix m;
        if (k == l)
          m = (at(hk, 0) - 2.0 * field.matrix(x) + at(-hk, 0)) / (hk * hk);
        else
          m = (at(hk, hl) - at(hk, -hl) - at(-hk, hl) + at(-hk, -hl)) / (4.0 * hk * hl);
        d.second[k][l] = d.second[l][k] = m;
      }
    }
  }
  return d;
}

ChristoffelValue christoffel(const MetricField& field, const ParamPoint& point, const FdStepPolicy& policy) {
  const Vector& x = point.coords();
  require_interior(field, x);
  const Matrix ginv = inverse_metric(field.matrix(x));
  return ChristoffelValue{point, gamma_from(ginv, metric_derivatives(field, x, false, policy).first)};
}

ConnectionJet connection_jet(const MetricField& field, const Vector& x, const FdStepPolicy& policy) {
  require_interior(field, x);
  const int n = field.chart_dim();
  ConnectionJet jet;
  jet.metric = field.matrix(x);
  jet.inverse = inverse_metric(jet.metric);
  jet.dgamma = Tensor4(n);

  if (policy.use_exact && field.has_exact_derivatives()) {
    const MetricDerivatives d = field.exact_derivatives(x, true);
    jet.gamma = gamma_from(jet.inverse, d.first);
    for (int v = 0; v < n; ++v) {
      const Matrix dinv = -jet.inverse * d.first[v] * jet.inverse;
      for (int r = 0; r < n; ++r)
        for (int m = 0; m < n; ++m)
          for (int s = m; s < n; ++s) {
            double acc = 0.0;
            for (int l = 0; l < n; ++l) {
              const double a = d.first[m](l, s) + d.first[s](m, l) - d.first[l](m, s);
              const double da = d.second[v][m](l, s) + d.second[v][s](m, l) - d.second[v][l](m, s);
              acc += dinv(r, l) * a + jet.inverse(r, l) * da;
            }
            jet.dgamma(v, r, m, s) = jet.dgamma(v, r, s, m) = 0.5 * acc;
          }
    }
    return jet;
  }

  // Nested central differences: Gamma from FD of g, d Gamma from FD of Gamma with a wider step.
  const double wide = policy.relative_step * policy.christoffel_factor;
  require_stencil(field, x, wide + policy.relative_step, policy);
  jet.gamma = gamma_from(jet.inverse, fd_first(field, x, policy));
  for (int v = 0; v < n; ++v) {
    const double h = wide * std::max(1.0, std::abs(x[v]));
    Vector xp = x, xm = x;
    xp[v] += h;
    xm[v] -= h;
    const Tensor3 gp = gamma_from(inverse_metric(field.matrix(xp)), fd_first(field, xp, policy));
    const Tensor3 gm = gamma_from(inverse_metric(field.matrix(xm)), fd_first(field, xm, policy));
    for (int r = 0; r < n; ++r)
      for (int m = 0; m < n; ++m)
        for (int s = 0; s < n; ++s) jet.dgamma(v, r, m, s) = (gp(r, m, s) - gm(r, m, s)) / (2.0 * h);
  }
  return jet;
}

Tensor4 riemann_from_jet(const ConnectionJet& jet) {
  const int n = jet.gamma.dim();
  const Tensor3& G = jet.gamma;
  Tensor4 R(n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int r = 0; r < n; ++r)
        for (int s = r + 1; s < n; ++s) {
          double acc = jet.dgamma(r, a, b, s) - jet.dgamma(s, a, b, r);
          for (int l = 0; l < n; ++l) acc += G(a, r, l) * G(l, s, b) - G(a, s, l) * G(l, r, b);
          R(a, b, r, s) = acc;
          R(a, b, s, r) = -acc;
        }
  return R;
}

CurvatureBundle curvature(const MetricField& field, const ParamPoint& point, const FdStepPolicy& policy) {
  const Vector& x = point.coords();
  const ConnectionJet jet = connection_jet(field, x, policy);
  const int n = field.chart_dim();
  const Matrix& g = jet.metric;

  CurvatureBundle out;
  out.point = point;
  out.metric = g;
  out.riemann = riemann_from_jet(jet);
  out.riemann_lower = Tensor4(n);
  for (int m = 0; m < n; ++m)
    for (int b = 0; b < n; ++b)
      for (int r = 0; r < n; ++r)
        for (int s = 0; s < n; ++s) {
          double acc = 0.0;
          for (int a = 0; a < n; ++a) acc += g(m, a) * out.riemann(a, b, r, s);
          out.riemann_lower(m, b, r, s) = acc;
        }

  out.ricci = Matrix::Zero(n, n);
  for (int m = 0; m < n; ++m)
    for (int v = 0; v < n; ++v)
      for (int a = 0; a < n; ++a) out.ricci(m, v) += out.riemann(a, m, a, v);
  out.scalar = (jet.inverse.cwiseProduct(out.ricci)).sum();

  out.weyl_projective = Tensor4(n);
  const double k = n > 1 ? out.scalar / (n * (n - 1.0)) : 0.0;
  for (int m = 0; m < n; ++m)
    for (int v = 0; v < n; ++v)
      for (int r = 0; r < n; ++r)
        for (int s = 0; s < n; ++s)
          out.weyl_projective(m, v, r, s) = out.riemann_lower(m, v, r, s) - k * (g(v, s) * g(m, r) - g(v, r) * g(m, s));
  return out;
}

double sectional_curvature(const CurvatureBundle& bundle, const Vector& a, const Vector& b) {
  const Matrix& g = bundle.metric;
  const int n = static_cast<int>(g.rows());
  if (a.size() != n || b.size() != n) throw DomainError("sectional_curvature: vector dimension mismatch");
  const double aa = a.dot(g * a);
  const double bb = b.dot(g * b);
  const double ab = a.dot(g * b);
  const double area2 = aa * bb - ab * ab;
  if (!(area2 > 1e-12 * std::max(aa * bb, 1e-300)))
    throw DomainError("sectional_curvature: vectors span a degenerate plane");
  double num = 0.0;
  for (int m = 0; m < n; ++m)
    for (int v = 0; v < n; ++v)
      for (int r = 0; r < n; ++r)
        for (int s = 0; s < n; ++s) num += bundle.riemann_lower(m, v, r, s) * a[m] * b[v] * a[r] * b[s];
  return num / area2;
}

double sectional_curvature(const MetricField& field, const ParamPoint& point, const Vector& a, const Vector& b,
                           const FdStepPolicy& policy) {
  return sectional_curvature(curvature(field, point, policy), a, b);
}

Matrix killing_residual(const MetricField& field, const ParamPoint& point,
                        const std::function<Vector(const Vector&)>& k_field, const FdStepPolicy& policy) {
  const Vector& x = point.coords();
  const int n = field.chart_dim();
  const Matrix g = field.matrix(x);
  const Matrix ginv = inverse_metric(g);
  const std::vector<Matrix> dg = metric_derivatives(field, x, false, policy).first;
  const Tensor3 gamma = gamma_from(ginv, dg);

  const Vector k_up = k_field(x);
  if (k_up.size() != n) throw DomainError("killing_residual: vector field dimension mismatch");
  const Vector k_down = g * k_up;

  // d_m K_n = (d_m g_{n l}) K^l + g_{n l} d_m K^l
  Matrix dk(n, n);
  for (int m = 0; m < n; ++m) {
    const double h = fd_step(policy, x[m]);
    Vector xp = x, xm = x;
    xp[m] += h;
    xm[m] -= h;
    const Vector dk_up = (k_field(xp) - k_field(xm)) / (2.0 * h);
    const Vector d_down = dg[m] * k_up + g * dk_up;
    for (int v = 0; v < n; ++v) dk(m, v) = d_down[v];
  }

  Matrix cov(n, n);
  for (int m = 0; m < n; ++m)
    for (int v = 0; v < n; ++v) {
      double acc = dk(m, v);
      for (int r = 0; r < n; ++r) acc -= gamma(r, v, m) * k_down[r];
      cov(m, v) = acc;
    }
  return cov + cov.transpose();
}

}  // namespace igac
