#include "igac/ige.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace igac {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

double log_volume_density(const MetricField& field, const Vector& x) {
  const Matrix g = field.matrix(x);
  double acc = 0.0;
  for (int i = 0; i < g.rows(); ++i) {
    if (!(g(i, i) > 0.0)) throw SingularMetricError("volume: non-positive diagonal entry");
    acc += 0.5 * std::log(g(i, i));
  }
  return acc;
}

void require_diagonal(const MetricField& field, const Vector& x) {
  const Matrix g = field.matrix(x);
  const double scale = g.diagonal().cwiseAbs().maxCoeff();
  for (int i = 0; i < g.rows(); ++i)
    for (int j = 0; j < g.cols(); ++j)
      if (i != j && std::abs(g(i, j)) > 1e-12 * scale)
        throw UnsupportedError("region_volume: metric is not diagonal in this chart");
}

// |integral of exp(log_h(t)) dt| between a and b, returned as a log. Ranges
// spanning decades of a one-signed coordinate are integrated in log t.
double log_abs_integral(const std::function<double(double)>& log_h, double a, double b, const QuadratureSpec& spec) {
  if (a == b) return kNegInf;
  double lo = std::min(a, b), hi = std::max(a, b);
  const double ref = log_h(a);
  QuadratureResult r;
  if (lo > 0.0 && hi / lo > 4.0) {
    r = integrate([&](double u) { return Vector::Constant(1, std::exp(log_h(std::exp(u)) + u - ref)); }, std::log(lo),
                  std::log(hi), spec);
  } else if (hi < 0.0 && lo / hi > 4.0) {
    r = integrate([&](double u) { return Vector::Constant(1, std::exp(log_h(-std::exp(u)) + u - ref)); }, std::log(-hi),
                  std::log(-lo), spec);
  } else {
    r = integrate([&](double t) { return Vector::Constant(1, std::exp(log_h(t) - ref)); }, lo, hi, spec);
  }
  const double v = std::abs(r.value[0]);
  return v > 0.0 ? std::log(v) + ref : kNegInf;
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rms = 0.0;
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const double m = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) sx += x[i], sy += y[i];
  const double mx = sx / m, my = sy / m;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw DomainError("fit_growth: degenerate abscissa");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.slope * x[i] + f.intercept);
    ss += r * r;
  }
  f.rms = std::sqrt(ss / m);
  return f;
}

}  // namespace

double volume_element(const MetricField& field, const ParamPoint& point) {
  const Matrix g = field.matrix(point.coords());
  Eigen::LLT<Matrix> llt(g);
  if (llt.info() != Eigen::Success) throw SingularMetricError("volume_element: metric is not positive definite");
  const Matrix& L = llt.matrixL();
  double v = 1.0;
  for (int i = 0; i < L.rows(); ++i) v *= L(i, i);
  if (!(v > 0.0) || !std::isfinite(v)) throw SingularMetricError("volume_element: degenerate volume");
  return v;
}

double log_region_volume(const MetricField& field, const ParamPoint& start, const ParamPoint& end,
                         const QuadratureSpec& quadrature) {
  const int n = field.chart_dim();
  if (start.chart_dim() != n || end.chart_dim() != n) throw DomainError("region_volume: dimension mismatch");
  const Vector& a = start.coords();
  const Vector& b = end.coords();
  require_diagonal(field, a);
  require_diagonal(field, b);

  const double log_h0 = log_volume_density(field, a);
  double total = 0.0;
  double separable_check = 0.0;
  for (int i = 0; i < n; ++i) {
    auto log_h = [&](double t) {
      Vector x = a;
      x[i] = t;
      return log_volume_density(field, x);
    };
    const double li = log_abs_integral(log_h, a[i], b[i], quadrature);
    if (li == kNegInf) return kNegInf;
    total += li;
    separable_check += log_h(b[i]) - log_h0;
  }
  total -= (n - 1) * log_h0;

  // For h = prod f_i(x_i) the corner value factorizes the same way.
  const double log_h1 = log_volume_density(field, b);
  if (std::abs((log_h1 - log_h0) - separable_check) > 1e-8 * std::max(1.0, std::abs(log_h1 - log_h0)))
    throw UnsupportedError("region_volume: volume density does not factorize over coordinates");
  return total;
}

double region_volume(const MetricField& field, const ParamPoint& start, const ParamPoint& end,
                     const QuadratureSpec& quadrature) {
  return std::exp(log_region_volume(field, start, end, quadrature));
}

void VolumeTrace::write_csv(std::ostream& os) const {
  os << "tau,delta_v,avg_v,ige\n";
  char buf[128];
  for (std::size_t k = 0; k < grid.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", grid[k], delta_v[k], avg_v[k], ige[k]);
    os << buf;
  }
}

VolumeTrace ige_trace(const MetricField& field, const Trajectory& geodesic, const std::vector<double>& grid,
                      const QuadratureSpec& quadrature) {
  if (grid.size() < kMinTraceGrid) throw DomainError("ige_trace: grid needs at least 512 points");
  if (geodesic.grid.empty() || grid.front() < geodesic.grid.front() || grid.back() > geodesic.grid.back())
    throw DomainError("ige_trace: geodesic does not cover the grid");
  const double step = (grid.back() - grid.front()) / static_cast<double>(grid.size() - 1);
  for (std::size_t k = 1; k < grid.size(); ++k)
    if (std::abs(grid[k] - grid[k - 1] - step) > 1e-9 * std::max(1.0, step))
      throw DomainError("ige_trace: grid must be uniform");

  const bool aligned = geodesic.grid == grid;
  auto position = [&](std::size_t k) {
    return aligned ? geodesic.states[k].point.coords() : geodesic.position_at(grid[k]);
  };

  VolumeTrace tr;
  tr.grid = grid;
  const std::size_t m = grid.size();
  tr.log_delta_v.resize(m);
  tr.delta_v.resize(m);
  tr.avg_v.resize(m);
  tr.ige.resize(m);

  const ParamPoint start(position(0));
  for (std::size_t k = 0; k < m; ++k) {
    tr.log_delta_v[k] = log_region_volume(field, start, ParamPoint(position(k)), quadrature);
    tr.delta_v[k] = std::exp(tr.log_delta_v[k]);
  }

  // Cumulative trapezoid in the log domain.
  double log_cum = kNegInf;
  tr.avg_v[0] = tr.delta_v[0];
  tr.ige[0] = tr.log_delta_v[0];
  for (std::size_t k = 1; k < m; ++k) {
    const double h = grid[k] - grid[k - 1];
    log_cum = log_add(log_cum, std::log(0.5 * h) + log_add(tr.log_delta_v[k - 1], tr.log_delta_v[k]));
    tr.ige[k] = log_cum - std::log(grid[k] - grid.front());
    tr.avg_v[k] = std::exp(tr.ige[k]);
  }
  return tr;
}

std::string to_string(GrowthModel m) { return m == GrowthModel::Linear ? "linear" : "logarithmic"; }

std::string to_string(Regime r) {
  switch (r) {
    case Regime::Regular:
      return "Regular";
    case Regime::Chaotic:
      return "Chaotic";
    case Regime::Ambiguous:
      return "Ambiguous";
  }
  return "Ambiguous";
}

double GrowthFit::residual_ratio() const {
  const double lo = std::min(rms_linear, rms_log);
  const double hi = std::max(rms_linear, rms_log);
  if (hi == 0.0) return 1.0;
  return std::min(hi / std::max(lo, 1e-300), 1e12);
}

GrowthFit fit_growth(const std::vector<double>& tau, const std::vector<double>& entropy, double tail_fraction) {
  if (tau.size() != entropy.size()) throw DomainError("fit_growth: series length mismatch");
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0)) throw DomainError("fit_growth: bad tail fraction");
  const std::size_t count = static_cast<std::size_t>(std::floor(tail_fraction * static_cast<double>(tau.size())));
  if (count < 16) throw DomainError("fit_growth: fewer than 16 tail points");
  const std::size_t first = tau.size() - count;

  std::vector<double> t, logt, s;
  for (std::size_t i = first; i < tau.size(); ++i) {
    if (!(tau[i] > 0.0)) throw DomainError("fit_growth: tail must have positive tau");
    if (!std::isfinite(entropy[i])) throw DomainError("fit_growth: non-finite entropy on the tail");
    t.push_back(tau[i]);
    logt.push_back(std::log(tau[i]));
    s.push_back(entropy[i]);
  }
  const LineFit lin = least_squares(t, s);
  const LineFit lg = least_squares(logt, s);

  GrowthFit f;
  f.slope = lin.slope;
  f.intercept_linear = lin.intercept;
  f.rms_linear = lin.rms;
  f.coefficient = lg.slope;
  f.intercept_log = lg.intercept;
  f.rms_log = lg.rms;
  f.model = lin.rms <= lg.rms ? GrowthModel::Linear : GrowthModel::Logarithmic;
  f.window_lo = t.front();
  f.window_hi = t.back();
  f.points = t.size();
  return f;
}

GrowthFit fit_growth(const VolumeTrace& trace, double tail_fraction) {
  return fit_growth(trace.grid, trace.ige, tail_fraction);
}

Classification classify_regime(const GrowthFit& fit) {
  Classification c;
  c.margin = fit.residual_ratio();
  if (c.margin < kAmbiguityRatio)
    c.regime = Regime::Ambiguous;
  else
    c.regime = fit.model == GrowthModel::Logarithmic ? Regime::Regular : Regime::Chaotic;
  return c;
}

}  // namespace igac

namespace igac {

OdeTolerances ige_tolerances() {
  OdeTolerances t;
  t.abs_tol = 0.0;
  t.rel_tol = 1e-10;
  return t;
}

IgeRun run_ige(const MetricField& field, const GeodesicState& initial, double tau_end, int points,
               const OdeTolerances& tol, double tail_fraction) {
  IgeRun r;
  const std::vector<double> grid = uniform_grid(initial.tau, tau_end, points);
  r.geodesic = integrate_geodesic(field, initial, grid, tol);
  r.trace = ige_trace(field, r.geodesic, grid);
  r.fit = fit_growth(r.trace, tail_fraction);
  r.regime = classify_regime(r.fit);
  return r;
}

GeodesicState integrable_initial_state(double mu_a, double mu_b, double rate) {
  if (!(mu_a > 0.0) || !(mu_b > 0.0)) throw DomainError("integrable state: means must be positive");
  Vector x(2), v(2);
  x << mu_a, mu_b;
  v << rate * mu_a, rate * mu_b;
  return GeodesicState{0.0, ParamPoint(x), v};
}

GeodesicState chaotic_initial_state(double mu_a, double mu_b, double rate, const GaussianGeodesicParams& block) {
  if (!(mu_a > 0.0)) throw DomainError("chaotic state: mean spacing must be positive");
  GaussianGeodesicParams p = block;
  p.c = 0.0;
  const GeodesicState g = analytic_gaussian_state(p, 0.0);
  Vector x(3), v(3);
  x << mu_a, mu_b, g.point[1];
  v << rate * mu_a, g.velocity[0], g.velocity[1];
  return GeodesicState{0.0, ParamPoint(x), v};
}

}  // namespace igac
