#include "igac/dynamics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <ostream>

namespace igac {
namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200, e6 = 22.0 / 525,
                 e7 = -1.0 / 40;

double error_norm(const Vector& err, const Vector& y0, const Vector& y1, const OdeTolerances& tol) {
  double acc = 0.0;
  for (int i = 0; i < err.size(); ++i) {
    const double sc = tol.abs_tol + tol.rel_tol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    if (sc > 0.0) {
      const double r = err[i] / sc;
      acc += r * r;
    } else if (err[i] != 0.0) {
      return std::numeric_limits<double>::infinity();
    }
  }
  return std::sqrt(acc / static_cast<double>(err.size()));
}

void check_grid(const std::vector<double>& grid) {
  if (grid.size() < 2) throw DomainError("ode: output grid needs at least two points");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw DomainError("ode: output grid must be strictly increasing");
}

GeodesicState split_state(const Vector& y, double tau, int n) {
  return GeodesicState{tau, ParamPoint(Vector(y.head(n))), y.segment(n, n)};
}

}  // namespace

OdeSolution solve_ode(const OdeRhs& rhs, const Vector& y0, const std::vector<double>& grid, const OdeTolerances& tol) {
  check_grid(grid);
  if (!(tol.abs_tol >= 0.0 && tol.rel_tol >= 0.0 && tol.abs_tol + tol.rel_tol > 0.0))
    throw DomainError("ode: tolerances must be nonnegative and not both zero");

  OdeSolution out;
  out.grid = grid;
  out.states.reserve(grid.size());
  out.states.push_back(y0);

  const double span = grid.back() - grid.front();
  const double h_min = tol.min_step * std::max(1.0, span);
  double t = grid.front();
  Vector y = y0;
  Vector k1 = rhs(t, y);
  double h = std::min(tol.initial_step, span);
  bool last_reject_domain = false;
  long steps = 0;

  for (std::size_t next = 1; next < grid.size(); ++next) {
    const double target = grid[next];
    while (t < target) {
      if (++steps > tol.max_steps) throw StiffnessError("ode: step budget exhausted");
      bool clipped = false;
      double step = h;
      if (t + step >= target) {
        step = target - t;
        clipped = true;
      }

      Vector y_new, k7, err;
      bool domain_fail = false;
      try {
        const Vector k2 = rhs(t + c2 * step, y + step * (a21 * k1));
        const Vector k3 = rhs(t + c3 * step, y + step * (a31 * k1 + a32 * k2));
        const Vector k4 = rhs(t + c4 * step, y + step * (a41 * k1 + a42 * k2 + a43 * k3));
        const Vector k5 = rhs(t + c5 * step, y + step * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        const Vector k6 = rhs(t + step, y + step * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        y_new = y + step * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        if (!y_new.allFinite()) throw DomainError("ode: non-finite state");
        k7 = rhs(t + step, y_new);
        err = step * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
      } catch (const DomainError&) {
        domain_fail = true;
      } catch (const SingularMetricError&) {
        domain_fail = true;
      }

      const double en = domain_fail ? std::numeric_limits<double>::infinity() : error_norm(err, y, y_new, tol);
      if (en <= 1.0) {
        t = clipped ? target : t + step;
        y = std::move(y_new);
        k1 = std::move(k7);
        ++out.accepted;
        last_reject_domain = false;
        const double factor = en == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
        // A clipped step says nothing about the natural step size, so keep h.
        if (!clipped || step >= h) h = step * factor;
      } else {
        ++out.rejected;
        last_reject_domain = domain_fail;
        h = domain_fail ? 0.25 * step : step * std::clamp(0.9 * std::pow(en, -0.2), 0.1, 0.9);
        if (h < h_min) {
          if (last_reject_domain) throw TruncationError("ode: trajectory leaves the metric domain", t);
          throw StiffnessError("ode: step size underflow at tau = " + std::to_string(t));
        }
      }
    }
    out.states.push_back(y);
  }
  return out;
}

std::vector<double> uniform_grid(double t0, double t1, int points) {
  if (points < 2) throw DomainError("uniform_grid: need at least two points");
  if (!(t1 > t0)) throw DomainError("uniform_grid: end must exceed start");
  std::vector<double> g(points);
  for (int i = 0; i < points; ++i) g[i] = t0 + (t1 - t0) * static_cast<double>(i) / (points - 1);
  g.back() = t1;
  return g;
}

Vector Trajectory::position_at(double tau) const {
  if (grid.empty() || tau < grid.front() || tau > grid.back()) throw DomainError("trajectory: tau outside grid");
  auto it = std::upper_bound(grid.begin(), grid.end(), tau);
  std::size_t i = it == grid.begin() ? 0 : static_cast<std::size_t>(it - grid.begin()) - 1;
  if (i + 1 >= grid.size()) return states.back().point.coords();
  const double h = grid[i + 1] - grid[i];
  const double s = (tau - grid[i]) / h;
  const double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
  const double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
  return h00 * states[i].point.coords() + h10 * h * states[i].velocity + h01 * states[i + 1].point.coords() +
         h11 * h * states[i + 1].velocity;
}

void Trajectory::write_csv(std::ostream& os) const {
  if (states.empty()) return;
  const int n = states.front().point.chart_dim();
  const bool with_j = !jacobi.empty();
  os << "tau";
  for (int i = 0; i < n; ++i) os << ",theta" << i + 1;
  for (int i = 0; i < n; ++i) os << ",dtheta" << i + 1;
  if (with_j) {
    for (int i = 0; i < n; ++i) os << ",J" << i + 1;
    os << ",norm_J";
  }
  os << '\n';
  char buf[40];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << buf;
  };
  for (std::size_t k = 0; k < states.size(); ++k) {
    put(grid[k]);
    for (int i = 0; i < n; ++i) os << ',', put(states[k].point[i]);
    for (int i = 0; i < n; ++i) os << ',', put(states[k].velocity[i]);
    if (with_j) {
      for (int i = 0; i < n; ++i) os << ',', put(jacobi[k].j[i]);
      os << ',', put(intensity[k]);
    }
    os << '\n';
  }
}

Vector geodesic_acceleration(const Tensor3& gamma, const Vector& v) {
  const int n = gamma.dim();
  Vector a = Vector::Zero(n);
  for (int m = 0; m < n; ++m)
    for (int a1 = 0; a1 < n; ++a1)
      for (int b = 0; b < n; ++b) a[m] -= gamma(m, a1, b) * v[a1] * v[b];
  return a;
}

Trajectory integrate_geodesic(const MetricField& field, const GeodesicState& initial, const std::vector<double>& grid,
                              const OdeTolerances& tol) {
  const int n = field.chart_dim();
  if (initial.point.chart_dim() != n || initial.velocity.size() != n)
    throw DomainError("integrate_geodesic: state dimension mismatch");
  if (!field.domain().contains(initial.point.coords()))
    throw DomainError("integrate_geodesic: initial point outside the metric domain");
  if (grid.empty() || grid.front() != initial.tau) throw DomainError("integrate_geodesic: grid must start at tau0");

  auto rhs = [&](double, const Vector& y) {
    const Vector x = y.head(n);
    const Vector v = y.segment(n, n);
    const Tensor3 gamma = christoffel(field, ParamPoint(x)).gamma;
    Vector dy(2 * n);
    dy.head(n) = v;
    dy.segment(n, n) = geodesic_acceleration(gamma, v);
    return dy;
  };
  Vector y0(2 * n);
  y0 << initial.point.coords(), initial.velocity;
  const OdeSolution sol = solve_ode(rhs, y0, grid, tol);

  Trajectory traj;
  traj.grid = grid;
  for (std::size_t k = 0; k < grid.size(); ++k) traj.states.push_back(split_state(sol.states[k], grid[k], n));
  return traj;
}

Trajectory integrate_geodesic(const MetricField& field, const GeodesicState& initial, double tau_end,
                              const OdeTolerances& tol, int points) {
  if (!(tau_end > initial.tau)) throw DomainError("integrate_geodesic: tau_end must exceed the initial tau");
  return integrate_geodesic(field, initial, uniform_grid(initial.tau, tau_end, points), tol);
}

double geodesic_speed2(const MetricField& field, const GeodesicState& s) {
  return s.velocity.dot(field.matrix(s.point.coords()) * s.velocity);
}

double max_speed_drift(const MetricField& field, const Trajectory& traj) {
  if (traj.states.empty()) return 0.0;
  const double s0 = geodesic_speed2(field, traj.states.front());
  double worst = 0.0;
  for (const auto& s : traj.states) {
    const double d = std::abs(geodesic_speed2(field, s) - s0);
    worst = std::max(worst, s0 > 0.0 ? d / s0 : d);
  }
  return worst;
}

std::pair<double, double> analytic_gaussian_geodesic(const GaussianGeodesicParams& p, double tau) {
  const GeodesicState s = analytic_gaussian_state(p, tau);
  return {s.point[0], s.point[1]};
}

GeodesicState analytic_gaussian_state(const GaussianGeodesicParams& p, double tau) {
  if (!(p.xi > 0.0) || !(p.lam > 0.0) || !std::isfinite(p.c))
    throw DomainError("analytic_gaussian_geodesic: xi and lam must be positive");
  const double xi = p.xi, lam = p.lam;
  const double A = xi * xi / (8.0 * lam * lam);
  double mu, sigma, dmu, dsigma;
  if (lam * tau >= 0.0) {
    const double s = std::exp(-lam * tau);
    const double E = s * s, D = E + A;
    mu = xi * xi / (2.0 * lam) / D;
    dmu = xi * xi * E / (D * D);
    sigma = xi * s / D;
    dsigma = xi * lam * s * (E - A) / (D * D);
  } else {
    // Rewritten in q = exp(lam tau) so that negative tau cannot overflow.
    const double q = std::exp(lam * tau);
    const double D = 1.0 + A * q * q;
    mu = xi * xi / (2.0 * lam) * q * q / D;
    dmu = xi * xi * q * q / (D * D);
    sigma = xi * q / D;
    dsigma = xi * lam * q * (1.0 - A * q * q) / (D * D);
  }
  Vector x(2), v(2);
  x << mu + p.c, sigma;
  v << dmu, dsigma;
  return GeodesicState{tau, ParamPoint(x), v};
}

GeodesicState gaussian_product_state(int blocks, const GaussianGeodesicParams& p, double tau) {
  if (blocks < 1) throw DomainError("gaussian_product_state: need at least one block");
  const GeodesicState b = analytic_gaussian_state(p, tau);
  Vector x(2 * blocks), v(2 * blocks);
  for (int i = 0; i < blocks; ++i) {
    x.segment(2 * i, 2) = b.point.coords();
    v.segment(2 * i, 2) = b.velocity;
  }
  return GeodesicState{tau, ParamPoint(x), v};
}

Trajectory integrate_jlc(const MetricField& field, const Trajectory& base, const JacobiField& j0,
                         const OdeTolerances& tol) {
  const int n = field.chart_dim();
  if (base.states.empty()) throw DomainError("integrate_jlc: empty base trajectory");
  if (j0.j.size() != n || j0.djdtau.size() != n) throw DomainError("integrate_jlc: Jacobi field dimension mismatch");
  if (!j0.j.allFinite() || !j0.djdtau.allFinite()) throw DomainError("integrate_jlc: non-finite initial field");

  auto rhs = [&](double, const Vector& y) {
    const Vector x = y.head(n);
    const Vector v = y.segment(n, n);
    const Vector J = y.segment(2 * n, n);
    const Vector dJ = y.segment(3 * n, n);
    const ConnectionJet jet = connection_jet(field, x);
    const Tensor3& G = jet.gamma;
    const Tensor4 R = riemann_from_jet(jet);
    const Vector acc = geodesic_acceleration(G, v);

    // Covariant second derivative expanded in coordinates; solve D^2 J + R(J, v) v = 0 for J''.
    Vector rest = Vector::Zero(n);
    for (int m = 0; m < n; ++m) {
      double s = 0.0;
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
          const double g = G(m, a, b);
          s += 2.0 * g * dJ[a] * v[b] + g * J[a] * acc[b];
          for (int c = 0; c < n; ++c) s += jet.dgamma(c, m, a, b) * v[c] * v[b] * J[a];
          if (g == 0.0) continue;
          for (int r = 0; r < n; ++r)
            for (int s2 = 0; s2 < n; ++s2) s += g * G(a, r, s2) * v[s2] * v[b] * J[r];
        }
      for (int nu = 0; nu < n; ++nu)
        for (int r = 0; r < n; ++r)
          for (int s2 = 0; s2 < n; ++s2) s += R(m, nu, r, s2) * v[nu] * J[r] * v[s2];
      rest[m] = -s;
    }

    Vector dy(4 * n);
    dy << v, acc, dJ, rest;
    return dy;
  };

  const GeodesicState& s0 = base.states.front();
  Vector y0(4 * n);
  y0 << s0.point.coords(), s0.velocity, j0.j, j0.djdtau;
  const OdeSolution sol = solve_ode(rhs, y0, base.grid, tol);

  Trajectory traj;
  traj.grid = base.grid;
  for (std::size_t k = 0; k < base.grid.size(); ++k) {
    const Vector& y = sol.states[k];
    traj.states.push_back(split_state(y, base.grid[k], n));
    traj.jacobi.push_back(JacobiField{y.segment(2 * n, n), y.segment(3 * n, n)});
    traj.intensity.push_back(jacobi_intensity(field, traj.states.back().point, traj.jacobi.back().j));
  }
  return traj;
}

double isotropic_jacobi(double k, double omega0, double tau) {
  if (!(k < 0.0)) throw UnsupportedError("isotropic_jacobi: only negative curvature is supported");
  const double w = std::sqrt(-k);
  return omega0 * std::sinh(w * tau) / w;
}

std::vector<JacobiField> jacobi_from_family(const MetricField& field,
                                            const std::function<GeodesicState(double)>& initial_family, double lam0,
                                            double d_lam, const std::vector<double>& grid, const OdeTolerances& tol) {
  if (!(d_lam > 0.0)) throw DomainError("jacobi_from_family: d_lam must be positive");
  GeodesicState plus = initial_family(lam0 + d_lam);
  GeodesicState minus = initial_family(lam0 - d_lam);
  plus.tau = minus.tau = grid.front();
  const Trajectory tp = integrate_geodesic(field, plus, grid, tol);
  const Trajectory tm = integrate_geodesic(field, minus, grid, tol);
  std::vector<JacobiField> out;
  out.reserve(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    out.push_back(JacobiField{(tp.states[k].point.coords() - tm.states[k].point.coords()) / (2.0 * d_lam),
                              (tp.states[k].velocity - tm.states[k].velocity) / (2.0 * d_lam)});
  }
  return out;
}

double jacobi_intensity(const MetricField& field, const ParamPoint& point, const Vector& j) {
  if (j.size() != field.chart_dim()) throw DomainError("jacobi_intensity: dimension mismatch");
  return std::sqrt(std::max(0.0, j.dot(field.matrix(point.coords()) * j)));
}

double estimate_lambda_j(const std::vector<double>& tau, const std::vector<double>& intensity, double tail_fraction) {
  if (tau.size() != intensity.size()) throw DomainError("estimate_lambda_j: series length mismatch");
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0)) throw DomainError("estimate_lambda_j: bad tail fraction");
  const std::size_t n = tau.size();
  const std::size_t count = static_cast<std::size_t>(std::floor(tail_fraction * static_cast<double>(n)));
  if (count < 8) throw DomainError("estimate_lambda_j: fewer than 8 tail points");
  const std::size_t first = n - count;
  double st = 0, sy = 0, stt = 0, sty = 0;
  for (std::size_t i = first; i < n; ++i) {
    if (!(intensity[i] > 0.0) || !std::isfinite(intensity[i]))
      throw DomainError("estimate_lambda_j: intensity must be positive on the tail");
    const double t = tau[i], y = std::log(intensity[i]);
    st += t, sy += y, stt += t * t, sty += t * y;
  }
  const double m = static_cast<double>(count);
  const double denom = m * stt - st * st;
  if (!(denom > 0.0)) throw DomainError("estimate_lambda_j: degenerate tau window");
  return (m * sty - st * sy) / denom;
}

}  // namespace igac
