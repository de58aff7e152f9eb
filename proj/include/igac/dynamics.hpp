#pragma once

#include <functional>
#include <iosfwd>
#include <utility>
#include <vector>

#include "igac/core.hpp"
#include "igac/geometry.hpp"

namespace igac {

struct OdeTolerances {
  double abs_tol = 1e-9;
  double rel_tol = 1e-9;
  double initial_step = 1e-3;
  double min_step = 1e-12;  // relative to the span being integrated
  long max_steps = 2'000'000;
};

/// Outcome of an explicit ODE solve sampled on a fixed output grid.
struct OdeSolution {
  std::vector<double> grid;
  std::vector<Vector> states;
  long accepted = 0;
  long rejected = 0;
};

using OdeRhs = std::function<Vector(double, const Vector&)>;

/// Dormand-Prince 5(4) with PI step control. Steps are clipped so that every
/// grid point is hit exactly. A DomainError raised by the right-hand side is
/// treated as a rejected step; if the step then underflows the solve stops
/// with TruncationError at the last accepted time.
OdeSolution solve_ode(const OdeRhs& rhs, const Vector& y0, const std::vector<double>& grid, const OdeTolerances& tol);

struct GeodesicState {
  double tau = 0.0;
  ParamPoint point;
  Vector velocity;
};

struct JacobiField {
  Vector j;
  Vector djdtau;
};

struct Trajectory {
  std::vector<double> grid;
  std::vector<GeodesicState> states;
  std::vector<JacobiField> jacobi;  // empty unless produced by the JLC integrator
  std::vector<double> intensity;    // ||J|| per grid point when jacobi is present

  std::size_t size() const noexcept { return grid.size(); }
  /// Cubic Hermite interpolation of the position between grid points.
  Vector position_at(double tau) const;
  void write_csv(std::ostream& os) const;
};

std::vector<double> uniform_grid(double t0, double t1, int points);

/// Geodesic acceleration -Gamma^mu_{nu rho} v^nu v^rho.
Vector geodesic_acceleration(const Tensor3& gamma, const Vector& v);

Trajectory integrate_geodesic(const MetricField& field, const GeodesicState& initial, const std::vector<double>& grid,
                              const OdeTolerances& tol = {});
Trajectory integrate_geodesic(const MetricField& field, const GeodesicState& initial, double tau_end,
                              const OdeTolerances& tol = {}, int points = 201);

/// g(v, v) at the state's point.
double geodesic_speed2(const MetricField& field, const GeodesicState& s);

/// Largest relative drift of g(v, v) along the trajectory.
double max_speed_drift(const MetricField& field, const Trajectory& traj);

// Closed-form geodesics of a (mu, sigma) Gaussian block with metric
// diag(1/sigma^2, 2/sigma^2). The constant c translates mu, which is an isometry.
struct GaussianGeodesicParams {
  double xi = 1.0;
  double lam = 1.0;
  double c = 0.0;
};

std::pair<double, double> analytic_gaussian_geodesic(const GaussianGeodesicParams& p, double tau);
/// Position (mu, sigma) and velocity (mu', sigma') of the closed-form geodesic.
GeodesicState analytic_gaussian_state(const GaussianGeodesicParams& p, double tau);

/// Integrates the linearized geodesic deviation equation alongside the base
/// geodesic. The base trajectory supplies the initial state and output grid.
Trajectory integrate_jlc(const MetricField& field, const Trajectory& base, const JacobiField& j0,
                         const OdeTolerances& tol = {});

/// J(tau) = omega0 sinh(sqrt(-k) tau) / sqrt(-k).
double isotropic_jacobi(double k, double omega0, double tau);

/// Jacobi field as the central difference of a one-parameter family of geodesics.
std::vector<JacobiField> jacobi_from_family(const MetricField& field,
                                            const std::function<GeodesicState(double)>& initial_family, double lam0,
                                            double d_lam, const std::vector<double>& grid,
                                            const OdeTolerances& tol = {});

double jacobi_intensity(const MetricField& field, const ParamPoint& point, const Vector& j);

/// Least-squares slope of ln ||J|| against tau over the last tail_fraction of the series.
double estimate_lambda_j(const std::vector<double>& tau, const std::vector<double>& intensity,
                         double tail_fraction = 0.5);

/// Initial state of the closed-form Gaussian geodesic on every block of a
/// product chart (mu_1, sigma_1, ..., mu_b, sigma_b).
GeodesicState gaussian_product_state(int blocks, const GaussianGeodesicParams& p, double tau);

}  // namespace igac
