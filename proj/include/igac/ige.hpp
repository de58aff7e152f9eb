#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "igac/core.hpp"
#include "igac/dynamics.hpp"
#include "igac/geometry.hpp"
#include "igac/quadrature.hpp"

namespace igac {

/// sqrt(det g) at a point.
double volume_element(const MetricField& field, const ParamPoint& point);

/// Volume of the coordinate box spanned by start and end, measured with
/// sqrt(det g). The metric must be diagonal with a volume density that
/// factorizes over coordinates; each 1-D factor is taken in absolute value.
/// Returns the natural log of the volume (-inf for a degenerate box).
double log_region_volume(const MetricField& field, const ParamPoint& start, const ParamPoint& end,
                         const QuadratureSpec& quadrature = {});
double region_volume(const MetricField& field, const ParamPoint& start, const ParamPoint& end,
                     const QuadratureSpec& quadrature = {});

struct VolumeTrace {
  std::vector<double> grid;
  std::vector<double> log_delta_v;
  std::vector<double> delta_v;  // may overflow to inf; the log series is authoritative
  std::vector<double> avg_v;
  std::vector<double> ige;  // log(avg_v); -inf at the first grid point

  void write_csv(std::ostream& os) const;
};

/// Uniform grids must have at least this many points.
inline constexpr std::size_t kMinTraceGrid = 512;

VolumeTrace ige_trace(const MetricField& field, const Trajectory& geodesic, const std::vector<double>& grid,
                      const QuadratureSpec& quadrature = {});

enum class GrowthModel { Linear, Logarithmic };
enum class Regime { Regular, Chaotic, Ambiguous };

std::string to_string(GrowthModel m);
std::string to_string(Regime r);

struct GrowthFit {
  GrowthModel model = GrowthModel::Linear;
  double slope = 0.0;  // S ~ slope * tau + intercept_linear
  double intercept_linear = 0.0;
  double coefficient = 0.0;  // S ~ coefficient * log(tau) + intercept_log
  double intercept_log = 0.0;
  double rms_linear = 0.0;
  double rms_log = 0.0;
  double window_lo = 0.0;
  double window_hi = 0.0;
  std::size_t points = 0;

  /// RMS of the rejected model over RMS of the selected one (>= 1).
  double residual_ratio() const;
};

GrowthFit fit_growth(const VolumeTrace& trace, double tail_fraction = 0.5);
GrowthFit fit_growth(const std::vector<double>& tau, const std::vector<double>& entropy, double tail_fraction = 0.5);

struct Classification {
  Regime regime = Regime::Ambiguous;
  double margin = 1.0;
};

/// Ratios below this are reported as ambiguous.
inline constexpr double kAmbiguityRatio = 1.1;

Classification classify_regime(const GrowthFit& fit);

/// Tolerances suited to IGE runs: pure relative control, because coordinates
/// such as sigma decay exponentially along the geodesics of interest.
OdeTolerances ige_tolerances();

struct IgeRun {
  Trajectory geodesic;
  VolumeTrace trace;
  GrowthFit fit;
  Classification regime;
};

/// Integrates the geodesic on a uniform grid over [tau0, tau_end], builds the
/// volume trace, fits the tail and classifies the growth.
IgeRun run_ige(const MetricField& field, const GeodesicState& initial, double tau_end, int points = 1024,
               const OdeTolerances& tol = ige_tolerances(), double tail_fraction = 0.5);

// Initial states used by the IGE scenarios. Exponential-type coordinates
// (metric c/x^2) follow x(tau) = x0 exp(rate tau); Gaussian blocks follow the
// closed-form geodesic with the given (xi, lam), translated so mu(0) = mu0.
GeodesicState integrable_initial_state(double mu_a, double mu_b, double rate);
GeodesicState chaotic_initial_state(double mu_a, double mu_b, double rate, const GaussianGeodesicParams& block);

}  // namespace igac
