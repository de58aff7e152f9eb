#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "igac/geometry.hpp"
#include "igac/ige.hpp"
#include "igac/models.hpp"
#include "igac/spectra.hpp"

namespace igac {

using Json = nlohmann::ordered_json;

/// A model built from {"family": name, "params": {...}} together with the
/// descriptor rewritten with every default filled in.
struct ModelDescriptor {
  ModelInstance instance;
  Json resolved;
};

/// Family names: gaussian-product, correlated-gaussian, exponential, weibull,
/// wigner-dyson, integrable, chaotic. Unknown families or parameter names and
/// invalid values raise DomainError.
ModelDescriptor model_from_json(const Json& descriptor);

Json to_json(const Vector& v);
Json to_json(const Matrix& m);
Vector vector_from_json(const Json& j, const std::string& what);

struct SectionalSample {
  Vector a;
  Vector b;
  double k = 0.0;
};

Json curvature_report(const CurvatureBundle& bundle, const std::vector<SectionalSample>& sectional);
Json to_json(const GrowthFit& fit, const Classification& classification);
Json to_json(const FitReport& report);

}  // namespace igac
