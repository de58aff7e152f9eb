#include "igac/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>

namespace igac {
namespace {

constexpr std::array<double, 8> kNodes = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                                          0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                                          0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                                          0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204, 0.104790010322250183839876322541518,
    0.140653259715525918745189590510238, 0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5, 7).
constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780, 0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct Segment {
  double a;
  double b;
  Vector value;
  double error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

Segment apply_rule(const VectorIntegrand& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  Vector fc = f(center);
  Vector kronrod = kKronrodWeights[7] * fc;
  Vector gauss = kGaussWeights[3] * fc;
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kNodes[j];
    Vector sum = f(center - dx) + f(center + dx);
    kronrod += kKronrodWeights[j] * sum;
    if (j % 2 == 1) gauss += kGaussWeights[j / 2] * sum;
  }
  kronrod *= half;
  gauss *= half;
  const double err = (kronrod - gauss).lpNorm<Eigen::Infinity>();
  return Segment{a, b, std::move(kronrod), err};
}

}  // namespace

QuadratureResult integrate(const VectorIntegrand& f, double a, double b, const QuadratureSpec& spec) {
  if (!std::isfinite(a) || !std::isfinite(b)) throw DomainError("integrate: interval must be finite");
  QuadratureResult out;
  if (a == b) {
    out.value = f(a) * 0.0;
    return out;
  }
  const double sign = b > a ? 1.0 : -1.0;
  if (sign < 0) std::swap(a, b);

  std::priority_queue<Segment> heap;
  Segment first = apply_rule(f, a, b);
  Vector total = first.value;
  double total_err = first.error;
  heap.push(std::move(first));
  int evaluations = 15;

  auto converged = [&] { return total_err <= std::max(spec.abs_tol, spec.rel_tol * total.lpNorm<Eigen::Infinity>()); };

  int subdivisions = 1;
  while (!converged()) {
    if (subdivisions >= spec.max_subdivisions) {
      throw QuadratureError("integrate: subdivision limit reached", total_err);
    }
    Segment worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      throw QuadratureError("integrate: interval underflow", total_err);
    }
    Segment left = apply_rule(f, worst.a, mid);
    Segment right = apply_rule(f, mid, worst.b);
    evaluations += 30;
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    heap.push(std::move(left));
    heap.push(std::move(right));
    ++subdivisions;
  }

  // Re-sum to shed accumulated rounding from the incremental updates.
  total.setZero();
  total_err = 0.0;
  while (!heap.empty()) {
    total += heap.top().value;
    total_err += heap.top().error;
    heap.pop();
  }
  if (!total.allFinite()) throw QuadratureError("integrate: non-finite integrand", total_err);
  out.value = sign * total;
  out.error = total_err;
  out.evaluations = evaluations;
  return out;
}

double integrate(const ScalarIntegrand& f, double a, double b, const QuadratureSpec& spec) {
  const auto r = integrate([&](double x) { return Vector::Constant(1, f(x)); }, a, b, spec);
  return r.value[0];
}

QuadratureResult integrate_box(const std::function<Vector(const Vector&)>& f, const std::vector<Interval>& box,
                               const QuadratureSpec& spec) {
  const int dim = static_cast<int>(box.size());
  if (dim == 0) throw DomainError("integrate_box: empty box");
  Vector x(dim);
  int evaluations = 0;

  // Recursion integrates coordinate `level` with all outer coordinates fixed.
  std::function<QuadratureResult(int, const QuadratureSpec&)> nest = [&](int level, const QuadratureSpec& s) {
    if (level == dim - 1) {
      return integrate(
          [&](double t) {
            x[level] = t;
            ++evaluations;
            return f(x);
          },
          box[level].lo, box[level].hi, s);
    }
    QuadratureSpec inner = s;
    inner.rel_tol = s.rel_tol * 0.1;
    inner.abs_tol = s.abs_tol * 0.1;
    return integrate(
        [&](double t) {
          x[level] = t;
          return nest(level + 1, inner).value;
        },
        box[level].lo, box[level].hi, s);
  };
  QuadratureResult r = nest(0, spec);
  r.evaluations = evaluations;
  return r;
}

}  // namespace igac
