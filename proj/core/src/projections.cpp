#include "spdhg/projections.hpp"

#include <algorithm>
#include <cmath>

namespace spdhg {

Vec project_l2_ball(const Vec& v, double radius) {
  if (!(radius > 0.0)) {
    throw std::invalid_argument("project_l2_ball: radius must be positive");
  }
  double n = norm2(v);
  if (n <= radius) return v;
  Vec w = v;
  if (std::isinf(n)) {
    // The squared norm overflowed; pre-scale by the largest magnitude so the
    // direction survives. A genuine inf entry turns into NaN here and the
    // caller's finiteness checks take over.
    double m = 0.0;
    for (double e : w) m = std::max(m, std::abs(e));
    for (double& e : w) e /= m;
    n = norm2(w);
    const double scale = radius / n;
    for (double& e : w) e *= scale;
    n = norm2(w);
  }
  // Rescale until the computed norm passes the membership test, so the map
  // is idempotent in floating point. One pass almost always suffices.
  while (n > radius) {
    double scale = radius / n;
    if (scale >= 1.0) scale = std::nextafter(1.0, 0.0);
    for (double& e : w) e *= scale;
    n = norm2(w);
  }
  return w;
}

Vec project_box(const Vec& v, const Vec& lo, const Vec& hi) {
  if (v.size() != lo.size() || v.size() != hi.size()) {
    throw std::invalid_argument("project_box: length mismatch");
  }
  Vec w(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(lo[i] <= hi[i])) {
      throw std::invalid_argument("project_box: requires lo <= hi");
    }
    w[i] = std::clamp(v[i], lo[i], hi[i]);
  }
  return w;
}

Vec project_linf_ball(const Vec& v, double radius) {
  if (!(radius > 0.0)) {
    throw std::invalid_argument("project_linf_ball: radius must be positive");
  }
  Vec w(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    w[i] = std::clamp(v[i], -radius, radius);
  }
  return w;
}

Vec dual_update(const Vec& y_prev, const Vec& fx, double s,
                const DualSet& y_set) {
  if (!(s > 0.0)) {
    throw std::invalid_argument("dual_update: s must be positive");
  }
  if (y_prev.size() != fx.size()) {
    throw std::invalid_argument("dual_update: length mismatch");
  }
  Vec shifted(y_prev.size());
  for (std::size_t i = 0; i < shifted.size(); ++i) {
    shifted[i] = y_prev[i] + s * fx[i];
  }
  return y_set.project(shifted);
}

double soft_threshold(double v, double threshold) {
  if (v > threshold) return v - threshold;
  if (v < -threshold) return v + threshold;
  return 0.0;
}

Vec soft_threshold(const Vec& v, double threshold) {
  Vec w(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    w[i] = soft_threshold(v[i], threshold);
  }
  return w;
}

}  // namespace spdhg
