#pragma once

#include "spdhg/linalg.hpp"
#include "spdhg/problem.hpp"

namespace spdhg {

// Euclidean projection onto {||x|| <= radius}. Exactly idempotent: the
// returned vector satisfies the norm test in floating point.
Vec project_l2_ball(const Vec& v, double radius);

// Componentwise clamp to [lo, hi].
Vec project_box(const Vec& v, const Vec& lo, const Vec& hi);

// Componentwise clamp to [-radius, radius].
Vec project_linf_ball(const Vec& v, double radius);

// Proximal dual ascent step: the unique maximizer of
//   <y, fx> - (1/2s)||y - y_prev||^2   over y in Y,
// which by completing the square is the projection of y_prev + s*fx onto Y.
Vec dual_update(const Vec& y_prev, const Vec& fx, double s,
                const DualSet& y_set);

double soft_threshold(double v, double threshold);
Vec soft_threshold(const Vec& v, double threshold);

}  // namespace spdhg
