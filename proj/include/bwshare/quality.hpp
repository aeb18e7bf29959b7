#pragma once

#include <algorithm>
#include <cmath>

#include "bwshare/types.hpp"

namespace bwshare {

// Allocated rate in Mbps for tau fractional timeslots at the given capacity.
inline double rate_mbps(double tau, double capacity, const QualityModel& m,
                        int slots_per_period) {
  return tau * capacity / (slots_per_period * m.rate_unit_divisor);
}

// Perceived quality of an allocation. Strictly increasing and concave in tau.
inline double quality(double tau, double capacity, const QualityModel& m,
                      int slots_per_period) {
  const double r = rate_mbps(tau, capacity, m, slots_per_period);
  return std::log((r + m.theta) / m.beta) / m.gamma_q;
}

// dQ/dtau at the given allocation.
inline double quality_slope(double tau, double capacity, const QualityModel& m,
                            int slots_per_period) {
  const double s = capacity / (slots_per_period * m.rate_unit_divisor);
  return s / (m.gamma_q * (s * tau + m.theta));
}

// Smallest tau >= 0 with quality(tau) == q; 0 when q is below quality(0).
inline double quality_inverse(double q, double capacity, const QualityModel& m,
                              int slots_per_period) {
  const double rate = m.beta * std::exp(m.gamma_q * q) - m.theta;
  if (rate <= 0.0) return 0.0;
  return rate * slots_per_period * m.rate_unit_divisor / capacity;
}

// Hinge term (q_min - q + alpha)_+ of the convexified percentile constraint.
inline double hinge(double q, double q_min, double alpha) {
  return std::max(q_min - q + alpha, 0.0);
}

}  // namespace bwshare
