#include "langmem/stats.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "langmem/error.hpp"

namespace langmem::stats {

namespace {

// A co-moment this small relative to the data scale is rounding noise from a
// constant series, not real spread.
bool negligible(double m2, double scale, std::size_t n) {
  const double noise = 1e-14 * scale;
  return m2 <= static_cast<double>(n) * noise * noise;
}

}  // namespace

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "pearson inputs have lengths " + std::to_string(x.size()) + " and " +
                    std::to_string(y.size()));
  }
  const std::size_t n = x.size();
  if (n < 2) throw Error(ErrorCode::InsufficientData, "pearson needs at least 2 points");

  // Single-pass co-moment accumulation (Welford).
  double mean_x = 0.0, mean_y = 0.0, m2x = 0.0, m2y = 0.0, cxy = 0.0;
  double scale_x = 0.0, scale_y = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) {
      throw Error(ErrorCode::NumericalError, "pearson input contains a non-finite value");
    }
    const double k = static_cast<double>(i + 1);
    const double dx = x[i] - mean_x;
    const double dy = y[i] - mean_y;
    mean_x += dx / k;
    mean_y += dy / k;
    m2x += dx * (x[i] - mean_x);
    m2y += dy * (y[i] - mean_y);
    cxy += dx * (y[i] - mean_y);
    scale_x = std::max(scale_x, std::abs(x[i]));
    scale_y = std::max(scale_y, std::abs(y[i]));
  }
  if (negligible(m2x, scale_x, n) || negligible(m2y, scale_y, n)) {
    throw Error(ErrorCode::DegenerateVariance, "pearson input has zero variance");
  }
  return cxy / std::sqrt(m2x * m2y);
}

}  // namespace langmem::stats
