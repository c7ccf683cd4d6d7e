#pragma once

#include <span>

namespace langmem::stats {

// Sample Pearson correlation. Throws InsufficientData for fewer than two
// points and DegenerateVariance when either side is constant.
double pearson(std::span<const double> x, std::span<const double> y);

}  // namespace langmem::stats
