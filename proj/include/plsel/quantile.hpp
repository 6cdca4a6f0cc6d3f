#pragma once

#include <span>

namespace plsel {

// Percentile by linear interpolation between closest ranks, q in [0, 1].
// `sorted` must be ascending and non-empty.
double linear_percentile(std::span<const double> sorted, double q);

}  // namespace plsel
