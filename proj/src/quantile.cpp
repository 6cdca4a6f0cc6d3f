#include "plsel/quantile.hpp"

#include <cmath>
#include <stdexcept>

namespace plsel {

double linear_percentile(std::span<const double> sorted, double q) {
    if (sorted.empty()) throw std::invalid_argument("linear_percentile: empty input");
    if (q < 0.0 || q > 1.0) throw std::invalid_argument("linear_percentile: q outside [0, 1]");
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = static_cast<std::size_t>(std::ceil(pos));
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

}  // namespace plsel
