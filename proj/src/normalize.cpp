#include "plsel/normalize.hpp"

#include <algorithm>
#include <cmath>

#include "plsel/error.hpp"

namespace plsel {

std::map<std::string, double> normalize_by_max(const std::map<std::string, double>& raw,
                                               std::string_view what) {
    if (raw.empty()) throw DomainError(std::string(what) + ": nothing to normalize");
    double max = -INFINITY;
    for (const auto& [key, value] : raw) {
        if (std::isnan(value)) throw DomainError(std::string(what) + ": NaN value for '" + key + "'");
        max = std::max(max, value);
    }
    if (!(max > 0.0)) throw DomainError(std::string(what) + ": maximum is not positive");
    std::map<std::string, double> out;
    for (const auto& [key, value] : raw) {
        // Negative raw values (anti-correlated means) carry no similarity.
        out.emplace(key, value == max ? 1.0 : std::max(0.0, value / max));
    }
    return out;
}

}  // namespace plsel
