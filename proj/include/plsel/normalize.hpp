#pragma once

#include <map>
#include <string>
#include <string_view>

namespace plsel {

// Divides every value by the maximum, so the largest entries map to exactly 1.
// Negative values clamp to 0, keeping the output in [0, 1].
// Throws DomainError when `raw` is empty or its maximum is not positive;
// `what` names the quantity in the message.
std::map<std::string, double> normalize_by_max(const std::map<std::string, double>& raw,
                                               std::string_view what);

}  // namespace plsel
