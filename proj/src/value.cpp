#include "steam/value.hpp"

#include <cstdio>

namespace steam {

std::string NumericFormat::apply(double v) const {
    char buf[64];
    int n = space_flag ? std::snprintf(buf, sizeof(buf), "% .*f", precision, v)
                       : std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
    if (n < 0) return {};
    if (n >= static_cast<int>(sizeof(buf))) {
        std::string big(static_cast<std::size_t>(n) + 1, '\0');
        n = space_flag ? std::snprintf(big.data(), big.size(), "% .*f", precision, v)
                       : std::snprintf(big.data(), big.size(), "%.*f", precision, v);
        big.resize(static_cast<std::size_t>(n));
        return big;
    }
    return std::string(buf, static_cast<std::size_t>(n));
}

}  // namespace steam
