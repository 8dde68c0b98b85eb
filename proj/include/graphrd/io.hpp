#pragma once

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

namespace graphrd {

// Deterministic decimal rendering: %.17g round-trips IEEE doubles exactly and
// is platform-stable, which keeps emitted CSV artifacts byte-identical across
// reruns.
inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace graphrd
