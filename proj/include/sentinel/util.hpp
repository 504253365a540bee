#pragma once

#include <cstdio>
#include <cstdlib>
#include <string>

namespace sentinel {

// Shortest text that reads back to the same double.
inline std::string fmt_double(double x) {
    char buf[40];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, x);
        if (std::strtod(buf, nullptr) == x) break;
    }
    return buf;
}

}  // namespace sentinel
