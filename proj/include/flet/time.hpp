#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>

namespace flet {

// All timing quantities are integers in one abstract time unit.
// Rational arithmetic appears only inside the LP solver.
using Time = long long;

inline Time floor_div(Time a, Time b) {
    Time q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0)))
        --q;
    return q;
}

inline Time ceil_div(Time a, Time b) {
    return -floor_div(-a, b);
}

// Euclidean remainder, always in [0, b).
inline Time floor_mod(Time a, Time b) {
    return a - floor_div(a, b) * b;
}

inline Time gcd_time(Time a, Time b) {
    return std::gcd(a, b);
}

inline Time lcm_time(Time a, Time b) {
    if (a == 0 || b == 0)
        throw std::invalid_argument("lcm of zero period");
    Time g = std::gcd(a, b);
    Time r = a / g;
    if (r > (1'000'000'000'000'000LL / b))
        throw std::overflow_error("period lcm overflow");
    return r * b;
}

} // namespace flet
