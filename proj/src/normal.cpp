#include "htail/normal.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <cmath>
#include <numbers>

namespace htail::normal {

namespace {
constexpr double kSqrt2 = std::numbers::sqrt2;
// Above this z, erfc loses range and the Mills-ratio series is accurate to ~1e-13.
constexpr double kSeriesCutoff = 35.0;
}  // namespace

double tail(double z) { return 0.5 * std::erfc(z / kSqrt2); }

double log_tail(double z) {
    if (z < kSeriesCutoff) return std::log(0.5 * std::erfc(z / kSqrt2));
    const double r = 1.0 / (z * z);
    const double series = 1.0 + r * (-1.0 + r * (3.0 + r * (-15.0 + r * (105.0 - 945.0 * r))));
    return -0.5 * z * z - std::log(z) - 0.5 * std::log(2.0 * std::numbers::pi) + std::log(series);
}

double tail_inverse(double q) { return kSqrt2 * boost::math::erfc_inv(2.0 * q); }

double quantile(double p) { return -kSqrt2 * boost::math::erfc_inv(2.0 * p); }

}  // namespace htail::normal
