#include "qte/rng.hpp"

#include <cmath>
#include <numbers>

namespace qte {

double Rng::normal() {
    if (cached_valid_) {
        cached_valid_ = false;
        return cached_;
    }
    double u1 = 0.0;
    do {
        u1 = uniform01();
    } while (u1 == 0.0);
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    cached_ = r * std::sin(theta);
    cached_valid_ = true;
    return r * std::cos(theta);
}

}  // namespace qte
