#include "nbstein/pmf.hpp"

#include "nbstein/errors.hpp"

#include <cmath>

namespace nbstein {

namespace {
constexpr double kClampTol = 1e-12; // entries in [-kClampTol, 0) are rounding noise
constexpr double kMassTol = 1e-9;   // slack on sum(probs) + tail == 1
} // namespace

Pmf::Pmf(Eigen::ArrayXd probs, double tail_mass)
    : probs_(std::move(probs)), tail_mass_(tail_mass) {
    for (Eigen::Index m = 0; m < probs_.size(); ++m) {
        double v = probs_[m];
        if (v < 0.0) {
            if (v < -kClampTol)
                throw InvalidParams("Pmf: negative probability " + std::to_string(v) +
                                    " at index " + std::to_string(m));
            probs_[m] = 0.0;
            ++clamped_;
        }
    }
    if (tail_mass_ < 0.0) {
        if (tail_mass_ < -kClampTol)
            throw InvalidParams("Pmf: negative tail mass");
        tail_mass_ = 0.0;
    }
    double total = probs_.sum() + tail_mass_;
    if (std::abs(total - 1.0) > kMassTol)
        throw InvalidParams("Pmf: mass " + std::to_string(total) + " is not 1");
}

Pmf Pmf::with_implied_tail(Eigen::ArrayXd probs) {
    double s = probs.sum();
    return Pmf(std::move(probs), s < 1.0 ? 1.0 - s : 0.0);
}

Pmf Pmf::point_mass(Eigen::Index at, Eigen::Index length) {
    Eigen::ArrayXd v = Eigen::ArrayXd::Zero(length);
    if (at >= length)
        throw InvalidParams("Pmf::point_mass: atom outside stored range");
    v[at] = 1.0;
    return Pmf(std::move(v), 0.0);
}

double Pmf::truncated_mean() const {
    double s = 0.0;
    for (Eigen::Index m = 1; m < probs_.size(); ++m) s += double(m) * probs_[m];
    return s;
}

} // namespace nbstein
