#pragma once

#include <Eigen/Dense>

namespace nbstein {

// Truncated probability vector on Z_+ with tracked tail mass.
// Entries live at m = 0 .. size()-1; everything at or beyond size() is
// accounted for by tail_mass. Tail mass is never silently renormalized.
class Pmf {
public:
    Pmf() = default;

    // Clamps tiny negative entries (cancellation noise) to zero and records
    // how many were clamped. Throws InvalidParams if an entry is more
    // negative than the clamp tolerance or if probs + tail do not sum to 1.
    Pmf(Eigen::ArrayXd probs, double tail_mass);

    // Convenience: tail is whatever mass the entries do not account for.
    static Pmf with_implied_tail(Eigen::ArrayXd probs);

    static Pmf point_mass(Eigen::Index at, Eigen::Index length);

    const Eigen::ArrayXd& probs() const { return probs_; }
    double tail_mass() const { return tail_mass_; }
    Eigen::Index size() const { return probs_.size(); }
    int clamped_count() const { return clamped_; }

    // P(X = m); zero outside the stored range (the tail is not per-point).
    double at(Eigen::Index m) const {
        return (m >= 0 && m < probs_.size()) ? probs_[m] : 0.0;
    }

    // Mean restricted to the stored support (diagnostic only).
    double truncated_mean() const;

private:
    Eigen::ArrayXd probs_;
    double tail_mass_ = 1.0;
    int clamped_ = 0;
};

} // namespace nbstein
