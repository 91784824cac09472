#pragma once

#include "nbstein/matching.hpp"

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace nbstein {

enum class Scheme { OneParam, TwoParam, ThreeParam, K1K2One, K1K2Two };

std::string scheme_name(Scheme s);

struct BoundReport {
    Scheme scheme = Scheme::OneParam;
    NbParams nb;
    std::optional<ThreeParamFit> fit; // three-parameter scheme only
    double bound = 0;
    std::vector<std::pair<std::string, double>> terms; // sum to bound
    long truncation_L = 0;
    double tail_estimate = 0; // truncation slack, reported, never added
    std::vector<std::string> hypothesis_flags;
};

struct SeriesSum {
    double value = 0;
    double tail = 0;
};

// sum_i count_i sum_{l=1..L} weight(l) |a_{i,l+1} - q a_{i,l}| with a
// geometric tail extrapolation recorded separately.
SeriesSum series_term(const Mixture& mixture, double q,
                      const std::function<double(long)>& weight, long L);

// Shift-smoothing estimate for d_TV(Y, Y+1):
// sqrt(2/pi) (1/4 + sum count (1 - d_TV(X_i, X_i+1)))^{-1/2}, capped at 1.
double mattner_roos(const Mixture& mixture);

// Aggregate smoothness sum count * min(1/2, 1 - d_TV(X_i, X_i+1)).
double psi(const Mixture& mixture);

// Mean-matched bound: series with weight l, divided by alpha q.
BoundReport first_order_bound(const Mixture& mixture, const NbParams& params, long L);
// Closed forms per component family (geometric / Poisson / binomial).
BoundReport first_order_closed_form(const Mixture& mixture, const NbParams& params);

// Mean+variance-matched bound: smoothing factor times the weight-l(l-1) series
// over alpha q.
BoundReport second_order_bound(const Mixture& mixture, const NbParams& params, long L);
BoundReport second_order_closed_form(const Mixture& mixture, const NbParams& params);

// Three-moment-matched bound against NB * geometric, weight l(l-1)(l-2)/6
// plus the geometric-factor perturbation term.
BoundReport third_order_bound(const Mixture& mixture, const ThreeParamFit& fit, long L);
BoundReport third_order_closed_form(const Mixture& mixture, const ThreeParamFit& fit);

// Generic operator-perturbation estimate d_TV <= delta2 / (alpha q - delta1).
struct PerturbationEstimate {
    double delta1 = 0;
    double delta2 = 0;
    double alpha_q = 0;
};
double perturbation_bound(const PerturbationEstimate& e);

} // namespace nbstein
