#pragma once

#include "nbstein/moments.hpp"

namespace nbstein {

// Negative binomial NB(alpha, p) with pmf C(alpha+m-1, m) p^alpha q^m.
struct NbParams {
    double alpha = 0;
    double p = 0;
    double q = 0; // always 1 - p
};

NbParams make_nb(double alpha, double p);

enum class OneParamMode { FixedAlpha, FixedP };

// Mean matching alpha q / p = mu with one of the parameters supplied.
NbParams match_one_param(const AggregateMoments& m, OneParamMode mode, double value);

// Mean and variance matching: p = mu / sigma^2, alpha = mu^2 / mu2.
// Requires sigma^2 > mu.
NbParams match_two_param(const AggregateMoments& m);

// Approximant NB(alpha, p) convolved with Ge(p_hat); r is the size parameter
// of the dominating negative binomial after absorbing the geometric factor.
struct ThreeParamFit {
    NbParams nb;
    double p_hat = 1;
    double q_hat = 0;
    double r = 0; // alpha + 1 + (q_hat - q)/(q p_hat)
    EtaDiagnostics eta;
};

// Three-moment matching through the eta machinery. Post-verifies that the
// fitted parameters reproduce (mu, mu2, mu3/2) to relative 1e-8.
ThreeParamFit match_three_param(const AggregateMoments& m);

} // namespace nbstein
