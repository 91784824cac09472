#pragma once

#include "nbstein/component.hpp"

namespace nbstein {

// Factorial cumulant moments of the sum: mu = E Y, mu2 and mu3 the second and
// third factorial cumulants, sigma2 = mu + mu2 the variance.
struct AggregateMoments {
    double mu = 0;
    double mu2 = 0;
    double mu3 = 0;
    double sigma2 = 0;
};

AggregateMoments aggregate(const Mixture& mixture);

// Resolvent-cubic machinery for the three-parameter fit. eta is the real root
// of the cubic mu w^3 - 2 mu2 w^2 + (mu3/2) w + mu2^2 - mu mu3/2 = 0 scaled by
// 3 mu, reached through a cube root of (eta2 + sqrt(4 eta1^3 + eta2^2))/2.
// All three cube-root branches are tried; the one whose eta is real,
// nonnegative and reproduces the moment equations is kept.
struct EtaDiagnostics {
    double eta1 = 0;
    double eta2 = 0;
    double eta3 = 0;               // real part of the chosen cube root
    double eta3_imag_residual = 0; // imaginary part discarded from eta
    double eta = 0;
    int branch = -1; // 0 = principal cube root, 1/2 = rotated branches
    bool admissible = false;
};

// Never throws; inspect .admissible.
EtaDiagnostics eta_diagnostics(const AggregateMoments& m);

// Throws InadmissibleEta when no branch works (e.g. mu2 <= 0).
EtaDiagnostics eta(const AggregateMoments& m);

} // namespace nbstein
