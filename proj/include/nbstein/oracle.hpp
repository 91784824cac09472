#pragma once

#include "nbstein/bounds.hpp"
#include "nbstein/k1k2.hpp"
#include "nbstein/pmf.hpp"

#include <cstdint>

namespace nbstein {

// Truncated convolution; mass pushed past L joins the tail.
Pmf convolve(const Pmf& x, const Pmf& y, Eigen::Index L);

// n-fold convolution by binary exponentiation.
Pmf convolve_power(const Pmf& x, long n, Eigen::Index L);

// NB(alpha, p) via the stable recurrence P(m+1) = P(m) q (alpha+m)/(m+1).
Pmf nb_pmf(const NbParams& params, Eigen::Index L);

// Exact law of the mixture sum (componentwise convolution with counts).
Pmf mixture_pmf(const Mixture& mixture, Eigen::Index L);

// NB(alpha, p) convolved with Ge(p_hat) - the three-parameter approximant.
Pmf three_param_pmf(const ThreeParamFit& fit, Eigen::Index L);

struct TvResult {
    double value = 0;       // half-L1 over the stored supports
    double error_bound = 0; // half the unaccounted tail masses
};
TvResult tv_distance(const Pmf& x, const Pmf& y);

struct SimulationRun {
    std::uint64_t seed = 0;
    long trials = 0;
    Pmf empirical;
    Eigen::ArrayXd std_errors;
};

// Monte Carlo waiting times: Bernoulli(p_bar) stream, non-overlapping
// (k1,k2)-event detection, cfg.n events per run; records the inter-event
// trial total. Deterministic for a fixed seed.
SimulationRun simulate_k1k2(const K1K2Config& cfg, long trials, std::uint64_t seed,
                            Eigen::Index L);

struct DominationReport {
    double tv = 0;
    double tv_error = 0;
    double bound = 0;
    double bound_tail = 0;
    double margin = 0; // bound + slack - tv
    bool ok = false;
};

// Checks exact d_TV(approximand, approximant) <= bound + truncation slack.
DominationReport verify_domination(const Mixture& mixture, Scheme scheme, long L_bound,
                                   Eigen::Index L_pmf);
DominationReport verify_domination_k1k2(const K1K2Config& cfg, Scheme scheme, long L_bound,
                                        Eigen::Index L_pmf);

} // namespace nbstein
