#pragma once

#include "nbstein/pmf.hpp"

#include <string>
#include <vector>

namespace nbstein {

enum class Kind { Geometric, Poisson, Binomial, Generic };

// One independent summand X_i of the approximated sum, with an i.i.d.
// multiplicity `count`. The a-sequence is the power-series expansion of the
// PGF log-derivative M'/M; for the named families it is known in closed form,
// a Generic component supplies it (with a consistent pmf) explicitly.
struct ComponentSpec {
    Kind kind = Kind::Geometric;

    double p = 0.0;      // Geometric success probability, support {0,1,2,...}
    double lambda = 0.0; // Poisson rate
    int n_trials = 0;    // Binomial number of trials
    double p_succ = 0.0; // Binomial success probability

    std::vector<double> a; // Generic: a_1, a_2, ... (a[m] = a_{m+1})
    Pmf pmf;               // Generic: matching pmf

    int count = 1;

    static ComponentSpec geometric(double p, int count = 1);
    static ComponentSpec poisson(double lambda, int count = 1);
    static ComponentSpec binomial(int n_trials, double p_succ, int count = 1);
    static ComponentSpec generic(std::vector<double> a, Pmf pmf, int count = 1);

    // Stated hypotheses of the closed-form bounds that this component
    // violates (e.g. geometric with q >= 1/2). Violations are reported, not
    // fatal: the series bounds remain computable.
    std::vector<std::string> hypothesis_flags() const;
};

using Mixture = std::vector<ComponentSpec>;

// a_{m+1}, the m-th coefficient of M'/M (m >= 0).
double a_coeff(const ComponentSpec& spec, long m);

Pmf component_pmf(const ComponentSpec& spec, Eigen::Index L);

// d_TV(X, X+1), computed exactly: closed forms for geometric (= p) and
// Poisson (= mode mass), direct half-L1 of successive differences otherwise.
double dtv_self_shift(const ComponentSpec& spec);

// Closed-form variant used by the binomial/geometric second-order bound:
// binomial mode mass minus half the all-success mass. Kept separate from
// dtv_self_shift, which is exact.
double binomial_shift_tv_closed_form(const ComponentSpec& spec);

// (G(1), G'(1), G''(1)) of the PGF log-derivative; these aggregate to the
// factorial cumulant moments of the sum.
struct ComponentMoments {
    double g1;
    double g1p;
    double g1pp;
};
ComponentMoments component_moments(const ComponentSpec& spec);

} // namespace nbstein
