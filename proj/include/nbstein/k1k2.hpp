#pragma once

#include "nbstein/bounds.hpp"
#include "nbstein/pmf.hpp"

#include <vector>

namespace nbstein {

// A (k1,k2)-event is k1 consecutive failures immediately followed by k2
// consecutive successes in Bernoulli(p_bar) trials; n is the number of events
// waited for. T is the total inter-event trial count (event lengths removed).
struct K1K2Config {
    int k1 = 0;
    int k2 = 0;
    double p_bar = 0;
    int n = 1;

    K1K2Config(int k1, int k2, double p_bar, int n = 1);

    int k() const { return k1 + k2; }
    // Single-trial event-completion probability q_bar^k1 * p_bar^k2.
    double a() const;
};

// Power-series coefficients of 1/(1 - z + a z^k): b_m = 1 for m < k, then
// b_m = b_{m-1} - a b_{m-k}. Equals the no-event probability in m trials.
struct BSeries {
    std::vector<double> b; // b_0 .. b_L
    double a = 0;
    int k = 0;
    double at(long m) const { return m >= 0 && std::size_t(m) < b.size() ? b[std::size_t(m)] : 0.0; }
};

BSeries b_coeffs(const K1K2Config& cfg, long L);

// Alternating binomial closed form for b_m; verification oracle for the
// recursion (cancellation-prone at large m, keep m moderate).
double b_closed_form(const K1K2Config& cfg, long m);

// Cancellation-free d_l = b_l - (1-p) b_{l-1}. Naive subtraction loses all
// precision once d_l is far below 1 ulp of b_l; this uses
// d_l = (p - a) b_{l-1} - a^2 W_l with W_l a sliding window of b values,
// which is exact algebra for any p. Takes p (not q = 1-p): when p is within
// a few ulps of a, p - a must be formed from the directly computed p.
// Entry 0 is unused.
std::vector<double> shifted_diff(const BSeries& bs, double p);

// P(number of events in n_trials trials = x), via the order-(k1,k2)
// recursions.
double order_k1k2_pmf(const K1K2Config& cfg, long x, long n_trials);

// PMF of T (cfg.n-fold convolution of the single-event inter-arrival law
// a * b_m), truncated at L.
Pmf waiting_pmf(const K1K2Config& cfg, Eigen::Index L);

// Mean-matched NB bound for T with alpha q = n, p = a/(1 - k a).
BoundReport one_param_bound_k1k2(const K1K2Config& cfg, long L = 3000);

// Mean+variance-matched NB bound for T.
BoundReport two_param_bound_k1k2(const K1K2Config& cfg, long L = 3000);

struct TableCell {
    int k1, k2;
    double p_bar;
    int n; // 1 for the one-parameter table
    double bound;
    double tail_estimate;
    std::vector<std::string> flags;
};

// The 21-row (k1,k2) grid shared by both reference tables.
const std::vector<std::pair<int, int>>& table_grid();

std::vector<TableCell> one_param_table(long L = 3000);                  // p_bar in {1/4,1/8,1/16}
std::vector<TableCell> two_param_table(long L = 3000);                  // additionally n in {50,100}

} // namespace nbstein
