#pragma once

#include "nbstein/bounds.hpp"
#include "nbstein/k1k2.hpp"
#include "nbstein/pmf.hpp"

#include <cstdint>
#include <functional>

namespace nbstein {

// Finitely supported test function with g(0) = 0; evaluates to 0 outside the
// stored range, so operator expectations truncate exactly.
class TestFunction {
  public:
    explicit TestFunction(Eigen::ArrayXd values);

    double operator()(long m) const {
        return m >= 0 && m < values_.size() ? values_[m] : 0.0;
    }
    Eigen::Index size() const { return values_.size(); }
    double sup_abs() const { return values_.size() ? values_.abs().maxCoeff() : 0.0; }

  private:
    Eigen::ArrayXd values_;
};

TestFunction random_test_function(Eigen::Index L, std::uint64_t seed);

// q(alpha+m) g(m+1) - m g(m): the characterizing operator of NB(alpha, p).
double nb_stein_apply(const NbParams& params, const TestFunction& g, long m);

// NB operator plus the mixture perturbation
//   (sum_i a_{i,1} - alpha q) g(m+1) + sum_i sum_{l>=1} g(l+m+1)(a_{i,l+1} - q a_{i,l});
// characterizes the law of the mixture sum. Inner series truncated at L.
double y_stein_apply(const Mixture& mixture, const NbParams& params, const TestFunction& g,
                     long m, long L);

// q(alpha+1+m) g(m+1) - m g(m) + (q_hat - q) sum_{l>=0} g(m+l+1) q_hat^l;
// characterizes NB(alpha, p) * Ge(p_hat).
double v_stein_apply(const ThreeParamFit& fit, const TestFunction& g, long m, long L);

// Waiting-time operator: q(n/q + m) g(m+1) - m g(m)
//   + n sum_{l>=1} g(m+l+1)(b_l - q b_{l-1})
//   - n k a sum_{l>=k-1} g(m+l+1) b_{l-k+1}
//   + n q k a sum_{l>=k} g(m+l+1) b_{l-k}.
double k1k2_stein_apply(const K1K2Config& cfg, const NbParams& params, const TestFunction& g,
                        long m, long L);

// sum_m op(m) pmf(m); exact up to sup|g| times the unaccounted tail mass.
double stein_expectation(const std::function<double(long)>& op, const Pmf& pmf,
                         const TestFunction& g);

} // namespace nbstein
