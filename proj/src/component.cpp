#include "nbstein/component.hpp"

#include "nbstein/errors.hpp"

#include <algorithm>
#include <cmath>

namespace nbstein {

namespace {

void require_prob(double v, const char* what) {
    if (!(v > 0.0 && v < 1.0))
        throw InvalidParams(std::string(what) + " must lie strictly in (0,1)");
}

void require_count(int count) {
    if (count < 1) throw InvalidParams("component count must be >= 1");
}

double log_binom(double n, double k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

} // namespace

ComponentSpec ComponentSpec::geometric(double p, int count) {
    require_prob(p, "geometric p");
    require_count(count);
    ComponentSpec s;
    s.kind = Kind::Geometric;
    s.p = p;
    s.count = count;
    return s;
}

ComponentSpec ComponentSpec::poisson(double lambda, int count) {
    if (!(lambda > 0.0)) throw InvalidParams("poisson lambda must be > 0");
    require_count(count);
    ComponentSpec s;
    s.kind = Kind::Poisson;
    s.lambda = lambda;
    s.count = count;
    return s;
}

ComponentSpec ComponentSpec::binomial(int n_trials, double p_succ, int count) {
    if (n_trials < 1) throw InvalidParams("binomial trial count must be >= 1");
    require_prob(p_succ, "binomial p");
    require_count(count);
    ComponentSpec s;
    s.kind = Kind::Binomial;
    s.n_trials = n_trials;
    s.p_succ = p_succ;
    s.count = count;
    return s;
}

ComponentSpec ComponentSpec::generic(std::vector<double> a, Pmf pmf, int count) {
    require_count(count);
    if (pmf.size() < 1) throw InvalidParams("generic component needs a pmf");
    ComponentSpec s;
    s.kind = Kind::Generic;
    s.a = std::move(a);
    s.pmf = std::move(pmf);
    s.count = count;

    // Consistency: the a-sequence must reproduce the pmf through the identity
    // (m+1) P(m+1) = sum_{l<=m} P(l) a_{m-l+1} (coefficientwise M' = M * G).
    Eigen::Index top = std::min<Eigen::Index>(Eigen::Index(s.a.size()), s.pmf.size() - 1);
    for (Eigen::Index m = 0; m + 1 < s.pmf.size() && m < top; ++m) {
        double lhs = double(m + 1) * s.pmf.at(m + 1);
        double rhs = 0.0;
        for (Eigen::Index l = 0; l <= m; ++l) {
            std::size_t idx = std::size_t(m - l);
            if (idx < s.a.size()) rhs += s.pmf.at(l) * s.a[idx];
        }
        if (std::abs(lhs - rhs) > 1e-8 * std::max(1.0, std::abs(lhs)) + 1e-10)
            throw InvalidParams("generic component: a-sequence inconsistent with pmf at m=" +
                                std::to_string(m));
    }
    return s;
}

std::vector<std::string> ComponentSpec::hypothesis_flags() const {
    std::vector<std::string> flags;
    if (kind == Kind::Geometric && 1.0 - p >= 0.5)
        flags.push_back("geometric q >= 1/2");
    if (kind == Kind::Binomial && p_succ >= 0.5)
        flags.push_back("binomial p >= 1/2");
    return flags;
}

double a_coeff(const ComponentSpec& spec, long m) {
    if (m < 0) throw InvalidParams("a_coeff: m must be >= 0");
    switch (spec.kind) {
    case Kind::Geometric:
        // a_{m+1} = q^{m+1}
        return std::pow(1.0 - spec.p, double(m + 1));
    case Kind::Poisson:
        return m == 0 ? spec.lambda : 0.0;
    case Kind::Binomial: {
        // a_{m+1} = n (-1)^m (p/q)^{m+1}, computed in log magnitude to keep
        // large n / large m well behaved.
        double t = spec.p_succ / (1.0 - spec.p_succ);
        double mag = std::exp(double(m + 1) * std::log(t)) * double(spec.n_trials);
        return (m % 2 == 0) ? mag : -mag;
    }
    case Kind::Generic:
        return std::size_t(m) < spec.a.size() ? spec.a[std::size_t(m)] : 0.0;
    }
    return 0.0;
}

Pmf component_pmf(const ComponentSpec& spec, Eigen::Index L) {
    if (L < 1) throw InvalidParams("component_pmf: L must be >= 1");
    Eigen::ArrayXd v = Eigen::ArrayXd::Zero(L);
    switch (spec.kind) {
    case Kind::Geometric: {
        double q = 1.0 - spec.p;
        double cur = spec.p;
        for (Eigen::Index m = 0; m < L; ++m, cur *= q) v[m] = cur;
        break;
    }
    case Kind::Poisson: {
        double cur = std::exp(-spec.lambda);
        for (Eigen::Index m = 0; m < L; ++m) {
            v[m] = cur;
            cur *= spec.lambda / double(m + 1);
        }
        break;
    }
    case Kind::Binomial: {
        double lp = std::log(spec.p_succ), lq = std::log(1.0 - spec.p_succ);
        for (Eigen::Index m = 0; m < L && m <= spec.n_trials; ++m)
            v[m] = std::exp(log_binom(spec.n_trials, double(m)) + double(m) * lp +
                            double(spec.n_trials - m) * lq);
        break;
    }
    case Kind::Generic: {
        for (Eigen::Index m = 0; m < std::min(L, spec.pmf.size()); ++m) v[m] = spec.pmf.at(m);
        break;
    }
    }
    return Pmf::with_implied_tail(std::move(v));
}

double dtv_self_shift(const ComponentSpec& spec) {
    switch (spec.kind) {
    case Kind::Geometric:
        return spec.p;
    case Kind::Poisson: {
        // mode mass e^{-lambda} lambda^{floor(lambda)} / floor(lambda)!
        double fl = std::floor(spec.lambda);
        return std::exp(-spec.lambda + fl * std::log(spec.lambda) - std::lgamma(fl + 1.0));
    }
    case Kind::Binomial: {
        Pmf pmf = component_pmf(spec, Eigen::Index(spec.n_trials) + 1);
        double s = pmf.at(0);
        for (Eigen::Index m = 1; m <= spec.n_trials; ++m) s += std::abs(pmf.at(m) - pmf.at(m - 1));
        s += pmf.at(spec.n_trials); // |P(n+1) - P(n)|
        return 0.5 * s;
    }
    case Kind::Generic: {
        double s = spec.pmf.at(0);
        for (Eigen::Index m = 1; m < spec.pmf.size(); ++m)
            s += std::abs(spec.pmf.at(m) - spec.pmf.at(m - 1));
        s += spec.pmf.at(spec.pmf.size() - 1);
        return std::min(1.0, 0.5 * s + spec.pmf.tail_mass());
    }
    }
    return 1.0;
}

double binomial_shift_tv_closed_form(const ComponentSpec& spec) {
    if (spec.kind != Kind::Binomial)
        throw InvalidParams("binomial_shift_tv_closed_form: not a binomial component");
    double n = spec.n_trials, pt = spec.p_succ;
    double f = std::floor((n + 1.0) * pt);
    double mode_mass =
        std::exp(log_binom(n, f) + f * std::log(pt) + (n - f) * std::log(1.0 - pt));
    return mode_mass - 0.5 * std::pow(pt, n);
}

ComponentMoments component_moments(const ComponentSpec& spec) {
    switch (spec.kind) {
    case Kind::Geometric: {
        double s = (1.0 - spec.p) / spec.p;
        return {s, s * s, 2.0 * s * s * s};
    }
    case Kind::Poisson:
        return {spec.lambda, 0.0, 0.0};
    case Kind::Binomial: {
        double n = spec.n_trials, pt = spec.p_succ;
        return {n * pt, -n * pt * pt, 2.0 * n * pt * pt * pt};
    }
    case Kind::Generic: {
        // G(1) = sum a_{m+1}, G'(1) = sum m a_{m+1}, G''(1) = sum m(m-1) a_{m+1}.
        double g1 = 0, g1p = 0, g1pp = 0;
        for (std::size_t m = 0; m < spec.a.size(); ++m) {
            g1 += spec.a[m];
            g1p += double(m) * spec.a[m];
            g1pp += double(m) * double(m - 1.0) * spec.a[m];
        }
        // Divergence guard: the stored sequence must have decayed by its end.
        if (spec.a.size() >= 8) {
            double head = 0, tailw = 0;
            for (std::size_t m = 0; m < spec.a.size(); ++m) head = std::max(head, std::abs(spec.a[m]));
            for (std::size_t m = spec.a.size() - 4; m < spec.a.size(); ++m)
                tailw = std::max(tailw, std::abs(spec.a[m]));
            if (tailw > 1e-6 * std::max(1.0, head))
                throw NonDecayingSeries("generic a-sequence has not decayed at truncation");
        }
        return {g1, g1p, g1pp};
    }
    }
    return {0, 0, 0};
}

} // namespace nbstein
