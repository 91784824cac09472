#include "nbstein/steinop.hpp"

#include "nbstein/errors.hpp"

#include <cmath>
#include <random>

namespace nbstein {

TestFunction::TestFunction(Eigen::ArrayXd values) : values_(std::move(values)) {
    if (values_.size() < 1) throw InvalidParams("test function needs at least g(0)");
    if (values_[0] != 0.0) throw InvalidParams("test function must satisfy g(0) = 0");
    if (!values_.isFinite().all()) throw InvalidParams("test function must be bounded");
}

TestFunction random_test_function(Eigen::Index L, std::uint64_t seed) {
    if (L < 2) throw InvalidParams("random_test_function: L must be >= 2");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    Eigen::ArrayXd v(L);
    v[0] = 0.0;
    for (Eigen::Index i = 1; i < L; ++i) v[i] = unif(rng);
    return TestFunction(std::move(v));
}

double nb_stein_apply(const NbParams& params, const TestFunction& g, long m) {
    if (m < 0) throw InvalidParams("nb_stein_apply: m must be >= 0");
    return params.q * (params.alpha + double(m)) * g(m + 1) - double(m) * g(m);
}

double y_stein_apply(const Mixture& mixture, const NbParams& params, const TestFunction& g,
                     long m, long L) {
    double base = nb_stein_apply(params, g, m);
    double a1 = 0.0;
    for (const auto& spec : mixture) a1 += double(spec.count) * a_coeff(spec, 0);
    double out = base + (a1 - params.alpha * params.q) * g(m + 1);
    long lmax = std::min<long>(L, long(g.size()) - m - 2);
    for (const auto& spec : mixture) {
        double prev = a_coeff(spec, 0);
        double acc = 0.0;
        for (long l = 1; l <= lmax; ++l) {
            double cur = a_coeff(spec, l);
            acc += g(l + m + 1) * (cur - params.q * prev);
            prev = cur;
            if (cur == 0.0 && prev == 0.0) break;
        }
        out += double(spec.count) * acc;
    }
    return out;
}

double v_stein_apply(const ThreeParamFit& fit, const TestFunction& g, long m, long L) {
    if (m < 0) throw InvalidParams("v_stein_apply: m must be >= 0");
    const NbParams& nb = fit.nb;
    double out = nb.q * (nb.alpha + 1.0 + double(m)) * g(m + 1) - double(m) * g(m);
    double dq = fit.q_hat - nb.q;
    if (dq != 0.0) {
        long lmax = std::min<long>(L, long(g.size()) - m - 2);
        double pw = 1.0;
        double acc = 0.0;
        for (long l = 0; l <= lmax; ++l) {
            acc += g(m + l + 1) * pw;
            pw *= fit.q_hat;
        }
        out += dq * acc;
    }
    return out;
}

double k1k2_stein_apply(const K1K2Config& cfg, const NbParams& params, const TestFunction& g,
                        long m, long L) {
    if (m < 0) throw InvalidParams("k1k2_stein_apply: m must be >= 0");
    double q = params.q;
    double n = double(cfg.n);
    long k = cfg.k();
    double a = cfg.a();
    double out = q * (n / q + double(m)) * g(m + 1) - double(m) * g(m);

    long lmax = std::min<long>(L, long(g.size()) - m - 2);
    if (lmax >= 1) {
        BSeries bs = b_coeffs(cfg, std::max<long>(lmax, k));
        std::vector<double> d = shifted_diff(bs, params.p);
        double s1 = 0, s2 = 0, s3 = 0;
        for (long l = 1; l <= lmax; ++l) {
            double gv = g(m + l + 1);
            s1 += gv * d[std::size_t(l)];
            if (l >= k - 1) s2 += gv * bs.at(l - k + 1);
            if (l >= k) s3 += gv * bs.at(l - k);
        }
        out += n * s1 - n * k * a * s2 + n * q * k * a * s3;
    }
    return out;
}

double stein_expectation(const std::function<double(long)>& op, const Pmf& pmf,
                         const TestFunction& g) {
    // op vanishes once m exceeds g's range: every term involves g at >= m.
    long top = std::min<long>(long(pmf.size()), long(g.size()));
    double s = 0, c = 0;
    for (long m = 0; m < top; ++m) {
        double pm = pmf.at(m);
        if (pm == 0.0) continue;
        double y = op(m) * pm - c;
        double t = s + y;
        c = (t - s) - y;
        s = t;
    }
    return s;
}

} // namespace nbstein
