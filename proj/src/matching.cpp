#include "nbstein/matching.hpp"

#include "nbstein/errors.hpp"

#include <cmath>

namespace nbstein {

NbParams make_nb(double alpha, double p) {
    if (!(alpha > 0.0)) throw InvalidParams("alpha must be > 0");
    if (!(p > 0.0 && p < 1.0)) throw InvalidParams("p must lie strictly in (0,1)");
    return {alpha, p, 1.0 - p};
}

NbParams match_one_param(const AggregateMoments& m, OneParamMode mode, double value) {
    if (!(m.mu > 0.0)) throw InvalidParams("mean matching needs mu > 0");
    if (mode == OneParamMode::FixedAlpha) {
        if (!(value > 0.0)) throw InvalidParams("fixed alpha must be > 0");
        return make_nb(value, value / (value + m.mu));
    }
    if (!(value > 0.0 && value < 1.0)) throw InvalidParams("fixed p must lie in (0,1)");
    return make_nb(m.mu * value / (1.0 - value), value);
}

NbParams match_two_param(const AggregateMoments& m) {
    if (!(m.mu2 > 0.0))
        throw OverdispersedRequired("two-parameter matching needs sigma^2 > mu");
    return make_nb(m.mu * m.mu / m.mu2, m.mu / m.sigma2);
}

ThreeParamFit match_three_param(const AggregateMoments& m) {
    if (!(m.mu2 > 0.0))
        throw OverdispersedRequired("three-parameter matching needs sigma^2 > mu");
    ThreeParamFit fit;
    fit.eta = eta(m); // throws InadmissibleEta if no branch works

    double w = fit.eta.eta / (3.0 * m.mu); // q_hat / p_hat
    fit.p_hat = 3.0 * m.mu / (3.0 * m.mu + fit.eta.eta);
    fit.q_hat = 1.0 - fit.p_hat;
    double alpha = (m.mu - w) * (m.mu - w) / (m.mu2 - w * w);
    double p = (m.mu - w) / (m.sigma2 - w * (w + 1.0));
    if (!(alpha > 0.0) || !(p > 0.0 && p < 1.0) || !(fit.p_hat > 0.0 && fit.p_hat <= 1.0))
        throw InvalidParams("three-parameter fit left the admissible region");
    fit.nb = make_nb(alpha, p);
    fit.r = alpha + 1.0 + (fit.q_hat - fit.nb.q) / (fit.nb.q * fit.p_hat);

    // Mandatory round trip through the three matching equations.
    double s = fit.nb.q / fit.nb.p;
    double lhs[3] = {alpha * s + w, alpha * s * s + w * w, alpha * s * s * s + w * w * w};
    double rhs[3] = {m.mu, m.mu2, 0.5 * m.mu3};
    for (int i = 0; i < 3; ++i)
        if (std::abs(lhs[i] - rhs[i]) > 1e-8 * std::max(1.0, std::abs(rhs[i])))
            throw InvalidParams("three-parameter fit failed the moment round trip");
    return fit;
}

} // namespace nbstein
