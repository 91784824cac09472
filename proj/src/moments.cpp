#include "nbstein/moments.hpp"

#include "nbstein/errors.hpp"

#include <cmath>
#include <complex>

namespace nbstein {

AggregateMoments aggregate(const Mixture& mixture) {
    if (mixture.empty()) throw InvalidParams("aggregate: empty mixture");
    AggregateMoments out;
    for (const auto& spec : mixture) {
        ComponentMoments cm = component_moments(spec);
        out.mu += spec.count * cm.g1;
        out.mu2 += spec.count * cm.g1p;
        out.mu3 += spec.count * cm.g1pp;
    }
    out.sigma2 = out.mu + out.mu2;
    return out;
}

namespace {

// Relative residual of the three moment-matching equations
//   alpha s = mu - w,  alpha s^2 = mu2 - w^2,  alpha s^3 = mu3/2 - w^3
// for w = eta / (3 mu), s = q/p of the fitted negative binomial.
double matching_residual(const AggregateMoments& m, double w) {
    double d1 = m.mu - w;
    double d2 = m.mu2 - w * w;
    if (d1 <= 0.0 || d2 <= 0.0) return HUGE_VAL;
    double s = d2 / d1;
    double alpha = d1 / s;
    double lhs3 = alpha * s * s * s;
    double rhs3 = 0.5 * m.mu3 - w * w * w;
    double scale = std::max({1.0, std::abs(lhs3), std::abs(rhs3)});
    return std::abs(lhs3 - rhs3) / scale;
}

} // namespace

EtaDiagnostics eta_diagnostics(const AggregateMoments& m) {
    EtaDiagnostics d;
    if (!(m.mu > 0.0) || !(m.mu2 > 0.0)) return d; // needs overdispersion

    d.eta1 = 1.5 * m.mu * m.mu3 - 4.0 * m.mu2 * m.mu2;
    d.eta2 = 27.0 * m.mu * m.mu * m.mu2 * m.mu2 - 16.0 * m.mu2 * m.mu2 * m.mu2 -
             13.5 * m.mu * m.mu * m.mu * m.mu3 + 9.0 * m.mu * m.mu2 * m.mu3;

    // eta = 0 satisfying the moment equations outright means the mixture is
    // (numerically) iid geometric; take the degenerate fit directly rather
    // than recovering 0 through the cancellation-heavy cube-root path.
    if (matching_residual(m, 0.0) <= 1e-8) {
        d.eta3 = std::cbrt(0.5 * d.eta2);
        d.eta = 0.0;
        d.branch = 0;
        d.admissible = true;
        return d;
    }

    std::complex<double> disc(4.0 * d.eta1 * d.eta1 * d.eta1 + d.eta2 * d.eta2, 0.0);
    std::complex<double> base = (d.eta2 + std::sqrt(disc)) / 2.0;
    std::complex<double> principal = std::pow(base, 1.0 / 3.0);
    const std::complex<double> omega = std::polar(1.0, 2.0 * M_PI / 3.0);

    double best_resid = HUGE_VAL;
    for (int branch = 0; branch < 3; ++branch) {
        std::complex<double> e3 = principal;
        for (int j = 0; j < branch; ++j) e3 *= omega;
        if (std::abs(e3) == 0.0) continue;
        std::complex<double> etac = 2.0 * m.mu2 + d.eta1 / e3 - e3;

        double imag_tol = 1e-9 * std::max(1.0, std::abs(etac));
        if (std::abs(etac.imag()) > imag_tol) continue;
        double eta_real = etac.real();
        // Exactly-geometric mixtures land at eta = 0 up to roundoff; snap so
        // the fit degenerates cleanly to the pure two-parameter case.
        if (std::abs(eta_real) <= 1e-8 * std::max(1.0, m.mu2)) eta_real = 0.0;
        if (eta_real < 0.0) continue;

        double resid = matching_residual(m, eta_real / (3.0 * m.mu));
        if (resid < best_resid) {
            best_resid = resid;
            d.eta3 = e3.real();
            d.eta3_imag_residual = etac.imag();
            d.eta = eta_real;
            d.branch = branch;
        }
    }
    d.admissible = best_resid <= 1e-8;
    return d;
}

EtaDiagnostics eta(const AggregateMoments& m) {
    EtaDiagnostics d = eta_diagnostics(m);
    if (!d.admissible)
        throw InadmissibleEta("no real nonnegative eta branch reproduces the moment equations");
    return d;
}

} // namespace nbstein
