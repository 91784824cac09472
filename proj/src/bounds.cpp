#include "nbstein/bounds.hpp"

#include "nbstein/errors.hpp"

#include <cmath>

namespace nbstein {

namespace {

// Compensated accumulator; the bound series run to thousands of terms.
struct Kahan {
    double sum = 0, c = 0;
    void add(double v) {
        double y = v - c;
        double t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
};

struct Composition {
    bool ge = false, po = false, bi = false, gen = false;
};

Composition classify(const Mixture& mixture) {
    Composition c;
    for (const auto& s : mixture) {
        switch (s.kind) {
        case Kind::Geometric: c.ge = true; break;
        case Kind::Poisson: c.po = true; break;
        case Kind::Binomial: c.bi = true; break;
        case Kind::Generic: c.gen = true; break;
        }
    }
    return c;
}

std::vector<std::string> collect_flags(const Mixture& mixture) {
    std::vector<std::string> flags;
    for (const auto& s : mixture)
        for (auto& f : s.hypothesis_flags()) flags.push_back(f);
    return flags;
}

void require_mean_matched(const AggregateMoments& m, const NbParams& nb) {
    if (std::abs(nb.alpha * nb.q / nb.p - m.mu) > 1e-8 * std::max(1.0, m.mu))
        throw InvalidParams("params do not mean-match this mixture");
}

void require_variance_matched(const AggregateMoments& m, const NbParams& nb) {
    require_mean_matched(m, nb);
    if (std::abs(nb.alpha * nb.q / (nb.p * nb.p) - m.sigma2) > 1e-8 * std::max(1.0, m.sigma2))
        throw InvalidParams("params do not variance-match this mixture");
}

// Binomial shorthand t = p~/q~ used by all three closed forms.
double bi_t(const ComponentSpec& s) { return s.p_succ / (1.0 - s.p_succ); }

} // namespace

std::string scheme_name(Scheme s) {
    switch (s) {
    case Scheme::OneParam: return "one-param";
    case Scheme::TwoParam: return "two-param";
    case Scheme::ThreeParam: return "three-param";
    case Scheme::K1K2One: return "k1k2-one";
    case Scheme::K1K2Two: return "k1k2-two";
    }
    return "?";
}

SeriesSum series_term(const Mixture& mixture, double q,
                      const std::function<double(long)>& weight, long L) {
    if (L < 1) throw InvalidParams("series_term: L must be >= 1");
    SeriesSum out;
    Kahan total;
    for (const auto& spec : mixture) {
        Kahan comp;
        double prev_term = 0, last_term = 0;
        long last_l = 0;
        for (long l = 1; l <= L; ++l) {
            double hi = a_coeff(spec, l);     // a_{l+1}
            double lo = a_coeff(spec, l - 1); // a_l
            if (hi == 0.0 && lo == 0.0) break; // series exhausted (or underflowed)
            double term = weight(l) * std::abs(hi - q * lo);
            comp.add(term);
            if (term != 0.0) {
                prev_term = last_term;
                last_term = term;
                last_l = l;
            }
        }
        total.add(double(spec.count) * comp.sum);
        if (last_l == L && last_term > 0.0) {
            // Geometric extrapolation of the neglected remainder; the ratio
            // of consecutive weighted terms already carries the polynomial
            // weight growth.
            double ratio = prev_term > 0.0 ? last_term / prev_term : 0.0;
            if (ratio >= 1.0) {
                if (last_term > 1e-300)
                    throw NonDecayingSeries("series term not decaying at truncation");
                ratio = 0.0;
            }
            out.tail += double(spec.count) * last_term * ratio / (1.0 - ratio);
        }
    }
    out.value = total.sum;
    return out;
}

double mattner_roos(const Mixture& mixture) {
    if (mixture.empty()) throw InvalidParams("mattner_roos: empty mixture");
    double s = 0.25;
    for (const auto& spec : mixture) s += spec.count * (1.0 - dtv_self_shift(spec));
    return std::min(1.0, std::sqrt(2.0 / M_PI) / std::sqrt(s));
}

double psi(const Mixture& mixture) {
    if (mixture.empty()) throw InvalidParams("psi: empty mixture");
    double s = 0.0;
    for (const auto& spec : mixture)
        s += spec.count * std::min(0.5, 1.0 - dtv_self_shift(spec));
    return s;
}

BoundReport first_order_bound(const Mixture& mixture, const NbParams& params, long L) {
    require_mean_matched(aggregate(mixture), params);
    SeriesSum s = series_term(mixture, params.q, [](long l) { return double(l); }, L);
    double aq = params.alpha * params.q;
    BoundReport r;
    r.scheme = Scheme::OneParam;
    r.nb = params;
    r.bound = s.value / aq;
    r.terms = {{"weighted-series / alpha*q", r.bound}};
    r.truncation_L = L;
    r.tail_estimate = s.tail / aq;
    r.hypothesis_flags = collect_flags(mixture);
    return r;
}

BoundReport second_order_bound(const Mixture& mixture, const NbParams& params, long L) {
    require_variance_matched(aggregate(mixture), params);
    SeriesSum s =
        series_term(mixture, params.q, [](long l) { return double(l) * double(l - 1); }, L);
    double factor = mattner_roos(mixture) / (params.alpha * params.q);
    BoundReport r;
    r.scheme = Scheme::TwoParam;
    r.nb = params;
    r.bound = factor * s.value;
    r.terms = {{"smoothing * series / alpha*q", r.bound}};
    r.truncation_L = L;
    r.tail_estimate = factor * s.tail;
    r.hypothesis_flags = collect_flags(mixture);
    return r;
}

BoundReport third_order_bound(const Mixture& mixture, const ThreeParamFit& fit, long L) {
    AggregateMoments m = aggregate(mixture);
    double w = fit.q_hat / fit.p_hat;
    if (std::abs(fit.nb.alpha * fit.nb.q / fit.nb.p + w - m.mu) > 1e-8 * std::max(1.0, m.mu))
        throw InvalidParams("fit does not mean-match this mixture");

    double delta = std::abs(fit.q_hat - fit.nb.q) * fit.q_hat / (fit.p_hat * fit.p_hat);
    double rq = fit.r * fit.nb.q;
    if (!(rq > delta))
        throw PerturbationTooLarge("r*q must exceed the geometric-factor perturbation");

    SeriesSum s = series_term(
        mixture, fit.nb.q,
        [](long l) { return double(l) * double(l - 1) * double(l - 2) / 6.0; }, L);
    double pert = std::abs(fit.q_hat - fit.nb.q) * std::pow(fit.q_hat, 3) /
                  std::pow(fit.p_hat, 4);
    double pref = 16.0 / (psi(mixture) * (rq - delta));

    BoundReport r;
    r.scheme = Scheme::ThreeParam;
    r.nb = fit.nb;
    r.fit = fit;
    r.bound = pref * (s.value + pert);
    r.terms = {{"series part", pref * s.value}, {"perturbation part", pref * pert}};
    r.truncation_L = L;
    r.tail_estimate = pref * s.tail;
    r.hypothesis_flags = collect_flags(mixture);
    return r;
}

namespace {

void check_closed_form_composition(const Composition& c, bool allow_po_bi) {
    if (c.gen)
        throw UnsupportedComposition("closed forms cover geometric/Poisson/binomial only");
    if (c.po && c.bi && c.ge)
        throw UnsupportedComposition("no closed form for three component families at once");
    if (c.po && c.bi && !allow_po_bi)
        throw UnsupportedComposition("no closed form for Poisson+binomial at this order");
}

} // namespace

BoundReport first_order_closed_form(const Mixture& mixture, const NbParams& params) {
    require_mean_matched(aggregate(mixture), params);
    check_closed_form_composition(classify(mixture), /*allow_po_bi=*/true);
    double q = params.q;
    Kahan sum;
    for (const auto& s : mixture) {
        double term = 0;
        switch (s.kind) {
        case Kind::Geometric: {
            double qi = 1.0 - s.p;
            term = std::abs(params.p - s.p) * qi / (s.p * s.p);
            break;
        }
        case Kind::Poisson:
            term = q * s.lambda;
            break;
        case Kind::Binomial: {
            double t = bi_t(s), pt = s.p_succ, qt = 1.0 - pt;
            double den = (1.0 - 2.0 * pt);
            term = s.n_trials * (t + q) * pt * qt / (den * den);
            break;
        }
        default: break;
        }
        sum.add(s.count * term);
    }
    BoundReport r;
    r.scheme = Scheme::OneParam;
    r.nb = params;
    r.bound = sum.sum / (params.alpha * params.q);
    r.terms = {{"closed form / alpha*q", r.bound}};
    r.hypothesis_flags = collect_flags(mixture);
    return r;
}

BoundReport second_order_closed_form(const Mixture& mixture, const NbParams& params) {
    require_variance_matched(aggregate(mixture), params);
    check_closed_form_composition(classify(mixture), /*allow_po_bi=*/false);
    double q = params.q;
    Kahan sum;
    double bi_mass = 0, ge_mass = 0;
    for (const auto& s : mixture) {
        double term = 0;
        switch (s.kind) {
        case Kind::Geometric: {
            double qi = 1.0 - s.p;
            term = 2.0 * std::abs(params.p - s.p) * qi * qi / std::pow(s.p, 3);
            ge_mass += s.count * qi * qi / (s.p * s.p);
            break;
        }
        case Kind::Poisson:
            term = 0; // only the l = 1 coefficient is nonzero; weight kills it
            break;
        case Kind::Binomial: {
            double t = bi_t(s), pt = s.p_succ, qt = 1.0 - pt;
            term = 2.0 * s.n_trials * (t + q) * pt * pt * qt / std::pow(1.0 - 2.0 * pt, 3);
            bi_mass += s.count * s.n_trials * pt * pt;
            break;
        }
        default: break;
        }
        sum.add(s.count * term);
    }
    BoundReport r;
    r.scheme = Scheme::TwoParam;
    r.nb = params;
    r.bound = mattner_roos(mixture) * sum.sum / (params.alpha * params.q);
    r.terms = {{"smoothing * closed form / alpha*q", r.bound}};
    r.hypothesis_flags = collect_flags(mixture);
    if (bi_mass > 0 && !(bi_mass < ge_mass))
        r.hypothesis_flags.push_back("binomial mass condition n~ sum p~^2 < sum q^2/p^2 violated");
    return r;
}

BoundReport third_order_closed_form(const Mixture& mixture, const ThreeParamFit& fit) {
    AggregateMoments m = aggregate(mixture);
    double w = fit.q_hat / fit.p_hat;
    if (std::abs(fit.nb.alpha * fit.nb.q / fit.nb.p + w - m.mu) > 1e-8 * std::max(1.0, m.mu))
        throw InvalidParams("fit does not mean-match this mixture");
    check_closed_form_composition(classify(mixture), /*allow_po_bi=*/false);

    double q = fit.nb.q;
    double delta = std::abs(fit.q_hat - q) * fit.q_hat / (fit.p_hat * fit.p_hat);
    double rq = fit.r * q;
    if (!(rq > delta))
        throw PerturbationTooLarge("r*q must exceed the geometric-factor perturbation");
    double pref = 16.0 / (psi(mixture) * (rq - delta));

    Kahan sum;
    double bi_mass = 0, ge_mass = 0;
    for (const auto& s : mixture) {
        double term = 0;
        switch (s.kind) {
        case Kind::Geometric: {
            double qi = 1.0 - s.p;
            term = std::abs(fit.nb.p - s.p) * std::pow(qi, 3) / std::pow(s.p, 4);
            ge_mass += s.count * qi * qi / (s.p * s.p);
            break;
        }
        case Kind::Poisson:
            term = 0;
            break;
        case Kind::Binomial: {
            double t = bi_t(s), pt = s.p_succ, qt = 1.0 - pt;
            term = s.n_trials * (t + q) * std::pow(pt, 3) * qt / std::pow(1.0 - 2.0 * pt, 4);
            bi_mass += s.count * s.n_trials * pt * pt;
            break;
        }
        default: break;
        }
        sum.add(s.count * term);
    }
    double pert = std::abs(fit.q_hat - q) * std::pow(fit.q_hat, 3) / std::pow(fit.p_hat, 4);

    BoundReport r;
    r.scheme = Scheme::ThreeParam;
    r.nb = fit.nb;
    r.fit = fit;
    r.bound = pref * (sum.sum + pert);
    r.terms = {{"closed form part", pref * sum.sum}, {"perturbation part", pref * pert}};
    r.hypothesis_flags = collect_flags(mixture);
    if (bi_mass > 0 && !(bi_mass < ge_mass))
        r.hypothesis_flags.push_back("binomial mass condition n~ sum p~^2 < sum q^2/p^2 violated");
    return r;
}

double perturbation_bound(const PerturbationEstimate& e) {
    if (!(e.alpha_q > e.delta1))
        throw PerturbationTooLarge("alpha*q must exceed delta1");
    return e.delta2 / (e.alpha_q - e.delta1);
}

} // namespace nbstein
