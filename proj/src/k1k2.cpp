#include "nbstein/k1k2.hpp"

#include "nbstein/errors.hpp"
#include "nbstein/oracle.hpp"

#include <cmath>

namespace nbstein {

namespace {

struct Kahan {
    double sum = 0, c = 0;
    void add(double v) {
        double y = v - c;
        double t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
};

// Geometric moment sums S_r = sum_{j>=1} j^r rho^j for the tail estimates.
struct GeomTail {
    double rho = 0, s0 = 0, s1 = 0, s2 = 0;
    bool finite = false;
};

GeomTail geom_tail(double last, double prev) {
    GeomTail g;
    if (!(last > 0.0) || !(prev > 0.0)) {
        g.finite = true; // series already vanished
        return g;
    }
    g.rho = last / prev;
    if (g.rho >= 1.0) return g;
    double r = g.rho, om = 1.0 - g.rho;
    g.s0 = r / om;
    g.s1 = r / (om * om);
    g.s2 = r * (1.0 + r) / (om * om * om);
    g.finite = true;
    return g;
}

// Estimated sum_{l>L} w(l) |d_l| for |d_{L+j}| ~ |d_L| rho^j, with w linear
// or quadratic in l.
double tail_linear(const GeomTail& g, double dL, long L) {
    if (!g.finite) return HUGE_VAL;
    return dL * (double(L) * g.s0 + g.s1);
}

double tail_quadratic_half(const GeomTail& g, double dL, long L) {
    if (!g.finite) return HUGE_VAL;
    double Ld = double(L);
    return dL * (0.5 * Ld * (Ld - 1.0) * g.s0 + 0.5 * (2.0 * Ld - 1.0) * g.s1 + 0.5 * g.s2);
}

} // namespace

K1K2Config::K1K2Config(int k1_, int k2_, double p_bar_, int n_)
    : k1(k1_), k2(k2_), p_bar(p_bar_), n(n_) {
    if (k1 < 0 || k2 < 0 || (k1 == 0 && k2 == 0))
        throw InvalidParams("(k1,k2) must be nonnegative and not both zero");
    if (!(p_bar > 0.0 && p_bar < 1.0)) throw InvalidParams("p_bar must lie in (0,1)");
    if (n < 1) throw InvalidParams("event count n must be >= 1");
}

double K1K2Config::a() const {
    return std::pow(1.0 - p_bar, k1) * std::pow(p_bar, k2);
}

BSeries b_coeffs(const K1K2Config& cfg, long L) {
    long k = cfg.k();
    if (L < k) throw InvalidParams("b_coeffs: L must be >= k");
    BSeries bs;
    bs.a = cfg.a();
    bs.k = int(k);
    bs.b.resize(std::size_t(L) + 1);
    for (long m = 0; m < k && m <= L; ++m) bs.b[std::size_t(m)] = 1.0;
    for (long m = k; m <= L; ++m)
        bs.b[std::size_t(m)] = bs.b[std::size_t(m - 1)] - bs.a * bs.b[std::size_t(m - k)];
    return bs;
}

double b_closed_form(const K1K2Config& cfg, long m) {
    if (m < 0) return 0.0;
    long k = cfg.k();
    double a = cfg.a();
    double sum = 0.0;
    for (long l = 0; l <= m / k; ++l) {
        double top = double(m - l * (k - 1));
        double log_c = std::lgamma(top + 1.0) - std::lgamma(double(l) + 1.0) -
                       std::lgamma(top - double(l) + 1.0);
        double term = std::exp(log_c + double(l) * std::log(a));
        sum += (l % 2 == 0) ? term : -term;
    }
    return sum;
}

std::vector<double> shifted_diff(const BSeries& bs, double p) {
    long L = long(bs.b.size()) - 1;
    long k = bs.k;
    double a = bs.a;
    double c1 = p - a;
    std::vector<double> d(std::size_t(L) + 1, 0.0);
    double W = 0.0; // sum of b over the sliding window feeding d_l
    for (long l = 1; l <= L; ++l) {
        if (l < k) {
            d[std::size_t(l)] = p;
        } else {
            if (l == k) {
                W = 0.0;
            } else {
                W += bs.at(l - 1 - k);
                if (l - k >= k) W -= bs.at(l - 2 * k);
            }
            d[std::size_t(l)] = c1 * bs.at(l - 1) - a * a * W;
        }
    }
    return d;
}

double order_k1k2_pmf(const K1K2Config& cfg, long x, long n_trials) {
    if (x < 0 || n_trials < 0) throw InvalidParams("order_k1k2_pmf: negative argument");
    long k = cfg.k();
    double a = cfg.a();
    if (x > (n_trials >= k ? n_trials / k : 0)) return 0.0;

    // Rolling table of P(count = x' after t trials) for x' = 0..xmax.
    long xmax = x;
    std::vector<std::vector<double>> p(std::size_t(n_trials) + 1,
                                       std::vector<double>(std::size_t(xmax) + 1, 0.0));
    for (long t = 0; t <= n_trials; ++t) {
        if (t < k) {
            p[std::size_t(t)][0] = 1.0;
        } else if (t == k) {
            p[std::size_t(t)][0] = 1.0 - a;
            if (xmax >= 1) p[std::size_t(t)][1] = a;
        } else {
            // zero-count recursion, then the one-step update for x >= 1
            p[std::size_t(t)][0] =
                p[std::size_t(t - 1)][0] - a * p[std::size_t(t - k)][0];
            for (long xx = 1; xx <= xmax; ++xx) {
                double lower = (t - k >= 0 && xx - 1 <= xmax)
                                   ? p[std::size_t(t - k)][std::size_t(xx - 1)]
                                   : 0.0;
                double same = (t - k >= 0) ? p[std::size_t(t - k)][std::size_t(xx)] : 0.0;
                p[std::size_t(t)][std::size_t(xx)] =
                    p[std::size_t(t - 1)][std::size_t(xx)] + a * (lower - same);
            }
        }
    }
    return p[std::size_t(n_trials)][std::size_t(x)];
}

Pmf waiting_pmf(const K1K2Config& cfg, Eigen::Index L) {
    if (L < 1) throw InvalidParams("waiting_pmf: L must be >= 1");
    BSeries bs = b_coeffs(cfg, std::max<long>(L, cfg.k()));
    Eigen::ArrayXd single = Eigen::ArrayXd::Zero(L);
    double a = cfg.a();
    for (Eigen::Index m = 0; m < L; ++m) single[m] = a * bs.at(m);
    Pmf one = Pmf::with_implied_tail(std::move(single));
    return convolve_power(one, cfg.n, L);
}

BoundReport one_param_bound_k1k2(const K1K2Config& cfg, long L) {
    long k = cfg.k();
    double a = cfg.a();
    if (!((k + 1) * a < 1.0))
        throw InvalidParams("one-param waiting-time matching needs (k+1) a < 1");
    double p = a / (1.0 - k * a);
    double q = 1.0 - p;

    BSeries bs = b_coeffs(cfg, L);
    std::vector<double> d = shifted_diff(bs, p);

    Kahan s_lin, s_flat;
    for (long l = 1; l <= L; ++l) {
        double ad = std::abs(d[std::size_t(l)]);
        s_lin.add(double(l) * ad);
        s_flat.add(ad);
    }
    double t1 = (1.0 - k * a) * s_lin.sum;
    double t2 = double(k) * double(k - 1) * a;
    double t3 = k * a * s_flat.sum;

    double dl = std::abs(d[std::size_t(L)]), dp = std::abs(d[std::size_t(L - 1)]);
    GeomTail g = geom_tail(dl, dp);
    double tail = (1.0 - k * a) * tail_linear(g, dl, L) + k * a * (g.finite ? dl * g.s0 : HUGE_VAL);

    BoundReport r;
    r.scheme = Scheme::K1K2One;
    // alpha q = n convention of the waiting-time matching
    r.nb = make_nb(double(cfg.n) / q, p);
    r.bound = t1 + t2 + t3;
    r.terms = {{"(1-ka) * weighted series", t1},
               {"k(k-1)a", t2},
               {"ka * flat series", t3}};
    r.truncation_L = L;
    r.tail_estimate = tail;
    return r;
}

BoundReport two_param_bound_k1k2(const K1K2Config& cfg, long L) {
    long k = cfg.k();
    double a = cfg.a();
    double hyp = 1.0 - 2.0 * k * a + k * a * a;
    if (!(hyp > 0.0))
        throw InvalidParams("two-param waiting-time matching needs 1 - 2ka + ka^2 > 0");
    double p = (1.0 - k * a) * a / (1.0 - (2.0 * k - 1.0) * a);
    if (!(p > 0.0 && p < 1.0))
        throw InvalidParams("two-param waiting-time matching left p outside (0,1)");
    double alpha = double(cfg.n) * (1.0 - k * a) * (1.0 - k * a) / hyp;

    BSeries bs = b_coeffs(cfg, L);
    std::vector<double> d = shifted_diff(bs, p);

    Kahan s_main, s_shift;
    for (long l = 1; l <= L; ++l)
        s_main.add(0.5 * double(l) * double(l - 1) * std::abs(d[std::size_t(l)]));
    for (long l = k; l <= L; ++l)
        s_shift.add(0.5 * double(l) * double(l - 1) * std::abs(d[std::size_t(l - k + 1)]));

    double smoothing =
        std::sqrt(2.0 / M_PI) /
        std::sqrt(0.25 + double(cfg.n) * (1.0 - 0.5 * a * (1.0 + a)));
    // Matching fixes alpha q through the mean equation, so the series
    // prefactor n/(alpha q) reduces to (1 - (2k-1)a).
    double pref = (1.0 - (2.0 * k - 1.0) * a) * smoothing;

    double mid = 0.5 * double(k) * double(k - 1) * double(k - 2) * a;
    double t1 = pref * s_main.sum;
    double t2 = pref * mid;
    double t3 = pref * k * a * s_shift.sum;

    double dl = std::abs(d[std::size_t(L)]), dp = std::abs(d[std::size_t(L - 1)]);
    GeomTail g = geom_tail(dl, dp);
    double dls = std::abs(d[std::size_t(L - k + 1)]);
    double tail = pref * (tail_quadratic_half(g, dl, L) + k * a * tail_quadratic_half(g, dls, L));

    BoundReport r;
    r.scheme = Scheme::K1K2Two;
    r.nb = make_nb(alpha, p);
    r.bound = t1 + t2 + t3;
    r.terms = {{"quadratic series", t1},
               {"k(k-1)(k-2)/2 a", t2},
               {"ka * shifted quadratic series", t3}};
    r.truncation_L = L;
    r.tail_estimate = tail;
    return r;
}

const std::vector<std::pair<int, int>>& table_grid() {
    static const std::vector<std::pair<int, int>> grid = {
        {1, 4}, {1, 5}, {1, 6}, {1, 7}, {1, 8}, {1, 9}, {2, 4}, {2, 5}, {2, 6}, {2, 7},
        {2, 8}, {3, 4}, {3, 5}, {3, 6}, {3, 7}, {4, 4}, {4, 5}, {4, 6}, {5, 4}, {5, 5},
        {6, 4}};
    return grid;
}

std::vector<TableCell> one_param_table(long L) {
    const double pbars[] = {0.25, 0.125, 0.0625};
    std::vector<TableCell> cells;
    for (auto [k1, k2] : table_grid())
        for (double pb : pbars) {
            TableCell cell{k1, k2, pb, 1, 0.0, 0.0, {}};
            try {
                BoundReport r = one_param_bound_k1k2(K1K2Config(k1, k2, pb, 1), L);
                cell.bound = r.bound;
                cell.tail_estimate = r.tail_estimate;
            } catch (const Error& e) {
                cell.bound = std::nan("");
                cell.flags.push_back(e.what());
            }
            cells.push_back(std::move(cell));
        }
    return cells;
}

std::vector<TableCell> two_param_table(long L) {
    const double pbars[] = {0.25, 0.125, 0.0625};
    const int ns[] = {50, 100};
    std::vector<TableCell> cells;
    for (auto [k1, k2] : table_grid())
        for (double pb : pbars)
            for (int n : ns) {
                TableCell cell{k1, k2, pb, n, 0.0, 0.0, {}};
                try {
                    BoundReport r = two_param_bound_k1k2(K1K2Config(k1, k2, pb, n), L);
                    cell.bound = r.bound;
                    cell.tail_estimate = r.tail_estimate;
                } catch (const Error& e) {
                    cell.bound = std::nan("");
                    cell.flags.push_back(e.what());
                }
                cells.push_back(std::move(cell));
            }
    return cells;
}

} // namespace nbstein
