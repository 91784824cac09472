#include "nbstein/bounds.hpp"
#include "nbstein/errors.hpp"
#include "nbstein/k1k2.hpp"
#include "nbstein/oracle.hpp"
#include "nbstein/steinop.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

using nlohmann::json;
using namespace nbstein;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitInadmissible = 2;
constexpr int kExitViolation = 3;

std::string sig6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string join(const std::vector<std::string>& parts, const char* sep = "; ") {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

struct OutputTarget {
    std::string path; // empty = stdout

    void write(const std::string& text) const {
        if (path.empty() || path == "-") {
            std::cout << text;
            if (!text.empty() && text.back() != '\n') std::cout << '\n';
        } else {
            std::ofstream f(path);
            if (!f) throw SchemaError("cannot open output path: " + path);
            f << text;
            if (!text.empty() && text.back() != '\n') f << '\n';
        }
    }
};

// A report is a flat list of named rows plus an optional table; each format
// renders the same payload.
struct Row {
    std::string key;
    json value;
};

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<json>> rows;
};

std::string cell_text(const json& v) {
    if (v.is_number_float()) return sig6(v.get<double>());
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
}

std::string render(const std::vector<Row>& rows, const Table* table, const std::string& fmt) {
    if (fmt == "json") {
        json doc = json::object();
        for (const auto& r : rows) doc[r.key] = r.value;
        if (table) {
            json arr = json::array();
            for (const auto& tr : table->rows) {
                json obj = json::object();
                for (std::size_t c = 0; c < table->columns.size(); ++c)
                    obj[table->columns[c]] = tr[c];
                arr.push_back(std::move(obj));
            }
            doc["rows"] = std::move(arr);
        }
        return doc.dump(2);
    }
    if (fmt == "csv") {
        std::ostringstream out;
        if (table) {
            out << join(table->columns, ",") << "\n";
            for (const auto& tr : table->rows) {
                for (std::size_t c = 0; c < tr.size(); ++c) {
                    if (c) out << ",";
                    std::string t = cell_text(tr[c]);
                    if (t.find(',') != std::string::npos) t = "\"" + t + "\"";
                    out << t;
                }
                out << "\n";
            }
        } else {
            out << "key,value\n";
            for (const auto& r : rows) out << r.key << "," << cell_text(r.value) << "\n";
        }
        return out.str();
    }
    // markdown
    std::ostringstream out;
    for (const auto& r : rows) out << "- **" << r.key << "**: " << cell_text(r.value) << "\n";
    if (table) {
        out << "\n| " << join(table->columns, " | ") << " |\n|";
        for (std::size_t c = 0; c < table->columns.size(); ++c) out << " --- |";
        out << "\n";
        for (const auto& tr : table->rows) {
            out << "|";
            for (const auto& v : tr) out << " " << cell_text(v) << " |";
            out << "\n";
        }
    }
    return out.str();
}

void reject_unknown(const json& obj, const std::vector<std::string>& allowed,
                    const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const auto& k : allowed)
            if (it.key() == k) ok = true;
        if (!ok) throw SchemaError("unknown field '" + it.key() + "' in " + where);
    }
}

double require_number(const json& obj, const std::string& key, const std::string& where) {
    if (!obj.contains(key)) throw SchemaError("missing field '" + key + "' in " + where);
    if (!obj[key].is_number()) throw SchemaError("field '" + key + "' in " + where + " must be a number");
    return obj[key].get<double>();
}

int read_count(const json& obj, const std::string& where) {
    if (!obj.contains("count")) return 1;
    if (!obj["count"].is_number_integer())
        throw SchemaError("field 'count' in " + where + " must be an integer");
    int c = obj["count"].get<int>();
    if (c < 1) throw SchemaError("field 'count' in " + where + " must be >= 1");
    return c;
}

Mixture parse_mixture(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw SchemaError("cannot open mixture file: " + path);
    json doc;
    try {
        doc = json::parse(f);
    } catch (const json::parse_error& e) {
        throw SchemaError(std::string("mixture file is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw SchemaError("mixture file must hold a JSON object");
    reject_unknown(doc, {"components"}, "mixture root");
    if (!doc.contains("components") || !doc["components"].is_array() ||
        doc["components"].empty())
        throw SchemaError("mixture root needs a non-empty 'components' array");

    Mixture mix;
    int idx = 0;
    for (const auto& c : doc["components"]) {
        std::string where = "components[" + std::to_string(idx++) + "]";
        if (!c.is_object()) throw SchemaError(where + " must be an object");
        if (!c.contains("type") || !c["type"].is_string())
            throw SchemaError(where + " needs a string 'type'");
        std::string type = c["type"].get<std::string>();
        try {
            if (type == "geometric") {
                reject_unknown(c, {"type", "p", "count"}, where);
                mix.push_back(ComponentSpec::geometric(require_number(c, "p", where),
                                                       read_count(c, where)));
            } else if (type == "poisson") {
                reject_unknown(c, {"type", "lambda", "count"}, where);
                mix.push_back(ComponentSpec::poisson(require_number(c, "lambda", where),
                                                     read_count(c, where)));
            } else if (type == "binomial") {
                reject_unknown(c, {"type", "n", "p", "count"}, where);
                double n = require_number(c, "n", where);
                if (n != std::floor(n) || n < 1)
                    throw SchemaError("field 'n' in " + where + " must be a positive integer");
                mix.push_back(ComponentSpec::binomial(int(n), require_number(c, "p", where),
                                                      read_count(c, where)));
            } else if (type == "generic") {
                reject_unknown(c, {"type", "a", "pmf", "count"}, where);
                if (!c.contains("a") || !c["a"].is_array() || !c.contains("pmf") ||
                    !c["pmf"].is_array())
                    throw SchemaError(where + " (generic) needs arrays 'a' and 'pmf'");
                std::vector<double> a = c["a"].get<std::vector<double>>();
                std::vector<double> pv = c["pmf"].get<std::vector<double>>();
                Eigen::ArrayXd probs(Eigen::Index(pv.size()));
                for (std::size_t i = 0; i < pv.size(); ++i) probs[Eigen::Index(i)] = pv[i];
                mix.push_back(ComponentSpec::generic(
                    std::move(a), Pmf::with_implied_tail(std::move(probs)),
                    read_count(c, where)));
            } else {
                throw SchemaError("unknown component type '" + type + "' in " + where);
            }
        } catch (const InvalidParams& e) {
            throw SchemaError(where + ": " + e.what());
        }
    }
    return mix;
}

std::vector<std::string> mixture_flags(const Mixture& mix) {
    std::vector<std::string> flags;
    for (const auto& spec : mix)
        for (const auto& f : spec.hypothesis_flags()) flags.push_back(f);
    return flags;
}

long default_truncation() {
    if (const char* env = std::getenv("NB_STEIN_TRUNCATION")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || v < 10)
            throw SchemaError("NB_STEIN_TRUNCATION must be an integer >= 10");
        return v;
    }
    return 3000;
}

std::vector<Row> bound_rows(const BoundReport& rep, const std::vector<std::string>& flags) {
    std::vector<Row> rows;
    rows.push_back({"scheme", scheme_name(rep.scheme)});
    rows.push_back({"alpha", rep.nb.alpha});
    rows.push_back({"p", rep.nb.p});
    if (rep.fit) {
        rows.push_back({"p_hat", rep.fit->p_hat});
        rows.push_back({"r", rep.fit->r});
        rows.push_back({"eta", rep.fit->eta.eta});
    }
    rows.push_back({"bound", rep.bound});
    for (const auto& [name, value] : rep.terms) rows.push_back({"term: " + name, value});
    rows.push_back({"truncation", rep.truncation_L});
    rows.push_back({"tail_estimate", rep.tail_estimate});
    std::vector<std::string> all;
    for (const auto& f : flags)
        if (std::find(all.begin(), all.end(), f) == all.end()) all.push_back(f);
    for (const auto& f : rep.hypothesis_flags)
        if (std::find(all.begin(), all.end(), f) == all.end()) all.push_back(f);
    rows.push_back({"flags", join(all)});
    return rows;
}

Table cells_to_table(const std::vector<TableCell>& cells, const char* scheme) {
    Table t;
    t.columns = {"k1", "k2", "p_bar", "n", "scheme", "bound", "tail_estimate", "flags"};
    for (const auto& c : cells)
        t.rows.push_back({c.k1, c.k2, c.p_bar, c.n, scheme, c.bound, c.tail_estimate,
                          join(c.flags)});
    return t;
}

struct CommonOpts {
    std::string mixture_file;
    std::string scheme = "two-param";
    long truncation = -1; // resolved later
    std::string format = "json";
    std::string output;
    int k1 = -1, k2 = -1, n = 1;
    double p_bar = 0;
    std::uint64_t seed = 1;

    long L() const { return truncation >= 0 ? truncation : default_truncation(); }
    bool has_k1k2() const { return k1 >= 0 || k2 >= 0; }
    K1K2Config k1k2() const {
        if (k1 < 0 || k2 < 0 || !(p_bar > 0))
            throw SchemaError("waiting-time commands need --k1, --k2 and --p-bar");
        return K1K2Config(k1, k2, p_bar, n);
    }
};

void add_io_flags(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--truncation", o.truncation, "series truncation length L")
        ->check(CLI::Range(10L, 100000000L));
    cmd->add_option("--format", o.format, "output format")
        ->check(CLI::IsMember({"csv", "json", "md"}));
    cmd->add_option("--output", o.output, "output path (default stdout)");
}

BoundReport run_bound(const CommonOpts& o, const Mixture& mix, bool closed_form,
                      double fixed_alpha, double fixed_p) {
    AggregateMoments m = aggregate(mix);
    if (o.scheme == "one-param") {
        NbParams nb;
        if (fixed_alpha > 0)
            nb = match_one_param(m, OneParamMode::FixedAlpha, fixed_alpha);
        else if (fixed_p > 0)
            nb = match_one_param(m, OneParamMode::FixedP, fixed_p);
        else
            nb = match_one_param(m, OneParamMode::FixedP, m.mu / m.sigma2);
        return closed_form ? first_order_closed_form(mix, nb)
                           : first_order_bound(mix, nb, o.L());
    }
    if (o.scheme == "two-param") {
        NbParams nb = match_two_param(m);
        return closed_form ? second_order_closed_form(mix, nb)
                           : second_order_bound(mix, nb, o.L());
    }
    if (o.scheme == "three-param") {
        ThreeParamFit fit = match_three_param(m);
        return closed_form ? third_order_closed_form(mix, fit)
                           : third_order_bound(mix, fit, o.L());
    }
    throw SchemaError("unknown scheme: " + o.scheme);
}

Scheme scheme_from_name(const std::string& s) {
    if (s == "one-param") return Scheme::OneParam;
    if (s == "two-param") return Scheme::TwoParam;
    if (s == "three-param") return Scheme::ThreeParam;
    if (s == "k1k2-one") return Scheme::K1K2One;
    if (s == "k1k2-two") return Scheme::K1K2Two;
    throw SchemaError("unknown scheme: " + s);
}

int cmd_verify(const CommonOpts& o, long pmf_truncation) {
    DominationReport rep;
    if (o.has_k1k2())
        rep = verify_domination_k1k2(o.k1k2(), scheme_from_name(o.scheme), o.L(),
                                     pmf_truncation);
    else
        rep = verify_domination(parse_mixture(o.mixture_file), scheme_from_name(o.scheme),
                                o.L(), pmf_truncation);
    std::vector<Row> rows = {{"scheme", o.scheme},
                             {"tv", rep.tv},
                             {"tv_error", rep.tv_error},
                             {"bound", rep.bound},
                             {"bound_tail", rep.bound_tail},
                             {"margin", rep.margin},
                             {"dominated", rep.ok}};
    OutputTarget{o.output}.write(render(rows, nullptr, o.format));
    return rep.ok ? 0 : kExitViolation;
}

int cmd_simulate(const CommonOpts& o, long trials) {
    K1K2Config cfg = o.k1k2();
    long L = o.L();
    SimulationRun run = simulate_k1k2(cfg, trials, o.seed, L);
    Pmf exact = waiting_pmf(cfg, L);

    double max_z = 0;
    long max_z_bin = -1, checked = 0;
    Table t;
    t.columns = {"m", "exact", "empirical", "std_error", "z"};
    for (long m = 0; m < L; ++m) {
        double pm = exact.at(m);
        double expected = pm * double(trials);
        double se = std::sqrt(pm * (1.0 - pm) / double(trials));
        double z = se > 0 ? (run.empirical.at(m) - pm) / se : 0.0;
        if (expected >= 20.0) {
            ++checked;
            if (std::abs(z) > std::abs(max_z)) {
                max_z = z;
                max_z_bin = m;
            }
            if (m < 50) t.rows.push_back({m, pm, run.empirical.at(m), se, z});
        }
    }
    bool ok = std::abs(max_z) <= 4.0;
    std::vector<Row> rows = {{"k1", cfg.k1},
                             {"k2", cfg.k2},
                             {"p_bar", cfg.p_bar},
                             {"n", cfg.n},
                             {"trials", trials},
                             {"seed", o.seed},
                             {"bins_checked", checked},
                             {"max_abs_z", std::abs(max_z)},
                             {"max_z_bin", max_z_bin},
                             {"consistent", ok}};
    OutputTarget{o.output}.write(render(rows, &t, o.format));
    return ok ? 0 : kExitViolation;
}

int cmd_stein_check(const CommonOpts& o, const std::string& op_name, long num_g,
                    long g_support) {
    long L = o.L();
    Pmf law;
    std::function<double(long)> make; // bound below per operator
    Mixture mix;
    NbParams nb;
    ThreeParamFit fit;
    K1K2Config cfg(1, 1, 0.5, 1); // replaced when the k1k2 operator is chosen

    const TestFunction* gp = nullptr;
    auto op_for = [&](const TestFunction& g) -> std::function<double(long)> {
        gp = &g;
        if (op_name == "nb") return [&](long m) { return nb_stein_apply(nb, *gp, m); };
        if (op_name == "y")
            return [&](long m) { return y_stein_apply(mix, nb, *gp, m, L); };
        if (op_name == "v") return [&](long m) { return v_stein_apply(fit, *gp, m, L); };
        return [&](long m) { return k1k2_stein_apply(cfg, nb, *gp, m, L); };
    };

    if (op_name == "k1k2") {
        cfg = o.k1k2();
        double p = cfg.a() / (1.0 - cfg.k() * cfg.a());
        nb = make_nb(double(cfg.n) / (1.0 - p), p);
        law = waiting_pmf(cfg, L);
    } else {
        mix = parse_mixture(o.mixture_file);
        AggregateMoments m = aggregate(mix);
        if (op_name == "nb" || op_name == "y") {
            nb = match_two_param(m);
            law = (op_name == "nb") ? nb_pmf(nb, L) : mixture_pmf(mix, L);
        } else if (op_name == "v") {
            fit = match_three_param(m);
            nb = fit.nb;
            law = three_param_pmf(fit, L);
        } else {
            throw SchemaError("unknown operator: " + op_name);
        }
    }

    double worst = 0;
    long worst_g = -1;
    bool ok = true;
    for (long i = 0; i < num_g; ++i) {
        TestFunction g = random_test_function(g_support, o.seed + std::uint64_t(i));
        double e = stein_expectation(op_for(g), law, g);
        double tol = 1e-8 + g.sup_abs() * law.tail_mass();
        if (std::abs(e) > worst) {
            worst = std::abs(e);
            worst_g = i;
        }
        if (std::abs(e) > tol) ok = false;
    }
    std::vector<Row> rows = {{"operator", op_name},
                             {"test_functions", num_g},
                             {"g_support", g_support},
                             {"max_abs_expectation", worst},
                             {"worst_seed_offset", worst_g},
                             {"pmf_tail_mass", law.tail_mass()},
                             {"identity_holds", ok}};
    OutputTarget{o.output}.write(render(rows, nullptr, o.format));
    return ok ? 0 : kExitViolation;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Negative binomial approximation bounds for sums of Z+ random variables"};
    app.require_subcommand(1);

    CommonOpts o;
    bool closed_form = false;
    double fixed_alpha = -1, fixed_p = -1;
    long pmf_truncation = 20000;
    long trials = 1000000;
    std::string op_name = "nb";
    long num_g = 100, g_support = 200;

    auto* bound = app.add_subcommand("bound", "compute an approximation bound for a mixture");
    bound->add_option("--mixture", o.mixture_file, "mixture JSON file")->required();
    bound->add_option("--scheme", o.scheme, "matching scheme")
        ->check(CLI::IsMember({"one-param", "two-param", "three-param"}));
    bound->add_flag("--closed-form", closed_form, "use the per-family closed forms");
    bound->add_option("--alpha", fixed_alpha, "one-param: fix alpha");
    bound->add_option("--p", fixed_p, "one-param: fix p");
    add_io_flags(bound, o);

    auto* t1 = app.add_subcommand("table1", "mean-matched waiting-time bound grid");
    add_io_flags(t1, o);
    auto* t2 = app.add_subcommand("table2", "mean+variance-matched waiting-time bound grid");
    add_io_flags(t2, o);

    auto* verify = app.add_subcommand("verify", "check a bound against the exact law");
    verify->add_option("--mixture", o.mixture_file, "mixture JSON file");
    verify->add_option("--scheme", o.scheme, "matching scheme")
        ->check(CLI::IsMember({"one-param", "two-param", "three-param", "k1k2-one", "k1k2-two"}));
    verify->add_option("--k1", o.k1, "failure run length");
    verify->add_option("--k2", o.k2, "success run length");
    verify->add_option("--p-bar", o.p_bar, "Bernoulli success probability");
    verify->add_option("--n", o.n, "number of events");
    verify->add_option("--pmf-truncation", pmf_truncation, "exact-law support length");
    add_io_flags(verify, o);

    auto* sim = app.add_subcommand("simulate", "Monte Carlo waiting times vs the exact law");
    sim->add_option("--k1", o.k1, "failure run length")->required();
    sim->add_option("--k2", o.k2, "success run length")->required();
    sim->add_option("--p-bar", o.p_bar, "Bernoulli success probability")->required();
    sim->add_option("--n", o.n, "number of events");
    sim->add_option("--trials", trials, "Monte Carlo sample size");
    sim->add_option("--seed", o.seed, "random seed");
    add_io_flags(sim, o);

    auto* stein = app.add_subcommand("stein-check", "verify a Stein identity E[Ag] = 0");
    stein->add_option("--operator", op_name, "operator to check")
        ->check(CLI::IsMember({"nb", "y", "v", "k1k2"}));
    stein->add_option("--mixture", o.mixture_file, "mixture JSON file (nb/y/v)");
    stein->add_option("--k1", o.k1, "failure run length");
    stein->add_option("--k2", o.k2, "success run length");
    stein->add_option("--p-bar", o.p_bar, "Bernoulli success probability");
    stein->add_option("--n", o.n, "number of events");
    stein->add_option("--num-g", num_g, "number of random test functions");
    stein->add_option("--g-support", g_support, "test function support length");
    stein->add_option("--seed", o.seed, "random seed");
    add_io_flags(stein, o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kExitUsage;
    }

    try {
        if (bound->parsed()) {
            Mixture mix = parse_mixture(o.mixture_file);
            BoundReport rep = run_bound(o, mix, closed_form, fixed_alpha, fixed_p);
            OutputTarget{o.output}.write(
                render(bound_rows(rep, mixture_flags(mix)), nullptr, o.format));
            return 0;
        }
        if (t1->parsed()) {
            Table t = cells_to_table(one_param_table(o.L()), "k1k2-one");
            OutputTarget{o.output}.write(render({}, &t, o.format));
            return 0;
        }
        if (t2->parsed()) {
            Table t = cells_to_table(two_param_table(o.L()), "k1k2-two");
            OutputTarget{o.output}.write(render({}, &t, o.format));
            return 0;
        }
        if (verify->parsed()) return cmd_verify(o, pmf_truncation);
        if (sim->parsed()) return cmd_simulate(o, trials);
        if (stein->parsed()) return cmd_stein_check(o, op_name, num_g, g_support);
    } catch (const SchemaError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInadmissible;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitViolation;
    }
    return kExitUsage;
}
