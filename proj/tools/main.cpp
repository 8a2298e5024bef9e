#include "pascalcert/certificate.hpp"
#include "pascalcert/interval.hpp"
#include "pascalcert/magnifier.hpp"
#include "pascalcert/oracle.hpp"
#include "pascalcert/pascal.hpp"
#include "pascalcert/predictor.hpp"
#include "pascalcert/recurrence.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

using namespace pascalcert;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kFailed = 2, kBudget = 3, kUsage = 4 };

class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct RunConfig {
    Precision precision = kDefaultPrecision;
    Precision precision_cap = kDefaultPrecisionCap;
    unsigned workers = 1;
    std::uint64_t budget_scan = kDefaultScanBudget;
    unsigned max_resolution = 1'000'000;
    std::string schedule_file;
    std::string out;
    std::string replay;

    void validate() const {
        if (precision < 53) throw UsageError("--precision must be at least 53");
        if (precision_cap < precision) throw UsageError("--precision-cap must be at least --precision");
        if (workers == 0) throw UsageError("--workers must be positive");
        if (budget_scan == 0) throw UsageError("--budget-scan must be positive");
    }

    [[nodiscard]] SweepPolicy policy() const {
        SweepPolicy s;
        s.start = precision;
        s.cap = precision_cap;
        s.workers = workers;
        return s;
    }
};

/// Writes to --out when given, stdout otherwise.
class Output {
public:
    explicit Output(const std::string& path) {
        if (!path.empty() && path != "-") {
            file_.open(path);
            if (!file_) throw UsageError("cannot open " + path + " for writing");
        }
    }
    std::ostream& os() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

private:
    std::ofstream file_;
};

unsigned checked_prime(long p, bool allow_two = false) {
    if (p < 2 || !is_prime(static_cast<unsigned long>(p)) || (p == 2 && !allow_two)) {
        throw UsageError("p must be an odd prime, got " + std::to_string(p));
    }
    return static_cast<unsigned>(p);
}

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw UsageError(path + ": " + e.what());
    }
}

std::string fmt_interval(const RInterval& v, int digits = 17) { return v.lower_string(digits) + "," + v.upper_string(digits); }

int cmd_beta(const RunConfig& cfg, long p_arg, std::optional<long> xi, std::optional<long> eta) {
    const unsigned p = checked_prime(p_arg);
    PrimeContext ctx(p);
    std::ostream& os = std::cout;
    os << "p = " << p << ", rho = " << ctx.rho(cfg.precision).lower_string(20) << "\n";
    if (xi || eta) {
        if (!xi || !eta) throw UsageError("give both xi and eta");
        check_candidate(ctx, *xi, *eta);
        CandidatePoint c = make_candidate(ctx, *xi, *eta, cfg.precision);
        os << "candidate (" << *xi << "," << *eta << "): s_hat = " << c.s_hat.str() << ", B in [" << c.B.lower_string(20)
           << ", " << c.B.upper_string(20) << "]\n";
        return kOk;
    }
    if (p >= 11) {
        Prediction pr = predict_xi_eta(p);
        char buf[160];
        std::snprintf(buf, sizeof buf, "prediction: xi = %.6f, eta = %.6f -> (%ld,%ld)\n", pr.xi, pr.eta, pr.xi_rounded,
                      pr.eta_rounded);
        os << buf;
    }
    std::vector<RankedCandidate> ranked = search_candidates(ctx, 2, cfg.precision);
    os << "rank xi eta s_hat B_lo B_hi\n";
    for (std::size_t i = 0; i < ranked.size() && i < 10; ++i) {
        const auto& c = ranked[i].point;
        os << i + 1 << ' ' << c.xi << ' ' << c.eta << ' ' << c.s_hat.str() << ' ' << c.B.lower_string(20) << ' '
           << c.B.upper_string(20) << (ranked[i].ambiguous ? " ambiguous" : "") << "\n";
    }
    GridResult g = grid_argmin(ctx, cfg.precision);
    os << "winner (" << g.xi << "," << g.eta << "), beta in [" << g.B.lower_string(20) << ", " << g.B.upper_string(20) << "]"
       << (g.separated ? "" : " (not separated from a contender)") << "\n";
    return kOk;
}

int report_certificate(const Certificate& cert, const RunConfig& cfg) {
    std::string path = cfg.out.empty() ? "cert-" + std::to_string(cert.p) + ".json" : cfg.out;
    Output out(path);
    out.os() << cert.to_json().dump(2) << "\n";
    std::cerr << "p = " << cert.p << ", (" << cert.xi << "," << cert.eta << "): " << (cert.valid ? "certified" : "NOT certified")
              << ", beta in [" << cert.beta.lower_string(20) << ", " << cert.beta.upper_string(20) << "]\n";
    if (!cert.valid) std::cerr << "failure: " << cert.failure << "\n";
    return cert.valid ? kOk : kFailed;
}

int cmd_certify(const RunConfig& cfg, std::optional<long> p_arg, std::optional<long> xi, std::optional<long> eta) {
    if (!cfg.replay.empty()) {
        ReplayReport rep = replay_certificate(read_json(cfg.replay), cfg.workers);
        std::cout << "replayed " << rep.sweeps_checked << " sweeps: " << (rep.ok ? "ok" : "FAILED") << "\n";
        for (const auto& msg : rep.problems) std::cout << "  " << msg << "\n";
        return rep.ok ? kOk : kFailed;
    }
    if (!p_arg) throw UsageError("certify needs p (or --replay FILE)");
    const unsigned p = checked_prime(*p_arg);
    PrimeContext ctx(p);
    if (xi.has_value() != eta.has_value()) throw UsageError("give both xi and eta");
    if (!xi) {
        GridResult g = grid_argmin(ctx, cfg.precision);
        xi = g.xi;
        eta = g.eta;
    }
    check_candidate(ctx, *xi, *eta);
    Schedule sch;
    if (!cfg.schedule_file.empty()) sch = schedule_from_json(read_json(cfg.schedule_file), default_schedule(ctx, *xi, *eta));
    CertifyOptions opt;
    opt.policy = cfg.policy();
    return report_certificate(certify_beta(ctx, *xi, *eta, sch, opt), cfg);
}

int cmd_table(const RunConfig& cfg, long p_max, long certify_max) {
    if (p_max < 3) throw UsageError("p_max must be at least 3");
    if (p_max > 2221) throw UsageError("p_max is capped at 2221");
    Output out(cfg.out);
    std::ostream& os = out.os();
    os << "p,xi,eta,s_hat,beta_lo,beta_hi,certified\n";
    int status = kOk;
    CertifyOptions opt;
    opt.policy = cfg.policy();
    for (long p = 3; p <= p_max; p += 2) {
        if (!is_prime(static_cast<unsigned long>(p))) continue;
        PrimeContext ctx(static_cast<unsigned>(p));
        GridResult g = grid_argmin(ctx, cfg.precision);
        std::string state;
        RInterval beta = g.B;
        if (p <= certify_max) {
            Certificate c = certify_beta(ctx, g.xi, g.eta, opt);
            state = c.valid ? "yes" : "no";
            beta = c.beta;
            if (!c.valid) {
                status = kFailed;
                std::cerr << "p = " << p << ": " << c.failure << "\n";
            }
        } else {
            // Past the certification range only the grid optimum is checked.
            state = g.separated ? "grid" : "grid-tie";
            if (!g.separated) status = kFailed;
        }
        os << p << ',' << g.xi << ',' << g.eta << ',' << s_hat(ctx, g.xi, g.eta).str() << ',' << fmt_interval(beta) << ','
           << state << '\n';
        os.flush();
    }
    return status;
}

int cmd_plot(const RunConfig& cfg, long p_arg, const std::string& what, unsigned resolution, std::optional<long> xi,
             std::optional<long> eta) {
    const unsigned p = checked_prime(p_arg, what == "P");
    if (resolution == 0 || resolution > cfg.max_resolution) throw UsageError("resolution must be in [1, 1000000]");
    PrimeContext ctx(p);
    Output out(cfg.out);
    std::ostream& os = out.os();
    const Precision bits = cfg.precision;
    const BigRational R(static_cast<unsigned long>(resolution));
    auto mid_half = [](const RInterval& v) {
        const Precision b = v.precision();
        RInterval h = (RInterval(v.upper_rational(), b) - RInterval(v.lower_rational(), b)) * RInterval(BigRational(1, 2), b);
        return v.lower_string(17) + "," + v.upper_string(17) + "," + h.upper_string(3);
    };
    if (what == "G") {
        os << "s,G_lo,G_hi,half_width\n";
        BigRational a(1, p);
        for (unsigned i = 0; i <= resolution; ++i) {
            BigRational s = a + (BigRational(1) - a) * BigRational(static_cast<unsigned long>(i)) / R;
            os << s.str() << ',' << mid_half(G(ctx, s, bits)) << '\n';
        }
    } else if (what == "P") {
        os << "t,P_lo,P_hi,half_width\n";
        for (unsigned i = 0; i < resolution; ++i) {
            BigRational t = BigRational(static_cast<unsigned long>(i)) / R;
            os << t.str() << ',' << mid_half(periodic_P_enclosure(ctx.spec(), t, bits)) << '\n';
        }
    } else if (what == "Q-vs-E") {
        if (xi.has_value() != eta.has_value()) throw UsageError("give both xi and eta");
        if (!xi) {
            GridResult g = grid_argmin(ctx, bits);
            xi = g.xi;
            eta = g.eta;
        }
        check_candidate(ctx, *xi, *eta);
        MagnifierConfig mc = default_magnifier(ctx, *xi, *eta);
        RInterval rho = ctx.rho(bits);
        os << "t,Q_lo,Q_hi,Q_half_width,E_lo,E_hi,E_half_width\n";
        for (unsigned i = 0; i <= resolution; ++i) {
            BigRational t = BigRational(static_cast<unsigned long>(i)) / R;
            os << t.str() << ',' << mid_half(Q_mu(mc, ctx, t).eval(rho)) << ',' << mid_half(E_mu_k(mc, ctx, t).eval(rho)) << '\n';
        }
    } else {
        throw UsageError("plot: what must be G, P or Q-vs-E");
    }
    return kOk;
}

int cmd_recur(const RunConfig& cfg, const std::string& spec_file, const std::string& action, const std::vector<std::string>& xs,
              unsigned r) {
    RecurrenceSpec spec = [&] {
        try {
            return RecurrenceSpec::from_json(read_json(spec_file));
        } catch (const json::exception& e) {
            throw UsageError(spec_file + ": " + e.what());
        }
    }();
    Output out(cfg.out);
    std::ostream& os = out.os();
    if (action == "phi") {
        os << "x,phi\n";
        for (const auto& s : xs) {
            BigRational x = BigRational::parse(s);
            if (x < 0 || x > 1) throw UsageError("phi: x must lie in [0, 1]");
            os << x.str() << ',' << phi_exact(spec, x).str() << '\n';
        }
    } else if (action == "f") {
        os << "x,f\n";
        for (const auto& s : xs) {
            BigRational x = BigRational::parse(s);
            if (x < 1) throw UsageError("f: x must be at least 1");
            os << x.str() << ',' << f_real(spec, x).str() << '\n';
        }
    } else if (action == "scan") {
        if (r == 0) throw UsageError("scan: --r must be at least 1");
        ScanBracket b = sup_inf_scan(spec, r, cfg.budget_scan, cfg.precision);
        json j;
        j["p"] = spec.p();
        j["r"] = r;
        j["inf"] = {b.min_bracket.lower_string(20), b.min_bracket.upper_string(20)};
        j["sup"] = {b.max_bracket.lower_string(20), b.max_bracket.upper_string(20)};
        j["argmin"] = b.argmin.get_str();
        j["argmax"] = b.argmax.get_str();
        os << j.dump(2) << '\n';
    } else {
        throw UsageError("recur: action must be phi, f or scan");
    }
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Certified density constants of Pascal's triangle modulo a prime"};
    app.require_subcommand(1);
    app.fallthrough();
    RunConfig cfg;
    auto env = [](const char* name) { return std::string("PASCALCERT_") + name; };
    app.add_option("--precision", cfg.precision, "working precision in bits")->envname(env("PRECISION"))->capture_default_str();
    app.add_option("--precision-cap", cfg.precision_cap, "largest precision tried before giving up")
        ->envname(env("PRECISION_CAP"))
        ->capture_default_str();
    app.add_option("--workers", cfg.workers, "worker threads for sweeps")->envname(env("WORKERS"))->capture_default_str();
    app.add_option("--budget-scan", cfg.budget_scan, "largest n-range a scan may visit")
        ->envname(env("BUDGET_SCAN"))
        ->capture_default_str();
    app.add_option("--schedule", cfg.schedule_file, "schedule overrides (JSON)")->envname(env("SCHEDULE"));
    app.add_option("--out", cfg.out, "output path")->envname(env("OUT"));
    app.add_option("--replay", cfg.replay, "certificate to re-verify")->envname(env("REPLAY"));

    long p = 0, p_max = 0, certify_max = 113;
    std::optional<long> xi, eta, p_opt;
    unsigned resolution = 1000, r = 0;
    std::string what, spec_file, action;
    std::vector<std::string> xs;

    auto* beta = app.add_subcommand("beta", "rank candidate pairs (xi, eta) and print B");
    beta->add_option("p", p, "odd prime")->required();
    beta->add_option("xi", xi);
    beta->add_option("eta", eta);

    auto* certify = app.add_subcommand("certify", "certify beta_p and write the certificate JSON");
    certify->add_option("p", p_opt, "odd prime");
    certify->add_option("xi", xi);
    certify->add_option("eta", eta);

    auto* table = app.add_subcommand("table", "CSV of optimal pairs and beta up to p_max");
    table->add_option("p_max", p_max)->required();
    table->add_option("--certify-max", certify_max, "certify primes up to this bound, grid check beyond")->capture_default_str();

    auto* plot = app.add_subcommand("plot", "CSV curve data for G, P or Q-vs-E");
    plot->add_option("p", p)->required();
    plot->add_option("what", what)->required()->check(CLI::IsMember({"G", "P", "Q-vs-E"}));
    plot->add_option("resolution", resolution)->capture_default_str();
    plot->add_option("--xi", xi);
    plot->add_option("--eta", eta);

    auto* recur = app.add_subcommand("recur", "generic p-ary recurrence engine");
    recur->add_option("spec", spec_file, "recurrence spec (JSON)")->required();
    recur->add_option("action", action)->required()->check(CLI::IsMember({"phi", "f", "scan"}));
    recur->add_option("--x", xs, "points (rational strings)");
    recur->add_option("--r", r, "scan level r for n in [p^r, p^(r+1)]");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        cfg.validate();
        if (*beta) return cmd_beta(cfg, p, xi, eta);
        if (*certify) return cmd_certify(cfg, p_opt, xi, eta);
        if (*table) return cmd_table(cfg, p_max, certify_max);
        if (*plot) return cmd_plot(cfg, p, what, resolution, xi, eta);
        if (*recur) return cmd_recur(cfg, spec_file, action, xs, r);
    } catch (const BudgetExceeded& e) {
        std::cerr << "budget exceeded: " << e.what() << "\n";
        return kBudget;
    } catch (const PrecisionCapExceeded& e) {
        std::cerr << "precision cap exceeded: " << e.what() << "\n";
        return kBudget;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFailed;
    }
    return kUsage;
}
