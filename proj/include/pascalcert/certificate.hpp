#pragma once

#include "pascalcert/interval.hpp"
#include "pascalcert/magnifier.hpp"
#include "pascalcert/pascal.hpp"
#include "pascalcert/predictor.hpp"
#include "pascalcert/rational.hpp"
#include "pascalcert/sweep.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pascalcert {

inline constexpr int kCertificateVersion = 1;

/// Cut points [x_0, ..., x_d] of one test domain, each piece split into N equal subintervals.
struct PieceSchedule {
    std::vector<BigRational> cuts;
    unsigned N = 500;
    bool adaptive = false;
};

struct Schedule {
    std::optional<unsigned> M, k;
    std::optional<BigInt> m;
    std::optional<PieceSchedule> t_left, t_right, s_left, s_right;
    /// Retry a failing piece with the greedy frontier instead of giving up.
    bool adaptive_fallback = true;
};

/// The four domains: both sides of the removed centre in t, and [1/p, 1] minus the window in s.
struct TestDomains {
    BigRational t_left_end, t_right_start, s_left_end, s_right_start;
    BigRational s_start;
};

inline TestDomains test_domains(const PrimeContext& ctx, const MagnifierConfig& cfg) {
    const long p = ctx.p();
    return {BigRational(1, 2) - BigRational(1, 2 * p), BigRational(1, 2) + BigRational(1, 2 * p), cfg.window_lo(),
            cfg.window_hi(), BigRational(1, p)};
}

namespace detail {

inline PieceSchedule piece(std::vector<BigRational> cuts, unsigned N, bool adaptive = false) {
    return {std::move(cuts), N, adaptive};
}

/// a/p + b/p^2 for rational a, b.
inline BigRational over_p(const BigRational& a, const BigRational& b, long p) {
    return a / BigRational(p) + b / BigRational(p * p);
}

inline BigRational dec(const char* s) { return BigRational::parse(s); }

} // namespace detail

/// Fixed reference schedules for the primes that have them; otherwise one adaptive piece per domain.
inline Schedule default_schedule(const PrimeContext& ctx, long xi, long eta) {
    using detail::dec;
    using detail::over_p;
    using detail::piece;
    const long p = ctx.p();
    MagnifierConfig cfg = default_magnifier(ctx, xi, eta);
    TestDomains d = test_domains(ctx, cfg);
    const BigRational zero(0), one(1), half(1, 2);
    Schedule s;
    auto equal = [&](unsigned n1, unsigned n2, unsigned n3, unsigned n4) {
        s.t_left = piece({zero, d.t_left_end}, n1);
        s.t_right = piece({d.t_right_start, one}, n2);
        s.s_left = piece({d.s_start, d.s_left_end}, n3);
        s.s_right = piece({d.s_right_start, one}, n4);
    };
    static const std::map<long, std::array<unsigned, 4>> kEqual = {
        {3, {9, 7, 9, 16}},         {5, {35, 10, 35, 77}},      {7, {114, 17, 147, 214}},    {11, {40, 148, 32, 236}},
        {13, {62, 131, 53, 373}},   {17, {135, 132, 134, 331}}, {19, {211, 144, 257, 1517}}, {23, {611, 151, 992, 6812}}};
    struct Known {
        long xi, eta;
    };
    static const std::map<long, Known> kStaged = {{29, {2, 1}}, {113, {2, 5}}, {127, {3, 5}}, {491, {4, 15}}, {1993, {5, 49}}};

    auto eq = kEqual.find(p);
    auto st = kStaged.find(p);
    bool table_point = (p <= 7 && xi == 1 && eta == 0) || (p >= 11 && p <= 23 && xi == 1 && eta == 1);
    if (eq != kEqual.end() && table_point) {
        equal(eq->second[0], eq->second[1], eq->second[2], eq->second[3]);
    } else if (st != kStaged.end() && st->second.xi == xi && st->second.eta == eta) {
        const BigRational P(p);
        switch (p) {
        case 29:
            s.t_left = piece({zero, half - BigRational(4) / P, d.t_left_end}, 842);
            s.t_right = piece({d.t_right_start, one}, 216);
            s.s_left = piece({d.s_start, over_p(BigRational(5, 2), BigRational(-3), p), d.s_left_end}, 841);
            s.s_right = piece({d.s_right_start, BigRational(4) / P, one}, 841);
            break;
        case 113:
            s.t_left = piece({zero, half - BigRational(3) / P, d.t_left_end}, 500);
            s.t_right = piece({d.t_right_start, half + BigRational(7, 2) / P, one}, 700);
            s.s_left = piece({d.s_start, over_p(BigRational(5, 2), BigRational(-11), p), d.s_left_end}, 500);
            s.s_right = piece({d.s_right_start, BigRational(5, 2) / P, BigRational(5) / P, one}, 5000);
            break;
        case 127:
            s.t_left = piece({zero, half - BigRational(4) / P, d.t_left_end}, 500);
            s.t_right = piece({d.t_right_start, half + BigRational(9, 2) / P, one}, 500);
            s.s_left = piece({d.s_start, dec("2.3") / P, dec("3.4") / P, d.s_left_end}, 1000);
            s.s_right = piece({d.s_right_start, dec("3.51") / P, BigRational(6) / P, one}, 1200);
            break;
        case 491:
            s.t_left = piece({zero, dec("0.46"), half - BigRational(5, 2) / P, d.t_left_end}, 1000);
            s.t_right = piece({d.t_right_start, half + dec("2.1") / P, dec("0.53"), one}, 1000);
            s.s_left = piece({d.s_start, dec("3.4") / P, dec("3.5") / P, dec("4.45") / P, d.s_left_end}, 5000);
            s.s_right = piece({d.s_right_start, over_p(dec("4.5"), BigRational(-6), p), BigRational(5) / P, BigRational(8) / P, one},
                              5000);
            break;
        case 1993:
            s.t_left = piece({zero, dec("0.485"), dec("0.498"), dec("0.4994"), d.t_left_end}, 4000);
            s.t_right = piece({d.t_right_start, dec("0.501"), dec("0.504"), dec("0.515"), one}, 3000);
            s.s_left = piece({d.s_start, dec("4.45") / P, dec("4.5") / P, dec("5.46") / P, dec("5.474") / P, d.s_left_end}, 12000);
            s.s_right = piece({d.s_right_start, over_p(dec("5.5"), BigRational(-41), p), dec("5.6") / P, BigRational(15) / P, one},
                              10000);
            break;
        default:
            break;
        }
    } else {
        s.t_left = piece({zero, d.t_left_end}, 500, true);
        s.t_right = piece({d.t_right_start, one}, 500, true);
        s.s_left = piece({d.s_start, d.s_left_end}, 500, true);
        s.s_right = piece({d.s_right_start, one}, 500, true);
    }
    return s;
}

inline nlohmann::json schedule_to_json(const Schedule& s) {
    nlohmann::json j;
    if (s.M) j["M"] = *s.M;
    if (s.m) j["m"] = s.m->get_str();
    if (s.k) j["k"] = *s.k;
    j["adaptive_fallback"] = s.adaptive_fallback;
    auto put = [&](const char* name, const std::optional<PieceSchedule>& ps) {
        if (!ps) return;
        nlohmann::json c = nlohmann::json::array();
        for (const auto& x : ps->cuts) c.push_back(x.str());
        j[name] = {{"cuts", c}, {"N", ps->N}, {"adaptive", ps->adaptive}};
    };
    put("t_left", s.t_left);
    put("t_right", s.t_right);
    put("s_left", s.s_left);
    put("s_right", s.s_right);
    return j;
}

/// Reads a schedule file; pieces missing from the file keep the defaults in `base`.
inline Schedule schedule_from_json(const nlohmann::json& j, Schedule base = {}) {
    if (j.contains("M")) base.M = j["M"].get<unsigned>();
    if (j.contains("k")) base.k = j["k"].get<unsigned>();
    if (j.contains("m")) base.m = BigInt(j["m"].is_string() ? j["m"].get<std::string>() : std::to_string(j["m"].get<long>()));
    if (j.contains("adaptive_fallback")) base.adaptive_fallback = j["adaptive_fallback"].get<bool>();
    auto get = [&](const char* name, std::optional<PieceSchedule>& ps) {
        if (!j.contains(name)) return;
        const auto& e = j[name];
        PieceSchedule out;
        for (const auto& c : e.at("cuts")) {
            if (!c.is_string()) throw std::invalid_argument(std::string("schedule: cut points must be \"a/b\" strings in ") + name);
            out.cuts.push_back(BigRational::parse(c.get<std::string>()));
        }
        out.N = e.value("N", 500u);
        out.adaptive = e.value("adaptive", false);
        if (out.N == 0) throw std::invalid_argument(std::string("schedule: N must be positive in ") + name);
        ps = std::move(out);
    };
    get("t_left", base.t_left);
    get("t_right", base.t_right);
    get("s_left", base.s_left);
    get("s_right", base.s_right);
    return base;
}

struct Certificate {
    int version = kCertificateVersion;
    unsigned p = 0;
    long xi = 0, eta = 0;
    BigRational s_hat;
    RInterval beta;
    Precision beta_precision = 256;
    MagnifierConfig magnifier;
    SweepPolicy policy;
    std::vector<BigRational> zoom_points;
    std::vector<SweepRecord> sweeps;
    bool valid = false;
    std::string failure;
    std::optional<CandidatePoint> competitor;

    [[nodiscard]] nlohmann::json to_json() const {
        nlohmann::json j;
        j["version"] = version;
        j["p"] = p;
        j["xi"] = xi;
        j["eta"] = eta;
        j["s_hat"] = s_hat.str();
        j["beta"] = {beta.lower_string(20), beta.upper_string(20)};
        j["beta_precision"] = beta_precision;
        j["magnifier"] = {{"M", magnifier.M}, {"m", magnifier.m.get_str()}, {"k", magnifier.k}};
        j["precision_cap"] = policy.cap;
        j["zoom_identity"] = nlohmann::json::array();
        for (const auto& t : zoom_points) j["zoom_identity"].push_back(t.str());
        j["sweeps"] = nlohmann::json::array();
        for (const auto& s : sweeps) {
            j["sweeps"].push_back({{"kind", kind_name(s.kind)},
                                   {"interval", {s.a.str(), s.b.str()}},
                                   {"N", s.N},
                                   {"min_margin_lo", s.min_margin_lo},
                                   {"precision", s.precision},
                                   {"max_precision", s.max_precision}});
        }
        j["valid"] = valid;
        if (!failure.empty()) j["failure"] = failure;
        if (competitor) j["competitor"] = competitor->to_json(20);
        return j;
    }
};

/// Stops at the first piece that cannot be certified; returns its description.
inline std::optional<std::string> sweep_domain(SweepKind kind, const MarginFn& margin, const PieceSchedule& ps,
                                               const BigRational& lo, const BigRational& hi, bool fallback,
                                               const SweepPolicy& policy, std::vector<SweepRecord>& out) {
    if (ps.cuts.size() < 2 || ps.cuts.front() != lo || ps.cuts.back() != hi) {
        throw std::invalid_argument("schedule: cut points must run from " + lo.str() + " to " + hi.str());
    }
    for (std::size_t i = 0; i + 1 < ps.cuts.size(); ++i) {
        BigRational a = ps.cuts[i];
        const BigRational& b = ps.cuts[i + 1];
        if (!(a < b)) throw std::invalid_argument("schedule: cut points must increase");
        if (!ps.adaptive) {
            SweepOutcome o = run_sweep(kind, margin, a, b, ps.N, policy);
            if (o.ok()) {
                out.push_back(std::move(*o.record));
                continue;
            }
            if (!fallback) return o.failure->describe();
            if (o.prefix) {
                out.push_back(std::move(*o.prefix));
                a = o.failure->sub_a;
            }
        }
        AdaptiveResult r = adaptive_partition(kind, margin, a, b, ps.N, policy);
        for (auto& rec : r.records) out.push_back(std::move(rec));
        if (!r.ok()) return "uncertifiable near " + r.locus->sub_a.str() + ": " + r.locus->describe();
    }
    return std::nullopt;
}

struct CertifyOptions {
    SweepPolicy policy;
    Precision beta_precision = 256;
    bool check_minimality = true;
};

/// Builds the certificate that G attains its minimum over [1/p, 1] at s_hat(xi, eta).
inline Certificate certify_beta(const PrimeContext& ctx, long xi, long eta, const Schedule& schedule,
                                const CertifyOptions& opt = {}) {
    check_candidate(ctx, xi, eta);
    Certificate cert;
    cert.p = ctx.p();
    cert.xi = xi;
    cert.eta = eta;
    cert.s_hat = s_hat(ctx, xi, eta);
    cert.beta_precision = opt.beta_precision;
    cert.beta = B_closed_form(ctx, xi, eta, opt.beta_precision);
    cert.policy = opt.policy;

    MagnifierConfig def = default_magnifier(ctx, xi, eta);
    unsigned M = schedule.M.value_or(def.M);
    unsigned k = schedule.k.value_or(M == def.M ? def.k : 0);
    BigInt m = schedule.m.value_or(M == def.M ? def.m : (BigRational(ipow(ctx.p(), M)) * cert.s_hat - BigRational(1, 2)).floor());
    cert.magnifier = make_magnifier(ctx, M, m, k);
    const MagnifierConfig& cfg = cert.magnifier;

    if (opt.check_minimality) {
        GridResult g = grid_argmin(ctx);
        if (g.xi != xi || g.eta != eta) {
            RInterval other = B_closed_form(ctx, g.xi, g.eta, opt.beta_precision);
            if (other.strictly_below(cert.beta)) {
                cert.competitor = make_candidate(ctx, g.xi, g.eta, opt.beta_precision);
                cert.failure = "non-minimal: B at (" + std::to_string(g.xi) + "," + std::to_string(g.eta) + ") is smaller";
                return cert;
            }
        }
    }
    if (cfg.mu != cert.s_hat) {
        cert.failure = "magnifier centre " + cfg.mu.str() + " differs from s_hat " + cert.s_hat.str();
    }
    RInterval g_hat = G(ctx, cert.s_hat, opt.beta_precision);
    if (cert.failure.empty() && !g_hat.overlaps(cert.beta)) cert.failure = "closed form disagrees with G(s_hat)";

    for (const BigRational& t : {BigRational(0), BigRational(1, 4), BigRational(1, 2), BigRational(2, 3), BigRational(1)}) {
        cert.zoom_points.push_back(t);
        if (cert.failure.empty() && !lemma4_check(cfg, ctx, t)) cert.failure = "zoom identity fails at t = " + t.str();
    }
    if (!cert.failure.empty()) return cert;

    TestDomains d = test_domains(ctx, cfg);
    Schedule sch = default_schedule(ctx, xi, eta);
    if (schedule.M || schedule.k || schedule.m) {
        // A non-default window moves the s-domain ends; rebuild them as single adaptive pieces.
        auto single = [](BigRational a, BigRational b, unsigned N) { return PieceSchedule{{std::move(a), std::move(b)}, N, true}; };
        sch.s_left = single(d.s_start, d.s_left_end, 500);
        sch.s_right = single(d.s_right_start, BigRational(1), 500);
    }
    if (schedule.t_left) sch.t_left = schedule.t_left;
    if (schedule.t_right) sch.t_right = schedule.t_right;
    if (schedule.s_left) sch.s_left = schedule.s_left;
    if (schedule.s_right) sch.s_right = schedule.s_right;

    PrecisionLadder ladder(ctx, opt.policy, [&](Precision b) { return B_closed_form(ctx, xi, eta, b); });
    MarginFn left = delta_left_margin(ctx, cfg, ladder);
    MarginFn right = delta_right_margin(ctx, cfg, ladder);
    MarginFn outside = outside_margin(ctx, ladder);
    const BigRational zero(0), one(1);
    const bool fb = schedule.adaptive_fallback;
    std::optional<std::string> err;
    if (!err) err = sweep_domain(SweepKind::delta_left, left, *sch.t_left, zero, d.t_left_end, fb, opt.policy, cert.sweeps);
    if (!err) err = sweep_domain(SweepKind::delta_right, right, *sch.t_right, d.t_right_start, one, fb, opt.policy, cert.sweeps);
    if (!err) err = sweep_domain(SweepKind::outside, outside, *sch.s_left, d.s_start, d.s_left_end, fb, opt.policy, cert.sweeps);
    if (!err) err = sweep_domain(SweepKind::outside, outside, *sch.s_right, d.s_right_start, one, fb, opt.policy, cert.sweeps);
    if (err) {
        cert.failure = *err;
        return cert;
    }
    cert.valid = true;
    return cert;
}

inline Certificate certify_beta(const PrimeContext& ctx, long xi, long eta, const CertifyOptions& opt = {}) {
    return certify_beta(ctx, xi, eta, Schedule{}, opt);
}

struct ReplayReport {
    bool ok = true;
    std::vector<std::string> problems;
    std::size_t sweeps_checked = 0;

    void fail(std::string msg) {
        ok = false;
        problems.push_back(std::move(msg));
    }
};

namespace detail {

/// Checks that the intervals, sorted, run contiguously from lo to hi.
inline bool tiles(std::vector<std::pair<BigRational, BigRational>> iv, const BigRational& lo, const BigRational& hi) {
    if (iv.empty()) return false;
    std::sort(iv.begin(), iv.end());
    if (iv.front().first != lo || iv.back().second != hi) return false;
    for (std::size_t i = 0; i + 1 < iv.size(); ++i) {
        if (iv[i].second != iv[i + 1].first) return false;
    }
    return true;
}

} // namespace detail

/// Re-verifies a certificate from its JSON alone: tiling, every margin (bit-identical decimal strings
/// at the recorded precision), the closed form for beta, and the zoom-identity points.
inline ReplayReport replay_certificate(const nlohmann::json& j, unsigned workers = 1) {
    ReplayReport rep;
    if (j.value("version", 0) != kCertificateVersion) {
        rep.fail("unsupported certificate version");
        return rep;
    }
    const auto p = j.at("p").get<unsigned>();
    const long xi = j.at("xi").get<long>(), eta = j.at("eta").get<long>();
    PrimeContext ctx(p);
    if (BigRational::parse(j.at("s_hat").get<std::string>()) != s_hat(ctx, xi, eta)) rep.fail("s_hat does not match (xi, eta)");

    const auto beta_bits = j.at("beta_precision").get<Precision>();
    RInterval beta = B_closed_form(ctx, xi, eta, beta_bits);
    if (j.at("beta")[0] != beta.lower_string(20) || j.at("beta")[1] != beta.upper_string(20)) {
        rep.fail("beta interval does not match the closed form");
    }
    const auto& mg = j.at("magnifier");
    MagnifierConfig cfg = make_magnifier(ctx, mg.at("M").get<unsigned>(), BigInt(mg.at("m").get<std::string>()), mg.at("k").get<unsigned>());
    if (cfg.mu != s_hat(ctx, xi, eta)) rep.fail("magnifier centre differs from s_hat");
    for (const auto& t : j.at("zoom_identity")) {
        if (!lemma4_check(cfg, ctx, BigRational::parse(t.get<std::string>()))) rep.fail("zoom identity fails at " + t.get<std::string>());
    }

    const bool claimed = j.at("valid").get<bool>();
    SweepPolicy base;
    base.cap = j.at("precision_cap").get<Precision>();
    base.workers = workers;
    TestDomains d = test_domains(ctx, cfg);
    std::vector<std::pair<BigRational, BigRational>> tl, tr, sl, sr;
    std::map<Precision, std::unique_ptr<PrecisionLadder>> ladders;
    for (const auto& s : j.at("sweeps")) {
        BigRational a = BigRational::parse(s.at("interval")[0].get<std::string>());
        BigRational b = BigRational::parse(s.at("interval")[1].get<std::string>());
        const std::string kind = s.at("kind").get<std::string>();
        SweepKind k;
        if (kind == "g-above-beta") {
            k = SweepKind::outside;
            (b <= d.s_left_end ? sl : sr).emplace_back(a, b);
        } else if (kind == "delta-positivity") {
            k = b <= d.t_left_end ? SweepKind::delta_left : SweepKind::delta_right;
            (k == SweepKind::delta_left ? tl : tr).emplace_back(a, b);
        } else {
            rep.fail("unknown sweep kind " + kind);
            continue;
        }
        SweepPolicy pol = base;
        pol.start = s.at("precision").get<Precision>();
        auto& lad = ladders[pol.start];
        if (!lad) {
            lad = std::make_unique<PrecisionLadder>(ctx, pol, [&](Precision bb) { return B_closed_form(ctx, xi, eta, bb); });
        }
        MarginFn fn = k == SweepKind::outside    ? outside_margin(ctx, *lad)
                      : k == SweepKind::delta_left ? delta_left_margin(ctx, cfg, *lad)
                                                   : delta_right_margin(ctx, cfg, *lad);
        SweepOutcome o = run_sweep(k, fn, a, b, s.at("N").get<unsigned>(), pol);
        ++rep.sweeps_checked;
        if (!o.ok()) {
            rep.fail("sweep on [" + a.str() + ", " + b.str() + "] fails: " + o.failure->describe());
        } else if (o.record->min_margin_lo != s.at("min_margin_lo").get<std::string>()) {
            rep.fail("margin on [" + a.str() + ", " + b.str() + "] replays as " + o.record->min_margin_lo);
        }
    }
    bool tiled = detail::tiles(tl, BigRational(0), d.t_left_end) && detail::tiles(tr, d.t_right_start, BigRational(1)) &&
                 detail::tiles(sl, d.s_start, d.s_left_end) && detail::tiles(sr, d.s_right_start, BigRational(1));
    if (claimed && !tiled) rep.fail("sweeps do not tile the test domains");
    if (!claimed) rep.fail("certificate is marked invalid" + (j.contains("failure") ? ": " + j["failure"].get<std::string>() : ""));
    return rep;
}

} // namespace pascalcert
