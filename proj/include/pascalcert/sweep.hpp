#pragma once

#include "pascalcert/interval.hpp"
#include "pascalcert/magnifier.hpp"
#include "pascalcert/pascal.hpp"
#include "pascalcert/rational.hpp"

#include <algorithm>
#include <atomic>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace pascalcert {

enum class SweepKind { delta_left, delta_right, outside };

inline std::string kind_name(SweepKind k) {
    return k == SweepKind::outside ? "g-above-beta" : "delta-positivity";
}

struct SweepPolicy {
    Precision start = kDefaultPrecision;
    Precision cap = kDefaultPrecisionCap;
    unsigned workers = 1;
    bool keep_margins = false;
};

struct SweepRecord {
    SweepKind kind = SweepKind::outside;
    BigRational a, b;
    unsigned N = 0;
    std::string min_margin_lo;  // outward-rounded decimal of the smallest margin lower bound
    double min_margin = 0;
    Precision precision = kDefaultPrecision;
    Precision max_precision = kDefaultPrecision;
    std::vector<double> margins;  // per subinterval, only with keep_margins
};

struct SweepFailure {
    SweepKind kind = SweepKind::outside;
    BigRational a, b;
    unsigned N = 0;
    std::size_t index = 0;
    BigRational sub_a, sub_b;
    std::string margin_lo, margin_hi;
    bool undecided = false;

    [[nodiscard]] std::string describe() const {
        return kind_name(kind) + " fails on [" + sub_a.str() + ", " + sub_b.str() + "] (subinterval " +
               std::to_string(index) + " of " + std::to_string(N) + " in [" + a.str() + ", " + b.str() +
               "]), margin in [" + margin_lo + ", " + margin_hi + "]" + (undecided ? " undecided at cap" : "");
    }
};

struct SweepOutcome {
    std::optional<SweepRecord> record;
    std::optional<SweepFailure> failure;
    std::optional<SweepRecord> prefix;  // the pieces before the failure, when there are any
    [[nodiscard]] bool ok() const { return record.has_value(); }
};

/// Interval lower bound of the checked quantity on [ta, tb] at a given precision.
using MarginFn = std::function<RInterval(const BigRational& ta, const BigRational& tb, Precision bits)>;

/// Per-precision constants shared by every subinterval of a sweep.
class PrecisionLadder {
public:
    PrecisionLadder(const PrimeContext& ctx, const SweepPolicy& policy, std::function<RInterval(Precision)> beta = {}) {
        for (Precision b = policy.start; b <= policy.cap; b *= 2) {
            bits_.push_back(b);
            rho_.push_back(ctx.rho(b));
            if (beta) beta_.push_back(beta(b));
        }
        if (bits_.empty()) throw std::invalid_argument("SweepPolicy: start precision exceeds cap");
    }

    [[nodiscard]] std::size_t level(Precision bits) const {
        auto it = std::find(bits_.begin(), bits_.end(), bits);
        if (it == bits_.end()) throw std::logic_error("PrecisionLadder: unknown precision");
        return static_cast<std::size_t>(it - bits_.begin());
    }
    [[nodiscard]] const RInterval& rho(Precision bits) const { return rho_[level(bits)]; }
    [[nodiscard]] const RInterval& beta(Precision bits) const { return beta_.at(level(bits)); }
    [[nodiscard]] const std::vector<Precision>& levels() const { return bits_; }

private:
    std::vector<Precision> bits_;
    std::vector<RInterval> rho_;
    std::vector<RInterval> beta_;
};

/// Monotone endpoint bound for Delta on a subinterval of [0, 1/2 - 1/(2p)]: D1(tb) - D2(ta), both terms decreasing.
inline MarginFn delta_left_margin(const PrimeContext& ctx, const MagnifierConfig& cfg, const PrecisionLadder& ladder) {
    return [&ctx, cfg, &ladder](const BigRational& ta, const BigRational& tb, Precision bits) {
        const RInterval& rho = ladder.rho(bits);
        const BigRational half(1, 2), quarter(1, 4);
        BigRational pM(ipow(cfg.p, cfg.M)), pMk(ipow(cfg.p, cfg.M + cfg.k));
        RInterval d1 = rho * RInterval(cfg.phi_mu * (half - tb) / pM, bits);
        RInterval phi_a = ctx.phi(ta, bits);
        RInterval d2 = RInterval(cfg.tau, bits) * (RInterval(quarter, bits) - phi_a) *
                       (RInterval(cfg.mu, bits) + rho * RInterval((half - ta) / pMk, bits));
        return d1 - d2;
    };
}

/// Monotone endpoint bound for Delta on a subinterval of [1/2 + 1/(2p), 1]: I1(ta) - I2(tb), both terms increasing.
inline MarginFn delta_right_margin(const PrimeContext& ctx, const MagnifierConfig& cfg, const PrecisionLadder& ladder) {
    return [&ctx, cfg, &ladder](const BigRational& ta, const BigRational& tb, Precision bits) {
        const RInterval& rho = ladder.rho(bits);
        const BigRational half(1, 2), quarter(1, 4);
        BigRational pM(ipow(cfg.p, cfg.M)), pk(ipow(cfg.p, cfg.k));
        RInterval q(quarter, bits);
        RInterval i1 = RInterval(cfg.tau * cfg.mu, bits) * (ctx.phi(ta, bits) - q);
        RInterval i2 = rho * RInterval((tb - half) / pM, bits) *
                       (RInterval(cfg.phi_mu, bits) + RInterval(cfg.tau / pk, bits) * (ctx.phi(tb, bits) - q));
        return i1 - i2;
    };
}

/// sigma_b^(-rho) phi(sigma_a) - beta on [sigma_a, sigma_b] inside [1/p, 1].
inline MarginFn outside_margin(const PrimeContext& ctx, const PrecisionLadder& ladder) {
    return [&ctx, &ladder](const BigRational& sa, const BigRational& sb, Precision bits) {
        RInterval pw = interval_pow(RInterval(sb, bits), ladder.rho(bits));
        return pw * ctx.phi(sa, bits) - ladder.beta(bits);
    };
}

/// Splits [a, b] into N equal pieces and certifies a positive margin on each.
/// A failure reports the smallest failing index, independent of the worker count.
inline SweepOutcome run_sweep(SweepKind kind, const MarginFn& margin, const BigRational& a, const BigRational& b, unsigned N,
                              const SweepPolicy& policy) {
    if (N == 0) throw std::invalid_argument("run_sweep: N must be positive");
    if (!(a < b)) throw std::invalid_argument("run_sweep: empty interval");
    const BigRational step = (b - a) / BigRational(N);
    auto point = [&](std::size_t j) { return j == N ? b : a + step * BigRational(static_cast<unsigned long>(j)); };

    struct Slot {
        bool done = false;
        Sign sign = Sign::undecided;
        std::string lo, hi;
        double lo_d = 0;
        BigRational lo_q;
        Precision bits = 0;
    };
    std::vector<Slot> slots(N);
    std::atomic<std::size_t> first_fail{N};
    std::atomic<std::size_t> next{0};

    auto work = [&]() {
        while (true) {
            std::size_t j = next.fetch_add(1);
            if (j >= N) return;
            if (j > first_fail.load()) continue;
            BigRational ta = point(j), tb = point(j + 1);
            SignDecision d = decide_sign([&](Precision bits) { return margin(ta, tb, bits); }, policy.start, policy.cap);
            Slot& s = slots[j];
            s.done = true;
            s.sign = d.sign;
            s.lo = d.enclosure.lower_string(20);
            s.hi = d.enclosure.upper_string(20);
            s.lo_d = d.enclosure.lower_double();
            s.lo_q = d.enclosure.lower_rational();
            s.bits = d.bits;
            if (d.sign != Sign::positive) {
                std::size_t cur = first_fail.load();
                while (j < cur && !first_fail.compare_exchange_weak(cur, j)) {
                }
            }
        }
    };
    unsigned workers = std::max(1u, std::min<unsigned>(policy.workers, N));
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }

    auto assemble = [&](std::size_t count) {
        SweepRecord rec;
        rec.kind = kind;
        rec.a = a;
        rec.b = point(count);
        rec.N = static_cast<unsigned>(count);
        rec.precision = policy.start;
        rec.max_precision = policy.start;
        std::size_t arg = 0;
        for (std::size_t j = 0; j < count; ++j) {
            if (slots[j].lo_q < slots[arg].lo_q) arg = j;
            rec.max_precision = std::max(rec.max_precision, slots[j].bits);
            if (policy.keep_margins) rec.margins.push_back(slots[j].lo_d);
        }
        rec.min_margin_lo = slots[arg].lo;
        rec.min_margin = slots[arg].lo_d;
        return rec;
    };

    SweepOutcome out;
    std::size_t f = first_fail.load();
    if (f < N) {
        const Slot& s = slots[f];
        out.failure = SweepFailure{kind, a, b, N, f, point(f), point(f + 1), s.lo, s.hi, s.sign == Sign::undecided};
        if (f > 0) out.prefix = assemble(f);
        return out;
    }
    out.record = assemble(N);
    return out;
}

struct AdaptiveLimits {
    std::size_t max_records = 4000;
    BigRational min_width = BigRational(BigInt(1), ipow(10, 30));
};

struct AdaptiveResult {
    std::vector<SweepRecord> records;
    std::optional<SweepFailure> locus;
    [[nodiscard]] bool ok() const { return !locus.has_value(); }
};

/// Greedy frontier: from the left end, take the longest stretch that N equal pieces certify, emit it, repeat.
/// A failure in the very first piece halves the stretch; a failure at index f > 0 keeps the first f pieces.
inline AdaptiveResult adaptive_partition(SweepKind kind, const MarginFn& margin, const BigRational& a, const BigRational& b,
                                         unsigned N, const SweepPolicy& policy, const AdaptiveLimits& limits = {}) {
    AdaptiveResult res;
    BigRational x = a, y = b;
    std::optional<SweepFailure> last;
    while (x < b) {
        if (res.records.size() >= limits.max_records || y - x < limits.min_width) {
            res.locus = last ? last : SweepFailure{kind, a, b, N, 0, x, y, "?", "?", false};
            return res;
        }
        SweepOutcome o = run_sweep(kind, margin, x, y, N, policy);
        if (o.ok()) {
            res.records.push_back(std::move(*o.record));
            x = y;
            y = b;
            continue;
        }
        last = o.failure;
        if (o.failure->index == 0) {
            y = x + (y - x) / BigRational(2);
            continue;
        }
        x = o.failure->sub_a;
        res.records.push_back(std::move(*o.prefix));
        y = b;
    }
    return res;
}

} // namespace pascalcert
