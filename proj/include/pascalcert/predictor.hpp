#pragma once

#include "pascalcert/interval.hpp"
#include "pascalcert/pascal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

namespace pascalcert {

struct Prediction {
    double xi = 0;
    double eta = 0;
    long xi_rounded = 0;
    long eta_rounded = 0;
    unsigned iterations = 0;
};

class NonConvergence : public std::runtime_error {
public:
    explicit NonConvergence(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

/// Partial derivatives of log B in xi and eta, with xi and eta treated as reals.
inline std::pair<double, double> stationarity(double p, double rho, double x, double e) {
    double den = (2 * x + 1) * p - 2 * e;
    double n1 = (4 * x + 3) * p * p + (4 * x - 4 * e + 3) * p + 2 * e * (2 * e - 1);
    double d1 = (x + 1) * (2 * x + 1) * p * p + (x + 1) * (2 * x - 4 * e + 1) * p + 2 * e * (x + 1) * (2 * e - 1);
    double f1 = n1 / d1 - 2 * rho * p / den;
    double d2 = (2 * x + 1) * p * p + (2 * x - 4 * e + 1) * p + 2 * e * (2 * e - 1);
    double f2 = rho / den - (2 * p - 4 * e + 1) / d2;
    return {f1, f2};
}

} // namespace detail

/// Damped Newton on the stationarity system, started from xi = log_4 p, eta = p/(4 log_2 p).
/// The rounding (floor(xi + 0.5), floor(eta + 0.45)) is empirical; callers treat it as a hint.
inline Prediction predict_xi_eta(unsigned p, unsigned max_iter = 200) {
    if (p < 11 || !is_prime(p)) throw std::invalid_argument("predict_xi_eta: p must be a prime >= 11");
    const double pd = p;
    const double rho = std::log(pd * (pd + 1) / 2) / std::log(pd);
    double x = std::log(pd) / std::log(4.0);
    double e = pd / (4 * std::log2(pd));
    auto norm = [](std::pair<double, double> f) { return std::hypot(f.first, f.second); };
    auto f = detail::stationarity(pd, rho, x, e);
    for (unsigned it = 1; it <= max_iter; ++it) {
        double hx = 1e-7 * std::max(1.0, std::abs(x)), he = 1e-7 * std::max(1.0, std::abs(e));
        auto fx = detail::stationarity(pd, rho, x + hx, e);
        auto fe = detail::stationarity(pd, rho, x, e + he);
        double j11 = (fx.first - f.first) / hx, j12 = (fe.first - f.first) / he;
        double j21 = (fx.second - f.second) / hx, j22 = (fe.second - f.second) / he;
        double det = j11 * j22 - j12 * j21;
        if (det == 0 || !std::isfinite(det)) break;
        double dx = (j22 * f.first - j12 * f.second) / det;
        double de = (j11 * f.second - j21 * f.first) / det;
        double lambda = 1;
        auto trial = f;
        for (int damp = 0; damp < 40; ++damp, lambda /= 2) {
            trial = detail::stationarity(pd, rho, x - lambda * dx, e - lambda * de);
            if (std::isfinite(trial.first) && std::isfinite(trial.second) && norm(trial) < norm(f)) break;
        }
        x -= lambda * dx;
        e -= lambda * de;
        f = trial;
        double step = std::hypot(lambda * dx, lambda * de);
        if (step <= 1e-12 * std::max(1.0, std::hypot(x, e))) {
            return {x, e, static_cast<long>(std::floor(x + 0.5)), static_cast<long>(std::floor(e + 0.45)), it};
        }
    }
    throw NonConvergence("predict_xi_eta: Newton iteration did not converge for p = " + std::to_string(p));
}

struct GridResult {
    long xi = 0;
    long eta = 0;
    RInterval B;
    std::size_t contenders = 0;  // grid points within the floating guard of the minimum
    bool separated = false;      // winner's interval lies strictly below every other contender's
    long runner_xi = -1;
    long runner_eta = -1;
};

/// Minimizes B over the full grid 1 <= xi < p, 0 <= eta <= (p-1)/2.
/// Points more than a relative 1e-9 above the floating minimum are dismissed in floating point;
/// the rest are compared with intervals.
inline GridResult grid_argmin(const PrimeContext& ctx, Precision bits = kDefaultPrecision, double guard = 1e-9) {
    if (!ctx.odd()) throw std::invalid_argument("grid_argmin: p must be odd");
    const long p = ctx.p();
    const double rho = ctx.rho_double();
    double best = std::numeric_limits<double>::infinity();
    std::vector<std::pair<long, long>> near;
    std::vector<double> near_val;
    for (long xi = 1; xi < p; ++xi) {
        for (long eta = 0; eta <= (p - 1) / 2; ++eta) {
            double v = B_double(ctx.p(), rho, xi, eta);
            if (v <= best * (1 + guard)) {
                best = std::min(best, v);
                near.emplace_back(xi, eta);
                near_val.push_back(v);
                if (near.size() > 4096) {
                    std::size_t w = 0;
                    for (std::size_t i = 0; i < near.size(); ++i) {
                        if (near_val[i] <= best * (1 + guard)) {
                            near[w] = near[i];
                            near_val[w++] = near_val[i];
                        }
                    }
                    near.resize(w);
                    near_val.resize(w);
                }
            }
        }
    }
    std::vector<std::pair<long, long>> contenders;
    for (std::size_t i = 0; i < near.size(); ++i) {
        if (near_val[i] <= best * (1 + guard)) contenders.push_back(near[i]);
    }
    GridResult res;
    res.contenders = contenders.size();
    std::vector<RInterval> vals;
    std::size_t win = 0;
    for (std::size_t i = 0; i < contenders.size(); ++i) {
        vals.push_back(B_closed_form(ctx, contenders[i].first, contenders[i].second, bits));
        if (mpfr_less_p(vals[i].hi(), vals[win].hi())) win = i;
    }
    res.xi = contenders[win].first;
    res.eta = contenders[win].second;
    res.B = vals[win];
    res.separated = true;
    std::optional<std::size_t> runner;
    for (std::size_t i = 0; i < contenders.size(); ++i) {
        if (i == win) continue;
        if (!vals[win].strictly_below(vals[i])) res.separated = false;
        if (!runner || mpfr_less_p(vals[i].lo(), vals[*runner].lo())) runner = i;
    }
    if (runner) {
        res.runner_xi = contenders[*runner].first;
        res.runner_eta = contenders[*runner].second;
    }
    return res;
}

struct RankedCandidate {
    CandidatePoint point;
    bool ambiguous = false;  // interval overlaps a neighbour in the ranking
};

/// B at every grid point within Chebyshev distance `radius` of the prediction, plus the whole grid when p <= full_grid_max.
inline std::vector<RankedCandidate> search_candidates(const PrimeContext& ctx, long radius, Precision bits = kDefaultPrecision,
                                                      unsigned full_grid_max = 199) {
    if (radius < 1) throw std::invalid_argument("search_candidates: radius must be at least 1");
    if (!ctx.odd()) throw std::invalid_argument("search_candidates: p must be odd");
    const long p = ctx.p();
    std::set<std::pair<long, long>> pts;
    if (p >= 11) {
        Prediction pr = predict_xi_eta(ctx.p());
        for (long x = pr.xi_rounded - radius; x <= pr.xi_rounded + radius; ++x) {
            for (long e = pr.eta_rounded - radius; e <= pr.eta_rounded + radius; ++e) {
                if (x >= 1 && x < p && e >= 0 && e <= (p - 1) / 2) pts.emplace(x, e);
            }
        }
    }
    if (p < 11 || ctx.p() <= full_grid_max) {
        for (long x = 1; x < p; ++x) {
            for (long e = 0; e <= (p - 1) / 2; ++e) pts.emplace(x, e);
        }
    }
    std::vector<RankedCandidate> out;
    for (auto [x, e] : pts) out.push_back({make_candidate(ctx, x, e, bits), false});
    std::stable_sort(out.begin(), out.end(), [](const RankedCandidate& a, const RankedCandidate& b) {
        return a.point.B.mid_double() < b.point.B.mid_double();
    });
    for (std::size_t i = 0; i + 1 < out.size(); ++i) {
        if (out[i].point.B.overlaps(out[i + 1].point.B)) out[i].ambiguous = out[i + 1].ambiguous = true;
    }
    return out;
}

} // namespace pascalcert
