#include "rankprune/noise_estimator.hpp"

#include <algorithm>
#include <string>

#include "rankprune/errors.hpp"

namespace rankprune {

namespace {

void check_lengths(std::span<const double> g, std::span<const int> s) {
    if (g.size() != s.size()) throw Error(ErrorCode::LengthMismatch, "g and labels differ in length");
}

// Class mean, clamped into [min, max] of the averaged values so that a
// constant class yields exactly that constant.
double bounded_mean(std::span<const double> g, std::span<const int> s, int label) {
    double sum = 0.0;
    double lo = 1.0;
    double hi = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (s[i] != label) continue;
        sum += g[i];
        lo = std::min(lo, g[i]);
        hi = std::max(hi, g[i]);
        ++count;
    }
    if (count == 0) {
        throw Error(ErrorCode::EmptyClass,
                    std::string("no examples with observed label ") + std::to_string(label));
    }
    return std::clamp(sum / static_cast<double>(count), lo, hi);
}

}  // namespace

Thresholds thresholds(std::span<const double> g, std::span<const int> s) {
    check_lengths(g, s);
    return Thresholds{bounded_mean(g, s, 1), bounded_mean(g, s, 0)};
}

ConfidentCounts confident_counts(std::span<const double> g, std::span<const int> s,
                                 const Thresholds& t) {
    check_lengths(g, s);
    ConfidentCounts c;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const bool likely_pos = g[i] >= t.lb_y1;
        const bool likely_neg = g[i] <= t.ub_y0;
        if (s[i] == 1) {
            c.n_Py1 += likely_pos;
            c.n_Py0 += likely_neg;
        } else {
            c.n_Ny1 += likely_pos;
            c.n_Ny0 += likely_neg;
        }
    }
    return c;
}

ConfidentRates estimate_rates(const ConfidentCounts& c) {
    const auto den1 = c.n_Ny1 + c.n_Py1;
    const auto den0 = c.n_Py0 + c.n_Ny0;
    if (den1 == 0 || den0 == 0) {
        throw Error(ErrorCode::DegenerateCounts,
                    "no confident examples on the " + std::string(den1 == 0 ? "y=1" : "y=0") +
                        " side");
    }
    return ConfidentRates{static_cast<double>(c.n_Ny1) / static_cast<double>(den1),
                          static_cast<double>(c.n_Py0) / static_cast<double>(den0)};
}

Thresholds ideal_thresholds(double rho1, double rho0, double pi1, double pi0) {
    return Thresholds{(1.0 - rho1) * (1.0 - pi1) + rho0 * pi1,
                      (1.0 - rho1) * pi0 + rho0 * (1.0 - pi0)};
}

TheoryEstimates theoretical_rates(const TheoryInputs& in) {
    if (in.delta_p1 > in.size_p || in.delta_p0 > in.size_p || in.delta_n1 > in.size_n ||
        in.delta_n0 > in.size_n) {
        throw Error(ErrorCode::LengthMismatch, "deviation counts exceed their source sets");
    }
    if (!(in.overlap >= 0.0 && in.overlap <= 1.0)) {
        throw Error(ErrorCode::InvalidRates, "overlap fraction must lie in [0,1]");
    }
    const double den1 = static_cast<double>(in.size_p) - static_cast<double>(in.delta_p1) +
                        static_cast<double>(in.delta_n1);
    const double den0 = static_cast<double>(in.size_n) - static_cast<double>(in.delta_n0) +
                        static_cast<double>(in.delta_p0);
    if (den1 <= 0.0 || den0 <= 0.0) {
        throw Error(ErrorCode::DegenerateCounts, "closed-form estimator denominator is zero");
    }

    const double gap = 1.0 - in.rho1 - in.rho0;
    const auto rates = complete_rates(in.rho1, in.rho0, in.p_s1);
    const auto ideal = ideal_thresholds(in.rho1, in.rho0, rates.pi1, rates.pi0);

    TheoryEstimates out;
    out.lb = ideal.lb_y1 + in.mean_dg_pos - gap * gap / in.p_s1 * in.overlap;
    out.ub = ideal.ub_y0 + in.mean_dg_neg + gap * gap / (1.0 - in.p_s1) * in.overlap;
    out.rho1 = in.rho1 + gap / den1 * static_cast<double>(in.delta_n1);
    out.rho0 = in.rho0 + gap / den0 * static_cast<double>(in.delta_p0);
    return out;
}

TheoryInputs collect_theory_inputs(std::span<const double> g, std::span<const int> s,
                                   std::span<const int> y, double rho1, double rho0,
                                   std::span<const double> g_star, double overlap) {
    check_lengths(g, s);
    check_lengths(g, y);
    if (!g_star.empty() && g_star.size() != g.size()) {
        throw Error(ErrorCode::LengthMismatch, "g* length differs from g");
    }
    const auto t = thresholds(g, s);

    TheoryInputs in;
    in.rho1 = rho1;
    in.rho0 = rho0;
    in.overlap = overlap;
    in.p_s1 = positive_fraction(s);

    double dg_pos = 0.0;
    double dg_neg = 0.0;
    std::size_t n_pos = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (y[i] == 1) {
            ++in.size_p;
            in.delta_p1 += g[i] < t.lb_y1;
            in.delta_p0 += g[i] <= t.ub_y0;
        } else {
            ++in.size_n;
            in.delta_n1 += g[i] >= t.lb_y1;
            in.delta_n0 += g[i] > t.ub_y0;
        }
        if (!g_star.empty()) {
            const double dg = g[i] - g_star[i];
            if (s[i] == 1) {
                dg_pos += dg;
                ++n_pos;
            } else {
                dg_neg += dg;
            }
        }
    }
    if (!g_star.empty()) {
        const auto n_neg = g.size() - n_pos;
        in.mean_dg_pos = n_pos ? dg_pos / static_cast<double>(n_pos) : 0.0;
        in.mean_dg_neg = n_neg ? dg_neg / static_cast<double>(n_neg) : 0.0;
    }
    return in;
}

}  // namespace rankprune
