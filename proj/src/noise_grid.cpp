#include "rankprune/noise_grid.hpp"

#include <cmath>
#include <ostream>

#include "rankprune/crossval.hpp"
#include "rankprune/errors.hpp"
#include "rankprune/noise_estimator.hpp"
#include "rankprune/records.hpp"
#include "rankprune/rng.hpp"
#include "rankprune/synthetic_bench.hpp"

namespace rankprune {

std::vector<GridRow> run_noise_grid(const Dataset& clean,
                                    const std::vector<std::pair<double, double>>& pairs, int trials,
                                    const FitConfig& fit_cfg, int cv_k, std::uint64_t seed) {
    const auto& y = clean.hidden_labels();
    const double p_y1 = positive_fraction(y);
    std::vector<GridRow> out;
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        for (int t = 0; t < trials; ++t) {
            GridRow row;
            row.pi1 = pairs[p].first;
            row.rho1 = pairs[p].second;
            row.trial = t;
            try {
                row.rho0 = rho0_from_pi1(row.pi1, row.rho1, p_y1);
                Rng rng(derive_seed(seed, {p, static_cast<std::uint64_t>(t), 1}));
                const auto flips = corrupt(y, row.rho1, row.rho0, rng);
                row.rho1_realized = flips.realized_rho1();
                row.rho0_realized = flips.realized_rho0();
                const auto noisy = clean.with_observed(flips.s);
                const auto plan = make_folds(flips.s, cv_k, true, derive_seed(seed, {p, static_cast<std::uint64_t>(t), 2}));
                const auto g = cv_predict_proba(noisy, flips.s, plan, fit_cfg);
                const auto est = estimate_rates(confident_counts(g.g, flips.s, thresholds(g.g, flips.s)));
                row.rho1_hat = est.rho1;
                row.rho0_hat = est.rho0;
                const auto theory = theoretical_rates(collect_theory_inputs(
                    g.g, flips.s, y, row.rho1_realized, row.rho0_realized));
                row.rho1_thry = theory.rho1;
                row.rho0_thry = theory.rho0;
            } catch (const Error& e) {
                row.failure = e.what();
            }
            out.push_back(std::move(row));
        }
    }
    return out;
}

void write_grid_csv(std::ostream& out, const std::vector<GridRow>& rows) {
    out << "pi1,rho1,rho0,trial,rho1_realized,rho0_realized,rho1_hat,rho0_hat,rho1_thry,rho0_thry,failure\n";
    for (const auto& r : rows) {
        out << format_real(r.pi1) << ',' << format_real(r.rho1) << ',' << format_real(r.rho0) << ','
            << r.trial << ',' << format_real(r.rho1_realized) << ',' << format_real(r.rho0_realized)
            << ',' << format_real(r.rho1_hat) << ',' << format_real(r.rho0_hat) << ','
            << format_real(r.rho1_thry) << ',' << format_real(r.rho0_thry) << ','
            << (r.failure.empty() ? "" : "\"" + r.failure + "\"") << '\n';
    }
}

double mean_abs_rho1_error(const std::vector<GridRow>& rows) {
    double sum = 0.0;
    int n = 0;
    for (const auto& r : rows) {
        if (!r.failure.empty()) continue;
        sum += std::abs(r.rho1_hat - r.rho1);
        ++n;
    }
    return n ? sum / n : kNaN;
}

}  // namespace rankprune
