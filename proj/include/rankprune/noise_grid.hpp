#pragma once
// Noise-estimation consistency grid on a clean labelled dataset: inject CNP
// noise for each (pi1, rho1) pair, estimate the rates from cross-validated
// probabilities, and compare with the realized and closed-form values.

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include "rankprune/classifier.hpp"
#include "rankprune/data_model.hpp"

namespace rankprune {

struct GridRow {
    double pi1 = 0.0;
    double rho1 = 0.0;
    double rho0 = 0.0;
    int trial = 0;
    double rho1_realized = 0.0;
    double rho0_realized = 0.0;
    double rho1_hat = 0.0;
    double rho0_hat = 0.0;
    double rho1_thry = 0.0;
    double rho0_thry = 0.0;
    std::string failure;
};

// `clean` must carry hidden labels (the uncorrupted task labels).
std::vector<GridRow> run_noise_grid(const Dataset& clean,
                                    const std::vector<std::pair<double, double>>& pairs, int trials,
                                    const FitConfig& fit, int cv_k, std::uint64_t seed);

void write_grid_csv(std::ostream& out, const std::vector<GridRow>& rows);

// Mean |rho1_hat - rho1| over successful rows.
double mean_abs_rho1_error(const std::vector<GridRow>& rows);

}  // namespace rankprune
