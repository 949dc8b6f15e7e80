#pragma once
// Confident-counts noise-rate estimation and its closed-form counterpart for
// an imperfect g with overlapping class supports.

#include <cstddef>
#include <optional>
#include <span>

#include "rankprune/data_model.hpp"

namespace rankprune {

// Sizes of the four confident sets:
//   Py1 = {s=1, g >= LB}   Ny1 = {s=0, g >= LB}
//   Py0 = {s=1, g <= UB}   Ny0 = {s=0, g <= UB}
// They need not sum to n.
struct ConfidentCounts {
    std::size_t n_Py1 = 0;
    std::size_t n_Ny1 = 0;
    std::size_t n_Py0 = 0;
    std::size_t n_Ny0 = 0;
};

struct ConfidentRates {
    double rho1 = 0.0;
    double rho0 = 0.0;
};

// LB = mean of g over s=1, UB = mean of g over s=0. Throws EmptyClass.
Thresholds thresholds(std::span<const double> g, std::span<const int> s);

// Inclusive comparisons on both thresholds, so ties count on both sides.
ConfidentCounts confident_counts(std::span<const double> g, std::span<const int> s,
                                 const Thresholds& t);

// Raw ratios; throws DegenerateCounts on an empty denominator.
ConfidentRates estimate_rates(const ConfidentCounts& counts);

// Everything the closed-form estimator needs. Sizes refer to the hidden sets
// P = {y=1} and N = {y=0}; deviation sets are
//   dP1 = {y=1, g < LB}   dN1 = {y=0, g >= LB}
//   dP0 = {y=1, g <= UB}  dN0 = {y=0, g > UB}
struct TheoryInputs {
    double rho1 = 0.0;
    double rho0 = 0.0;
    std::size_t size_p = 0;
    std::size_t size_n = 0;
    std::size_t delta_p1 = 0;
    std::size_t delta_n1 = 0;
    std::size_t delta_p0 = 0;
    std::size_t delta_n0 = 0;
    double overlap = 0.0;       // fraction of overlapping examples, in [0,1]
    double mean_dg_pos = 0.0;   // mean of g - g* over s=1
    double mean_dg_neg = 0.0;   // mean of g - g* over s=0
    double p_s1 = 0.5;
};

struct TheoryEstimates {
    double rho1 = 0.0;
    double rho0 = 0.0;
    double lb = 0.0;
    double ub = 0.0;
};

// Ideal-case thresholds LB* and UB* from the true rates.
Thresholds ideal_thresholds(double rho1, double rho0, double pi1, double pi0);

TheoryEstimates theoretical_rates(const TheoryInputs& in);

// Builds TheoryInputs from a labelled benchmark sample. `true_rates` are the
// rates to plug in (typically the realized flip fractions). `g_star` is the
// exact P(s=1|x) when known; without it the threshold terms assume dg = 0.
// `overlap` is the finite-sample overlap fraction supplied by the caller.
TheoryInputs collect_theory_inputs(std::span<const double> g, std::span<const int> s,
                                   std::span<const int> y, double rho1, double rho0,
                                   std::span<const double> g_star = {}, double overlap = 0.0);

}  // namespace rankprune
