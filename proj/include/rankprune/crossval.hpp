#pragma once
// k-fold cross-validated probability estimates: every g_i comes from a model
// that never saw example i.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rankprune/classifier.hpp"
#include "rankprune/data_model.hpp"

namespace rankprune {

struct FoldPlan {
    int k = 3;
    std::vector<int> assignment;  // fold index per example
    bool stratified = true;
    std::uint64_t seed = 0;
    // Non-empty when a stratified request fell back to an unstratified plan.
    std::string diagnostic;

    std::size_t fold_size(int fold) const;
    IndexSet train_indices(int fold) const;
    IndexSet test_indices(int fold) const;
};

// Deterministic given seed. Stratified plans deal each class round-robin over
// the folds after a seeded shuffle, so per-fold class counts differ by at most one.
FoldPlan make_folds(std::span<const int> labels, int k, bool stratified, std::uint64_t seed);
inline FoldPlan make_folds(const Dataset& d, int k, bool stratified, std::uint64_t seed) {
    return make_folds(d.observed_labels(), k, stratified, seed);
}

// If an unstratified plan leaves a training split single-class, the plan is
// rebuilt once with stratification forced; a second failure throws.
ProbEstimates cv_predict_proba(const Dataset& d, std::span<const int> labels,
                               const FoldPlan& plan, const FitConfig& cfg);

}  // namespace rankprune
