#pragma once
// Removal by rank and the end-to-end Rank Pruning fit.

#include <cstdint>
#include <optional>
#include <span>

#include "json.hpp"

#include "rankprune/classifier.hpp"
#include "rankprune/data_model.hpp"

namespace rankprune {

enum class RankFrom { Smallest, Largest };

// k-th order statistic (1-based) by median-of-medians selection; linear in the
// worst case, never sorts the full input. Throws RankOutOfRange.
double select_kth(std::span<const double> values, std::size_t k, RankFrom from);

struct PruneResult {
    IndexSet kept_indices;        // sorted
    std::vector<double> weights;  // aligned with kept_indices
    double k1_threshold = 0.0;    // kept s=1 examples satisfy g >= k1
    double k0_threshold = 1.0;    // kept s=0 examples satisfy g <= k0
    std::size_t removed_pos = 0;
    std::size_t removed_neg = 0;
};

// Number of examples to drop from a set of `set_size` at inverse rate `pi`:
// floor(pi * set_size), with a 1e-9 guard against representation error.
std::size_t removal_count(double pi, std::size_t set_size);

// Drops the floor(pi1 |P~|) positives with smallest g and the floor(pi0 |N~|)
// negatives with largest g. k1 is the smallest surviving positive score and
// every positive with g >= k1 is kept, so ties at the cut survive.
// Throws OverPrune if a removal count reaches its set size.
PruneResult prune(std::span<const double> g, std::span<const int> s, const NoiseRates& rates);

struct RankPruneOutput {
    LogisticModel model;
    NoiseRates rates;
    PruneResult prune;
    Thresholds thresholds;
    ProbEstimates g;
    bool rates_estimated = true;
};

struct RankPruneOptions {
    int cv_k = 3;
    bool stratified = true;
    std::uint64_t seed = 0;
    std::optional<NoiseRates> rates_override;
};

// cross-validated g -> thresholds -> confident counts -> rates -> prune ->
// reweighted refit on the kept examples.
RankPruneOutput rank_prune_fit(const Dataset& d, const FitConfig& cfg, const RankPruneOptions& opts);

nlohmann::json prune_to_json(const PruneResult& p);
nlohmann::json rates_to_json(const NoiseRates& r);

}  // namespace rankprune
