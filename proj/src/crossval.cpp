#include "rankprune/crossval.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "rankprune/errors.hpp"

namespace rankprune {

std::size_t FoldPlan::fold_size(int fold) const {
    return static_cast<std::size_t>(std::count(assignment.begin(), assignment.end(), fold));
}

IndexSet FoldPlan::train_indices(int fold) const {
    IndexSet out;
    for (std::size_t i = 0; i < assignment.size(); ++i) {
        if (assignment[i] != fold) out.push_back(i);
    }
    return out;
}

IndexSet FoldPlan::test_indices(int fold) const {
    IndexSet out;
    for (std::size_t i = 0; i < assignment.size(); ++i) {
        if (assignment[i] == fold) out.push_back(i);
    }
    return out;
}

FoldPlan make_folds(std::span<const int> labels, int k, bool stratified, std::uint64_t seed) {
    const auto n = labels.size();
    if (k < 2) throw Error(ErrorCode::TooFewExamples, "fold count must be >= 2");
    if (n < static_cast<std::size_t>(k)) {
        throw Error(ErrorCode::TooFewExamples,
                    "n=" + std::to_string(n) + " is smaller than k=" + std::to_string(k));
    }

    FoldPlan plan;
    plan.k = k;
    plan.seed = seed;
    plan.assignment.assign(n, 0);
    std::mt19937_64 rng(seed);

    auto [pos, neg] = split_by_observed_label(labels);
    if (stratified && (pos.size() < static_cast<std::size_t>(k) ||
                       neg.size() < static_cast<std::size_t>(k))) {
        plan.diagnostic = "stratification needs >= k members per class; using unstratified folds";
        stratified = false;
    }
    plan.stratified = stratified;

    if (stratified) {
        // Continue the round-robin counter across classes so total fold sizes
        // also stay within one of each other.
        std::size_t slot = 0;
        for (auto* cls : {&pos, &neg}) {
            std::shuffle(cls->begin(), cls->end(), rng);
            for (auto idx : *cls) plan.assignment[idx] = static_cast<int>(slot++ % k);
        }
    } else {
        IndexSet order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t r = 0; r < n; ++r) plan.assignment[order[r]] = static_cast<int>(r % k);
    }
    return plan;
}

namespace {

bool has_single_class_split(std::span<const int> labels, const FoldPlan& plan) {
    for (int f = 0; f < plan.k; ++f) {
        bool pos = false;
        bool neg = false;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (plan.assignment[i] == f) continue;
            (labels[i] == 1 ? pos : neg) = true;
        }
        if (!pos || !neg) return true;
    }
    return false;
}

}  // namespace

ProbEstimates cv_predict_proba(const Dataset& d, std::span<const int> labels,
                               const FoldPlan& plan, const FitConfig& cfg) {
    if (labels.size() != d.size() || plan.assignment.size() != d.size()) {
        throw Error(ErrorCode::LengthMismatch, "labels, plan and dataset sizes differ");
    }
    const FoldPlan* active = &plan;
    FoldPlan retry;
    if (has_single_class_split(labels, plan)) {
        if (!plan.stratified) {
            retry = make_folds(labels, plan.k, true, plan.seed);
            if (retry.stratified) active = &retry;
        }
        if (has_single_class_split(labels, *active)) {
            throw Error(ErrorCode::SingleClassInput,
                        "a cross-validation training split contains a single class");
        }
    }

    ProbEstimates out;
    out.g.assign(d.size(), 0.0);
    out.fold_of = active->assignment;

    for (int f = 0; f < active->k; ++f) {
        const auto train = active->train_indices(f);
        const auto test = active->test_indices(f);
        if (test.empty()) continue;
        Labels train_labels(train.size());
        for (std::size_t r = 0; r < train.size(); ++r) train_labels[r] = labels[train[r]];
        const auto model = fit(d.subset(train).features(), train_labels, {}, cfg);
        const auto g = predict_proba(model, d.subset(test).features());
        for (std::size_t r = 0; r < test.size(); ++r) out.g[test[r]] = g[r];
    }
    return out;
}

}  // namespace rankprune
