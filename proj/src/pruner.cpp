#include "rankprune/pruner.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "rankprune/crossval.hpp"
#include "rankprune/errors.hpp"
#include "rankprune/noise_estimator.hpp"

namespace rankprune {

namespace {

using Iter = std::vector<double>::iterator;

void insertion_sort(Iter first, Iter last) {
    for (auto it = first + (first != last ? 1 : 0); it < last; ++it) {
        const double v = *it;
        auto hole = it;
        while (hole != first && *(hole - 1) > v) {
            *hole = *(hole - 1);
            --hole;
        }
        *hole = v;
    }
}

double select_in_place(Iter first, Iter last, std::size_t k);

// Median of the group-of-five medians, gathered at the front of the range.
double median_of_medians(Iter first, Iter last) {
    const auto n = static_cast<std::size_t>(last - first);
    std::size_t groups = 0;
    for (std::size_t start = 0; start < n; start += 5, ++groups) {
        const auto g_first = first + static_cast<std::ptrdiff_t>(start);
        const auto g_last = first + static_cast<std::ptrdiff_t>(std::min(start + 5, n));
        insertion_sort(g_first, g_last);
        std::iter_swap(first + static_cast<std::ptrdiff_t>(groups), g_first + (g_last - g_first - 1) / 2);
    }
    return select_in_place(first, first + static_cast<std::ptrdiff_t>(groups), (groups - 1) / 2);
}

// k is 0-based within [first, last).
double select_in_place(Iter first, Iter last, std::size_t k) {
    while (true) {
        const auto n = static_cast<std::size_t>(last - first);
        if (n <= 5) {
            insertion_sort(first, last);
            return *(first + static_cast<std::ptrdiff_t>(k));
        }
        const double pivot = median_of_medians(first, last);

        // Three-way partition: [first, lt) < pivot, [lt, gt) == pivot, [gt, last) > pivot.
        auto lt = first;
        auto gt = last;
        auto it = first;
        while (it < gt) {
            if (*it < pivot) {
                std::iter_swap(it++, lt++);
            } else if (*it > pivot) {
                std::iter_swap(it, --gt);
            } else {
                ++it;
            }
        }
        const auto n_less = static_cast<std::size_t>(lt - first);
        const auto n_equal = static_cast<std::size_t>(gt - lt);
        if (k < n_less) {
            last = lt;
        } else if (k < n_less + n_equal) {
            return pivot;
        } else {
            k -= n_less + n_equal;
            first = gt;
        }
    }
}

std::vector<double> gather(std::span<const double> g, const IndexSet& idx) {
    std::vector<double> out(idx.size());
    for (std::size_t r = 0; r < idx.size(); ++r) out[r] = g[idx[r]];
    return out;
}

}  // namespace

double select_kth(std::span<const double> values, std::size_t k, RankFrom from) {
    if (k < 1 || k > values.size()) {
        throw Error(ErrorCode::RankOutOfRange, "rank " + std::to_string(k) + " outside [1, " +
                                                   std::to_string(values.size()) + "]");
    }
    for (double v : values) {
        if (!std::isfinite(v)) throw Error(ErrorCode::ParseError, "select_kth needs finite values");
    }
    std::vector<double> scratch(values.begin(), values.end());
    const std::size_t rank0 = from == RankFrom::Smallest ? k - 1 : values.size() - k;
    return select_in_place(scratch.begin(), scratch.end(), rank0);
}

std::size_t removal_count(double pi, std::size_t set_size) {
    const double raw = pi * static_cast<double>(set_size);
    return static_cast<std::size_t>(std::floor(raw + 1e-9));
}

PruneResult prune(std::span<const double> g, std::span<const int> s, const NoiseRates& rates) {
    if (g.size() != s.size()) throw Error(ErrorCode::LengthMismatch, "g and labels differ in length");
    if (!(rates.rho1 >= 0.0 && rates.rho0 >= 0.0 && rates.rho1 + rates.rho0 < 1.0) ||
        !(rates.pi1 >= 0.0 && rates.pi1 < 1.0 && rates.pi0 >= 0.0 && rates.pi0 < 1.0)) {
        throw Error(ErrorCode::InvalidRates, "prune needs valid noise rates");
    }
    const auto [pos, neg] = split_by_observed_label(s);
    const auto drop_pos = removal_count(rates.pi1, pos.size());
    const auto drop_neg = removal_count(rates.pi0, neg.size());
    if (drop_pos >= pos.size() || drop_neg >= neg.size()) {
        throw Error(ErrorCode::OverPrune,
                    "would remove " + std::to_string(drop_pos) + "/" + std::to_string(pos.size()) +
                        " positives and " + std::to_string(drop_neg) + "/" +
                        std::to_string(neg.size()) + " negatives");
    }

    PruneResult out;
    out.k1_threshold = select_kth(gather(g, pos), drop_pos + 1, RankFrom::Smallest);
    out.k0_threshold = select_kth(gather(g, neg), drop_neg + 1, RankFrom::Largest);

    const double w_pos = 1.0 / (1.0 - rates.rho1);
    const double w_neg = 1.0 / (1.0 - rates.rho0);
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (s[i] == 1) {
            if (g[i] >= out.k1_threshold) {
                out.kept_indices.push_back(i);
                out.weights.push_back(w_pos);
            } else {
                ++out.removed_pos;
            }
        } else {
            if (g[i] <= out.k0_threshold) {
                out.kept_indices.push_back(i);
                out.weights.push_back(w_neg);
            } else {
                ++out.removed_neg;
            }
        }
    }
    return out;
}

RankPruneOutput rank_prune_fit(const Dataset& d, const FitConfig& cfg, const RankPruneOptions& opts) {
    const auto& s = d.observed_labels();
    RankPruneOutput out;

    const auto plan = make_folds(s, opts.cv_k, opts.stratified, opts.seed);
    out.g = cv_predict_proba(d, s, plan, cfg);
    out.thresholds = thresholds(out.g.g, s);

    if (opts.rates_override) {
        out.rates = *opts.rates_override;
        out.rates_estimated = false;
    } else {
        const auto counts = confident_counts(out.g.g, s, out.thresholds);
        const auto conf = estimate_rates(counts);
        out.rates = complete_rates(conf.rho1, conf.rho0, positive_fraction(s));
    }

    out.prune = prune(out.g.g, s, out.rates);
    const auto kept = d.subset(out.prune.kept_indices);
    out.model = fit(kept, kept.observed_labels(), out.prune.weights, cfg);
    return out;
}

nlohmann::json prune_to_json(const PruneResult& p) {
    return nlohmann::json{{"kept_indices", p.kept_indices},
                          {"weights", p.weights},
                          {"k1_threshold", p.k1_threshold},
                          {"k0_threshold", p.k0_threshold},
                          {"removed_pos", p.removed_pos},
                          {"removed_neg", p.removed_neg}};
}

nlohmann::json rates_to_json(const NoiseRates& r) {
    return nlohmann::json{{"rho1", r.rho1}, {"rho0", r.rho0}, {"pi1", r.pi1},   {"pi0", r.pi0},
                          {"p_s1", r.p_s1}, {"p_y1", r.p_y1}, {"clamped", r.clamped}};
}

}  // namespace rankprune
