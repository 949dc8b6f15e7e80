#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"

#include "rankprune/errors.hpp"
#include "rankprune/pruner.hpp"
#include "rankprune/synthetic_bench.hpp"

using namespace rankprune;

namespace {

NoiseRates inverse_only(double pi1, double pi0) {
    NoiseRates r;
    r.pi1 = pi1;
    r.pi0 = pi0;
    return r;
}

struct SeparableCase {
    Labels y;
    Corruption flips;
    std::vector<double> g;
};

// Every true positive scores above every true negative.
SeparableCase separable_case(std::size_t n, double p_y1, double rho1, double rho0, Rng& rng) {
    SeparableCase c;
    std::bernoulli_distribution pos(p_y1);
    std::uniform_real_distribution<double> u(0.0, 0.5);
    c.y.resize(n);
    for (auto& v : c.y) v = pos(rng) ? 1 : 0;
    c.flips = corrupt(c.y, rho1, rho0, rng);
    c.g.resize(n);
    for (std::size_t i = 0; i < n; ++i) c.g[i] = c.y[i] ? 0.5 + u(rng) : u(rng);
    return c;
}

NoiseRates realized_rates(const Corruption& flips) {
    return complete_rates(flips.realized_rho1(), flips.realized_rho0(), positive_fraction(flips.s));
}

}  // namespace

TEST_CASE("select_kth examples") {
    CHECK(select_kth(std::vector<double>{5.0}, 1, RankFrom::Smallest) == 5.0);
    const std::vector<double> v{0.9, 0.8, 0.3, 0.7};
    CHECK(select_kth(v, 1, RankFrom::Smallest) == 0.3);
    CHECK(select_kth(v, 1, RankFrom::Largest) == 0.9);
    CHECK(select_kth(v, 2, RankFrom::Largest) == 0.8);
    try {
        select_kth(v, 5, RankFrom::Smallest);
        FAIL("expected RankOutOfRange");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::RankOutOfRange);
    }
    CHECK_THROWS_AS(select_kth(v, 0, RankFrom::Smallest), Error);
    CHECK_THROWS_AS(select_kth(std::vector<double>{}, 1, RankFrom::Smallest), Error);
}

TEST_CASE("select_kth matches a sort oracle") {
    std::mt19937_64 rng(1);
    for (int rep = 0; rep < 1000; ++rep) {
        const std::size_t n = 1 + rng() % 300;
        std::vector<double> v(n);
        const bool dup_heavy = rep % 3 == 0;
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (auto& x : v) x = dup_heavy ? static_cast<double>(rng() % 5) : u(rng);
        std::vector<double> sorted = v;
        std::sort(sorted.begin(), sorted.end());
        const std::size_t k = 1 + rng() % n;
        CHECK(select_kth(v, k, RankFrom::Smallest) == sorted[k - 1]);
        CHECK(select_kth(v, k, RankFrom::Largest) == sorted[n - k]);
    }
}

TEST_CASE("removal_count floors") {
    CHECK(removal_count(0.25, 4) == 1);
    CHECK(removal_count(0.3, 10) == 3);  // 0.3 * 10 is 2.9999999999999996
    CHECK(removal_count(0.29, 10) == 2);
    CHECK(removal_count(0.0, 100) == 0);
}

TEST_CASE("zero noise keeps everything with unit weights") {
    const std::vector<double> g{0.9, 0.2, 0.6, 0.4};
    const Labels s{1, 0, 1, 0};
    const auto p = prune(g, s, NoiseRates{});
    CHECK(p.kept_indices == IndexSet{0, 1, 2, 3});
    for (double w : p.weights) CHECK(w == 1.0);
    CHECK(p.removed_pos == 0);
    CHECK(p.removed_neg == 0);
}

TEST_CASE("prune hand example") {
    const std::vector<double> g{0.9, 0.8, 0.3, 0.7, 0.1, 0.2};
    const Labels s{1, 1, 1, 1, 0, 0};
    const auto p = prune(g, s, inverse_only(0.25, 0.0));
    CHECK(p.k1_threshold == 0.7);
    CHECK(p.removed_pos == 1);
    CHECK(p.kept_indices == IndexSet{0, 1, 3, 4, 5});
    CHECK(p.k0_threshold == 0.2);
}

TEST_CASE("ties at the cut are kept") {
    const std::vector<double> g{0.5, 0.5, 0.5, 0.9, 0.1, 0.2};
    const Labels s{1, 1, 1, 1, 0, 0};
    const auto p = prune(g, s, inverse_only(0.5, 0.0));
    CHECK(p.k1_threshold == 0.5);
    CHECK(p.removed_pos == 0);
    CHECK(p.kept_indices.size() == 6);
}

TEST_CASE("prune errors") {
    const std::vector<double> g{0.9, 0.8, 0.1, 0.2};
    const Labels s{1, 1, 0, 0};
    for (const auto& [labels, rates] :
         {std::pair{s, inverse_only(0.5, 1.0 - 1e-12)}, std::pair{Labels{1, 1, 1, 1}, NoiseRates{}}}) {
        try {
            prune(g, labels, rates);
            FAIL("expected OverPrune");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::OverPrune);
        }
    }
    // 0.9999 * 2 floors to 1, which is still allowed.
    CHECK_NOTHROW(prune(g, s, inverse_only(0.9999, 0.0)));
    NoiseRates bad;
    bad.rho1 = 0.6;
    bad.rho0 = 0.5;
    CHECK_THROWS_AS(prune(g, s, bad), Error);
    CHECK_THROWS_AS(prune(std::vector<double>{0.1}, s, NoiseRates{}), Error);
}

TEST_CASE("prune result invariants on random inputs") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t n = 10 + rng() % 200;
        std::vector<double> g(n);
        Labels s(n);
        for (std::size_t i = 0; i < n; ++i) {
            g[i] = rep % 2 ? std::round(u(rng) * 10) / 10 : u(rng);
            s[i] = static_cast<int>(rng() & 1U);
        }
        s[0] = 1;
        s[1] = 0;
        const auto rates = complete_rates(0.3 * u(rng), 0.3 * u(rng), positive_fraction(s));
        PruneResult p;
        try {
            p = prune(g, s, rates);
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::OverPrune);
            continue;
        }
        CHECK(std::is_sorted(p.kept_indices.begin(), p.kept_indices.end()));
        REQUIRE(p.weights.size() == p.kept_indices.size());
        const auto [pos, neg] = split_by_observed_label(s);
        CHECK(p.removed_pos <= removal_count(rates.pi1, pos.size()));
        CHECK(p.removed_neg <= removal_count(rates.pi0, neg.size()));
        if (rep % 2 == 0) {
            // Distinct scores: removal counts are exact.
            CHECK(p.removed_pos == removal_count(rates.pi1, pos.size()));
            CHECK(p.removed_neg == removal_count(rates.pi0, neg.size()));
        }
        CHECK(p.kept_indices.size() + p.removed_pos + p.removed_neg == n);
        for (std::size_t j = 0; j < p.kept_indices.size(); ++j) {
            const auto i = p.kept_indices[j];
            if (s[i]) {
                CHECK(g[i] >= p.k1_threshold);
                CHECK(p.weights[j] == 1.0 / (1.0 - rates.rho1));
            } else {
                CHECK(g[i] <= p.k0_threshold);
                CHECK(p.weights[j] == 1.0 / (1.0 - rates.rho0));
            }
        }
    }
}

TEST_CASE("kept set is invariant under increasing transforms of g") {
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t n = 20 + rng() % 100;
        std::vector<double> g(n);
        Labels s(n);
        for (std::size_t i = 0; i < n; ++i) {
            g[i] = rep % 2 ? std::round(u(rng) * 8) / 8 : u(rng);
            s[i] = static_cast<int>(rng() & 1U);
        }
        s[0] = 1;
        s[1] = 0;
        const auto rates = inverse_only(0.4 * u(rng), 0.4 * u(rng));
        std::vector<double> cubed(n), squashed(n);
        for (std::size_t i = 0; i < n; ++i) {
            cubed[i] = g[i] * g[i] * g[i];
            squashed[i] = sigmoid(10.0 * g[i] - 3.0);
        }
        const auto base = prune(g, s, rates);
        const auto a = prune(cubed, s, rates);
        const auto b = prune(squashed, s, rates);
        CHECK(a.kept_indices == base.kept_indices);
        CHECK(b.kept_indices == base.kept_indices);
        CHECK(a.k1_threshold == base.k1_threshold * base.k1_threshold * base.k1_threshold);
        CHECK(b.k0_threshold == sigmoid(10.0 * base.k0_threshold - 3.0));
    }
}

TEST_CASE("range-separable g with realized rates recovers the correctly labeled set") {
    Rng rng(2017);
    for (int rep = 0; rep < 100; ++rep) {
        std::uniform_real_distribution<double> u(0.0, 0.45);
        const auto c = separable_case(2000, 0.3, u(rng), u(rng), rng);
        const auto p = prune(c.g, c.flips.s, realized_rates(c.flips));
        IndexSet clean;
        for (std::size_t i = 0; i < c.y.size(); ++i) {
            if (c.y[i] == c.flips.s[i]) clean.push_back(i);
        }
        CHECK(p.kept_indices == clean);
    }
}

TEST_CASE("kept positive weights restore the true positive count") {
    Rng rng(5);
    for (int rep = 0; rep < 50; ++rep) {
        const auto c = separable_case(3000, 0.4, 0.35, 0.2, rng);
        const auto rates = realized_rates(c.flips);
        const auto p = prune(c.g, c.flips.s, rates);
        double w_pos = 0.0, w_neg = 0.0;
        for (std::size_t j = 0; j < p.kept_indices.size(); ++j) {
            (c.flips.s[p.kept_indices[j]] ? w_pos : w_neg) += p.weights[j];
        }
        CHECK(w_pos == doctest::Approx(static_cast<double>(c.flips.n_pos)).epsilon(1e-9));
        CHECK(w_neg == doctest::Approx(static_cast<double>(c.flips.n_neg)).epsilon(1e-9));
    }
}

TEST_CASE("rank_prune_fit on clean separable data prunes almost nothing") {
    SynthConfig cfg;
    cfg.n = 1000;
    cfg.d = 4;
    Rng rng(3);
    const auto train = generate(cfg, rng);
    const auto test = generate(cfg, rng);
    RankPruneOptions opts;
    opts.seed = 1;
    const auto rp = rank_prune_fit(train.data, FitConfig{}, opts);
    const auto removed = rp.prune.removed_pos + rp.prune.removed_neg;
    CHECK(static_cast<double>(removed) / cfg.n < 0.02);
    CHECK(rp.rates_estimated);

    const auto& y = train.data.hidden_labels();
    const auto plain = fit(train.data, y, {}, FitConfig{});
    const auto& yt = test.data.hidden_labels();
    const auto f_rp = evaluate(predict_labels(rp.model, test.data.features()), {}, yt).f1;
    const auto f_plain = evaluate(predict_labels(plain, test.data.features()), {}, yt).f1;
    CHECK(std::abs(f_rp - f_plain) <= 0.01);
}

TEST_CASE("rank_prune_fit honours overrides and is deterministic") {
    SynthConfig cfg;
    cfg.n = 800;
    cfg.d = 2;
    cfg.p_y1 = 0.5;
    Rng rng(8);
    const auto data = generate(cfg, rng);
    const auto flips = corrupt(data.data.hidden_labels(), 0.3, 0.1, rng);
    const auto noisy = data.data.with_observed(flips.s);
    RankPruneOptions opts;
    opts.seed = 4;
    const auto a = rank_prune_fit(noisy, FitConfig{}, opts);
    const auto b = rank_prune_fit(noisy, FitConfig{}, opts);
    CHECK(a.model.weights == b.model.weights);
    CHECK(a.prune.kept_indices == b.prune.kept_indices);

    opts.rates_override = complete_rates(0.3, 0.1, positive_fraction(flips.s));
    const auto c = rank_prune_fit(noisy, FitConfig{}, opts);
    CHECK_FALSE(c.rates_estimated);
    CHECK(c.rates.rho1 == 0.3);
    CHECK(c.prune.removed_pos == removal_count(c.rates.pi1, static_cast<std::size_t>(
                                                               std::count(flips.s.begin(), flips.s.end(), 1))));
}

TEST_CASE("prune JSON") {
    const std::vector<double> g{0.9, 0.8, 0.3, 0.7, 0.1, 0.2};
    const Labels s{1, 1, 1, 1, 0, 0};
    const auto j = prune_to_json(prune(g, s, inverse_only(0.25, 0.0)));
    CHECK(j.at("removed_pos").get<int>() == 1);
    CHECK(j.at("kept_indices").size() == 5);
    const auto r = rates_to_json(complete_rates(0.4, 0.1, 0.2));
    CHECK(r.at("pi1").get<double>() == doctest::Approx(0.4));
}
