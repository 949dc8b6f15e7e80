#pragma once
// L2-regularized logistic regression with per-example sample weights.
//
// The fitted objective is
//   sum_i w_i * logloss(sigmoid(x_i . w + b), label_i) + (lambda / 2) * |w|^2
// with lambda = 1 / C and the bias left unregularized. Minimization is
// full-batch gradient descent with an Armijo backtracking line search, so the
// recorded objective never increases between accepted steps.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "rankprune/data_model.hpp"

namespace rankprune {

struct FitConfig {
    int max_iters = 500;
    double tolerance = 1e-6;                 // stop when |grad|_inf / sum(w) falls below
    std::optional<double> learning_rate;     // nullopt = automatic step sizing
    double reg_inverse_c = 1.0;              // C; lambda = 1 / C
    std::uint64_t seed = 0;

    void validate() const;
};

struct LogisticModel {
    Vector weights;
    double bias = 0.0;
    double reg_strength = 1.0;  // lambda
    bool converged = false;
    int iterations_used = 0;
    // Objective value after every accepted step, starting at the initial point.
    std::vector<double> objective_trace;

    std::size_t dim() const noexcept { return static_cast<std::size_t>(weights.size()); }
    double reg_inverse_c() const noexcept { return 1.0 / reg_strength; }
};

inline constexpr double kProbFloor = 1e-12;

double sigmoid(double z) noexcept;

// Value and gradient of the weighted objective at params = [w..., b].
// An empty weight span means unit weights.
struct ObjectiveEval {
    double value = 0.0;
    Vector gradient;
};
ObjectiveEval logistic_objective(const Matrix& x, std::span<const int> labels,
                                 std::span<const double> weights, double lambda,
                                 const Vector& params);

// Throws SingleClassInput if labels hold one class only.
LogisticModel fit(const Matrix& x, std::span<const int> labels, std::span<const double> weights,
                  const FitConfig& cfg);
LogisticModel fit(const Dataset& d, std::span<const int> labels,
                  std::span<const double> weights, const FitConfig& cfg);

// Clamped to [1e-12, 1 - 1e-12].
std::vector<double> predict_proba(const LogisticModel& m, const Matrix& x);
ProbEstimates predict_proba(const LogisticModel& m, const Dataset& d);

// 0.5 decision threshold.
Labels predict_labels(const LogisticModel& m, const Matrix& x);

nlohmann::json model_to_json(const LogisticModel& m);
LogisticModel model_from_json(const nlohmann::json& j);

}  // namespace rankprune
