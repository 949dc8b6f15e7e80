#include "rankprune/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rankprune/errors.hpp"

namespace rankprune {

namespace {

constexpr double kArmijo = 1e-4;
constexpr int kMaxBacktracks = 60;

double softplus(double z) noexcept {
    return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

void check_inputs(const Matrix& x, std::span<const int> labels, std::span<const double> weights) {
    const auto n = static_cast<std::size_t>(x.rows());
    if (labels.size() != n) throw Error(ErrorCode::LengthMismatch, "labels do not match rows");
    if (!weights.empty() && weights.size() != n) {
        throw Error(ErrorCode::LengthMismatch, "sample weights do not match rows");
    }
    check_binary(labels, "training");
    bool has_pos = false;
    bool has_neg = false;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = weights.empty() ? 1.0 : weights[i];
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw Error(ErrorCode::ParseError, "sample weights must be finite and nonnegative");
        }
        if (w > 0.0) (labels[i] == 1 ? has_pos : has_neg) = true;
    }
    if (!has_pos || !has_neg) {
        throw Error(ErrorCode::SingleClassInput, "training labels contain a single class");
    }
}

}  // namespace

void FitConfig::validate() const {
    if (max_iters < 1) throw Error(ErrorCode::ConfigError, "max_iters must be >= 1");
    if (!(tolerance > 0.0)) throw Error(ErrorCode::ConfigError, "tolerance must be > 0");
    if (!(reg_inverse_c > 0.0) || !std::isfinite(reg_inverse_c)) {
        throw Error(ErrorCode::ConfigError, "reg_inverse_c must be a positive finite number");
    }
    if (learning_rate && !(*learning_rate > 0.0)) {
        throw Error(ErrorCode::ConfigError, "learning_rate must be > 0");
    }
}

double sigmoid(double z) noexcept {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

ObjectiveEval logistic_objective(const Matrix& x, std::span<const int> labels,
                                 std::span<const double> weights, double lambda,
                                 const Vector& params) {
    const auto m = x.cols();
    if (params.size() != m + 1) throw Error(ErrorCode::DimensionMismatch, "parameter length");
    const auto w = params.head(m);
    const double b = params(m);
    const Vector z = (x * w).array() + b;

    ObjectiveEval out;
    Vector residual(x.rows());
    double loss = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const auto ui = static_cast<std::size_t>(i);
        const double wt = weights.empty() ? 1.0 : weights[ui];
        const double y = labels[ui];
        loss += wt * (softplus(z(i)) - y * z(i));
        residual(i) = wt * (sigmoid(z(i)) - y);
    }
    out.value = loss + 0.5 * lambda * w.squaredNorm();
    out.gradient.resize(m + 1);
    out.gradient.head(m) = x.transpose() * residual + lambda * w;
    out.gradient(m) = residual.sum();
    return out;
}

LogisticModel fit(const Matrix& x, std::span<const int> labels, std::span<const double> weights,
                  const FitConfig& cfg) {
    cfg.validate();
    check_inputs(x, labels, weights);

    const auto m = x.cols();
    const double lambda = 1.0 / cfg.reg_inverse_c;

    LogisticModel model;
    model.reg_strength = lambda;

    Vector params = Vector::Zero(m + 1);
    ObjectiveEval cur = logistic_objective(x, labels, weights, lambda, params);
    model.objective_trace.push_back(cur.value);

    // Crude Lipschitz bound of the gradient for the first trial step.
    const double max_w = weights.empty() ? 1.0 : *std::max_element(weights.begin(), weights.end());
    const double lipschitz =
        0.25 * max_w * (x.squaredNorm() + static_cast<double>(x.rows())) + lambda;
    double step = cfg.learning_rate.value_or(1.0 / lipschitz);

    // The objective is a sum, so the stopping test uses the gradient per unit
    // of total sample weight.
    const double total_w =
        weights.empty() ? static_cast<double>(x.rows()) : std::accumulate(weights.begin(), weights.end(), 0.0);
    const double grad_tol = cfg.tolerance * std::max(1.0, total_w);

    for (int it = 0; it < cfg.max_iters; ++it) {
        if (cur.gradient.lpNorm<Eigen::Infinity>() <= grad_tol) {
            model.converged = true;
            break;
        }
        const double grad_sq = cur.gradient.squaredNorm();
        double t = step;
        bool accepted = false;
        Vector candidate;
        ObjectiveEval next;
        for (int bt = 0; bt < kMaxBacktracks; ++bt) {
            candidate = params - t * cur.gradient;
            next = logistic_objective(x, labels, weights, lambda, candidate);
            if (std::isfinite(next.value) && next.value <= cur.value - kArmijo * t * grad_sq) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted || !(next.value < cur.value)) break;  // stalled at floating-point resolution

        if (cfg.learning_rate) {
            step = *cfg.learning_rate;
        } else {
            // Barzilai-Borwein proposal for the next trial step.
            const Vector ds = candidate - params;
            const Vector dg = next.gradient - cur.gradient;
            const double sy = ds.dot(dg);
            step = sy > 0.0 ? ds.squaredNorm() / sy : 2.0 * t;
        }
        params = std::move(candidate);
        cur = std::move(next);
        model.objective_trace.push_back(cur.value);
        model.iterations_used = it + 1;
    }
    if (!model.converged && cur.gradient.lpNorm<Eigen::Infinity>() <= grad_tol) {
        model.converged = true;
    }

    model.weights = params.head(m);
    model.bias = params(m);
    return model;
}

LogisticModel fit(const Dataset& d, std::span<const int> labels,
                  std::span<const double> weights, const FitConfig& cfg) {
    if (d.empty()) throw Error(ErrorCode::TooFewExamples, "cannot fit an empty dataset");
    return fit(d.features(), labels, weights, cfg);
}

std::vector<double> predict_proba(const LogisticModel& m, const Matrix& x) {
    if (static_cast<std::size_t>(x.cols()) != m.dim()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "model expects " + std::to_string(m.dim()) + " features, got " +
                        std::to_string(x.cols()));
    }
    const Vector z = (x * m.weights).array() + m.bias;
    std::vector<double> g(static_cast<std::size_t>(z.size()));
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        g[static_cast<std::size_t>(i)] = std::clamp(sigmoid(z(i)), kProbFloor, 1.0 - kProbFloor);
    }
    return g;
}

ProbEstimates predict_proba(const LogisticModel& m, const Dataset& d) {
    ProbEstimates out;
    out.g = predict_proba(m, d.features());
    out.fold_of.assign(out.g.size(), 0);
    return out;
}

Labels predict_labels(const LogisticModel& m, const Matrix& x) {
    const auto g = predict_proba(m, x);
    Labels out(g.size());
    std::transform(g.begin(), g.end(), out.begin(), [](double p) { return p >= 0.5 ? 1 : 0; });
    return out;
}

nlohmann::json model_to_json(const LogisticModel& m) {
    nlohmann::json j;
    j["weights"] = std::vector<double>(m.weights.data(), m.weights.data() + m.weights.size());
    j["bias"] = m.bias;
    j["reg_inverse_c"] = m.reg_inverse_c();
    j["converged"] = m.converged;
    j["iterations_used"] = m.iterations_used;
    return j;
}

LogisticModel model_from_json(const nlohmann::json& j) {
    try {
        LogisticModel m;
        const auto w = j.at("weights").get<std::vector<double>>();
        if (w.empty()) throw Error(ErrorCode::ParseError, "model has no weights");
        m.weights = Eigen::Map<const Vector>(w.data(), static_cast<Eigen::Index>(w.size()));
        m.bias = j.at("bias").get<double>();
        const double c = j.at("reg_inverse_c").get<double>();
        if (!(c > 0.0)) throw Error(ErrorCode::ParseError, "reg_inverse_c must be > 0");
        m.reg_strength = 1.0 / c;
        m.converged = j.at("converged").get<bool>();
        m.iterations_used = j.value("iterations_used", 0);
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("model JSON: ") + e.what());
    }
}

}  // namespace rankprune
