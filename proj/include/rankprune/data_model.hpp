#pragma once
// Core value types shared by every stage of the pruning pipeline.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace rankprune {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

// Labels are kept as integers (0/1) so CSV round-trips stay exact.
using Labels = std::vector<int>;
using IndexSet = std::vector<std::size_t>;

// Observed features and corrupted labels s, with the true labels y attached
// only when the data came from a benchmark generator.
class Dataset {
public:
    Dataset() = default;
    Dataset(Matrix features, Labels observed, std::optional<Labels> hidden = std::nullopt);

    std::size_t size() const noexcept { return static_cast<std::size_t>(features_.rows()); }
    std::size_t dim() const noexcept { return static_cast<std::size_t>(features_.cols()); }
    bool empty() const noexcept { return size() == 0; }

    const Matrix& features() const noexcept { return features_; }
    const Labels& observed_labels() const noexcept { return observed_; }
    bool has_hidden_labels() const noexcept { return hidden_.has_value(); }
    // Throws MissingHiddenLabels when absent.
    const Labels& hidden_labels() const;

    // Rows in the given order; hidden labels follow along.
    Dataset subset(std::span<const std::size_t> rows) const;
    Dataset with_observed(Labels observed) const;

private:
    Matrix features_;
    Labels observed_;
    std::optional<Labels> hidden_;
};

struct NoiseRates {
    double rho1 = 0.0;  // P(s=0 | y=1)
    double rho0 = 0.0;  // P(s=1 | y=0)
    double pi1 = 0.0;   // P(y=0 | s=1)
    double pi0 = 0.0;   // P(y=1 | s=0)
    double p_s1 = 0.5;
    double p_y1 = 0.5;
    // Set when a derived value had to be clamped into range; the consistency
    // identities no longer hold exactly in that case.
    bool clamped = false;
};

// Out-of-sample g(x) = P(s_hat = 1 | x), aligned with the dataset rows.
struct ProbEstimates {
    std::vector<double> g;
    std::vector<int> fold_of;
};

struct Thresholds {
    double lb_y1 = 0.0;
    double ub_y0 = 0.0;
};

inline constexpr double kMaxDerivedRate = 0.9999;
inline constexpr double kMinRateDenominator = 1e-6;

std::pair<IndexSet, IndexSet> split_by_observed_label(std::span<const int> labels);
inline std::pair<IndexSet, IndexSet> split_by_observed_label(const Dataset& d) {
    return split_by_observed_label(d.observed_labels());
}

// Fraction of entries equal to 1.
double positive_fraction(std::span<const int> labels);

// Derives (pi1, pi0, p_y1) from a noise-rate pair and the observed prior.
NoiseRates complete_rates(double rho1, double rho0, double p_s1);

// Converts the (pi1, rho1) experiment parameterization into rho0 given the
// true prior p_y1. Throws InvalidRates when no valid rho0 exists.
double rho0_from_pi1(double pi1, double rho1, double p_y1);

// Throws if labels contain anything but 0/1.
void check_binary(std::span<const int> labels, const char* what);

// CSV with header `f0,...,f{m-1},s[,y]`.
Dataset read_dataset_csv(std::istream& in);
Dataset read_dataset_csv(const std::string& path);
void write_dataset_csv(std::ostream& out, const Dataset& d);
void write_dataset_csv(const std::string& path, const Dataset& d);

// Accepts either a dataset CSV or a features-only CSV (`f0,...`).
Matrix read_features_csv(std::istream& in);
Matrix read_features_csv(const std::string& path);

}  // namespace rankprune
