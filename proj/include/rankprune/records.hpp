#pragma once
// One benchmark trial/method outcome, plus its CSV and JSON forms.

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "json.hpp"

namespace rankprune {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Metrics {
    double f1 = 0.0;
    double error = 0.0;
    double auc_pr = kNaN;  // NaN when no scores were supplied
};

struct ExperimentRecord {
    // config echo
    std::string axis;
    double axis_value = 0.0;
    double pi1 = 0.0;
    double rho1 = 0.0;
    double rho0 = 0.0;
    double d = 0.0;
    int dim = 0;
    int n = 0;
    double p_y1 = 0.0;
    double noise_frac = 0.0;
    int trial = 0;
    std::string method;

    Metrics metrics{kNaN, kNaN, kNaN};
    // Rates used by the method (estimated for RP_rho, given for RP, NaN otherwise).
    double rho1_hat = kNaN;
    double rho0_hat = kNaN;
    double pi1_hat = kNaN;
    double pi0_hat = kNaN;
    double rho1_realized = kNaN;
    double rho0_realized = kNaN;

    double wall_ms = 0.0;
    std::uint64_t seed = 0;
    std::string failure;  // empty on success

    bool ok() const noexcept { return failure.empty(); }
};

// 9 significant digits; NaN is written as `nan`.
std::string format_real(double v);
double parse_real(const std::string& cell);

extern const char* const kRecordCsvHeader;

void write_records_csv(std::ostream& out, const std::vector<ExperimentRecord>& records);
// Reads the columns written by write_records_csv; config fields outside the
// CSV schema are left at their defaults.
std::vector<ExperimentRecord> read_records_csv(std::istream& in);

struct AggregateRow {
    std::string axis;
    double axis_value = 0.0;
    double pi1 = 0.0;
    double rho1 = 0.0;
    std::string method;
    int trials = 0;
    int failures = 0;
    double f1_mean = kNaN, f1_se = kNaN;
    double error_mean = kNaN, error_se = kNaN;
    double auc_pr_mean = kNaN, auc_pr_se = kNaN;
    double rho1_hat_mean = kNaN, rho0_hat_mean = kNaN;
    double pi1_hat_mean = kNaN, pi0_hat_mean = kNaN;
};

// Groups by (axis, axis_value, pi1, rho1, method) in first-seen order; mean
// and standard error over successful trials.
std::vector<AggregateRow> aggregate(const std::vector<ExperimentRecord>& records);
void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows);

nlohmann::json record_to_json(const ExperimentRecord& r);
ExperimentRecord record_from_json(const nlohmann::json& j);

}  // namespace rankprune
