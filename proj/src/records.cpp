#include "rankprune/records.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <tuple>

#include "rankprune/errors.hpp"

namespace rankprune {

const char* const kRecordCsvHeader =
    "axis,axis_value,pi1,rho1,trial,method,f1,error,auc_pr,rho1_hat,rho0_hat,pi1_hat,pi0_hat,seed";

std::string format_real(double v) {
    if (std::isnan(v)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

double parse_real(const std::string& cell) {
    if (cell == "nan") return kNaN;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || ptr != cell.data() + cell.size()) {
        throw Error(ErrorCode::ParseError, "bad number '" + cell + "'");
    }
    return v;
}

void write_records_csv(std::ostream& out, const std::vector<ExperimentRecord>& records) {
    out << kRecordCsvHeader << '\n';
    for (const auto& r : records) {
        out << r.axis << ',' << format_real(r.axis_value) << ',' << format_real(r.pi1) << ','
            << format_real(r.rho1) << ',' << r.trial << ',' << r.method << ','
            << format_real(r.metrics.f1) << ',' << format_real(r.metrics.error) << ','
            << format_real(r.metrics.auc_pr) << ',' << format_real(r.rho1_hat) << ','
            << format_real(r.rho0_hat) << ',' << format_real(r.pi1_hat) << ','
            << format_real(r.pi0_hat) << ',' << r.seed << '\n';
    }
}

std::vector<ExperimentRecord> read_records_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kRecordCsvHeader) {
        throw Error(ErrorCode::ParseError, "record CSV header mismatch");
    }
    std::vector<ExperimentRecord> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> c;
        std::string cell;
        std::istringstream ss(line);
        while (std::getline(ss, cell, ',')) c.push_back(cell);
        if (c.size() != 14) throw Error(ErrorCode::ParseError, "record row needs 14 cells: " + line);
        ExperimentRecord r;
        r.axis = c[0];
        r.axis_value = parse_real(c[1]);
        r.pi1 = parse_real(c[2]);
        r.rho1 = parse_real(c[3]);
        r.trial = std::stoi(c[4]);
        r.method = c[5];
        r.metrics = Metrics{parse_real(c[6]), parse_real(c[7]), parse_real(c[8])};
        r.rho1_hat = parse_real(c[9]);
        r.rho0_hat = parse_real(c[10]);
        r.pi1_hat = parse_real(c[11]);
        r.pi0_hat = parse_real(c[12]);
        r.seed = std::stoull(c[13]);
        out.push_back(std::move(r));
    }
    return out;
}

namespace {

struct Accumulator {
    int n = 0;
    double sum = 0.0;
    double sum_sq = 0.0;

    void add(double v) {
        if (std::isnan(v)) return;
        ++n;
        sum += v;
        sum_sq += v * v;
    }
    double mean() const { return n ? sum / n : kNaN; }
    double stderr_() const {
        if (n < 2) return n == 1 ? 0.0 : kNaN;
        const double m = mean();
        const double var = std::max(0.0, (sum_sq - n * m * m) / (n - 1));
        return std::sqrt(var / n);
    }
};

}  // namespace

std::vector<AggregateRow> aggregate(const std::vector<ExperimentRecord>& records) {
    using Key = std::tuple<std::string, double, double, double, std::string>;
    struct Group {
        AggregateRow row;
        Accumulator f1, err, auc, r1, r0, p1, p0;
    };
    std::map<Key, std::size_t> index;
    std::vector<Group> groups;
    for (const auto& r : records) {
        const Key key{r.axis, r.axis_value, r.pi1, r.rho1, r.method};
        auto [it, inserted] = index.emplace(key, groups.size());
        if (inserted) {
            Group g;
            g.row.axis = r.axis;
            g.row.axis_value = r.axis_value;
            g.row.pi1 = r.pi1;
            g.row.rho1 = r.rho1;
            g.row.method = r.method;
            groups.push_back(std::move(g));
        }
        auto& g = groups[it->second];
        ++g.row.trials;
        if (!r.ok()) {
            ++g.row.failures;
            continue;
        }
        g.f1.add(r.metrics.f1);
        g.err.add(r.metrics.error);
        g.auc.add(r.metrics.auc_pr);
        g.r1.add(r.rho1_hat);
        g.r0.add(r.rho0_hat);
        g.p1.add(r.pi1_hat);
        g.p0.add(r.pi0_hat);
    }
    std::vector<AggregateRow> out;
    out.reserve(groups.size());
    for (auto& g : groups) {
        g.row.f1_mean = g.f1.mean();
        g.row.f1_se = g.f1.stderr_();
        g.row.error_mean = g.err.mean();
        g.row.error_se = g.err.stderr_();
        g.row.auc_pr_mean = g.auc.mean();
        g.row.auc_pr_se = g.auc.stderr_();
        g.row.rho1_hat_mean = g.r1.mean();
        g.row.rho0_hat_mean = g.r0.mean();
        g.row.pi1_hat_mean = g.p1.mean();
        g.row.pi0_hat_mean = g.p0.mean();
        out.push_back(g.row);
    }
    return out;
}

void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows) {
    out << "axis,axis_value,pi1,rho1,method,trials,failures,f1_mean,f1_se,error_mean,error_se,"
           "auc_pr_mean,auc_pr_se,rho1_hat_mean,rho0_hat_mean,pi1_hat_mean,pi0_hat_mean\n";
    for (const auto& r : rows) {
        out << r.axis << ',' << format_real(r.axis_value) << ',' << format_real(r.pi1) << ','
            << format_real(r.rho1) << ',' << r.method << ',' << r.trials << ',' << r.failures << ','
            << format_real(r.f1_mean) << ',' << format_real(r.f1_se) << ','
            << format_real(r.error_mean) << ',' << format_real(r.error_se) << ','
            << format_real(r.auc_pr_mean) << ',' << format_real(r.auc_pr_se) << ','
            << format_real(r.rho1_hat_mean) << ',' << format_real(r.rho0_hat_mean) << ','
            << format_real(r.pi1_hat_mean) << ',' << format_real(r.pi0_hat_mean) << '\n';
    }
}

namespace {

nlohmann::json real(double v) {
    return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v);
}

double real_at(const nlohmann::json& j, const char* key) {
    const auto& v = j.at(key);
    return v.is_null() ? kNaN : v.get<double>();
}

}  // namespace

nlohmann::json record_to_json(const ExperimentRecord& r) {
    return nlohmann::json{
        {"axis", r.axis},
        {"axis_value", real(r.axis_value)},
        {"pi1", real(r.pi1)},
        {"rho1", real(r.rho1)},
        {"rho0", real(r.rho0)},
        {"d", real(r.d)},
        {"dim", r.dim},
        {"n", r.n},
        {"p_y1", real(r.p_y1)},
        {"noise_frac", real(r.noise_frac)},
        {"trial", r.trial},
        {"method", r.method},
        {"f1", real(r.metrics.f1)},
        {"error", real(r.metrics.error)},
        {"auc_pr", real(r.metrics.auc_pr)},
        {"rho1_hat", real(r.rho1_hat)},
        {"rho0_hat", real(r.rho0_hat)},
        {"pi1_hat", real(r.pi1_hat)},
        {"pi0_hat", real(r.pi0_hat)},
        {"rho1_realized", real(r.rho1_realized)},
        {"rho0_realized", real(r.rho0_realized)},
        {"wall_ms", real(r.wall_ms)},
        {"seed", r.seed},
        {"failure", r.failure},
    };
}

ExperimentRecord record_from_json(const nlohmann::json& j) {
    try {
        ExperimentRecord r;
        r.axis = j.at("axis").get<std::string>();
        r.axis_value = real_at(j, "axis_value");
        r.pi1 = real_at(j, "pi1");
        r.rho1 = real_at(j, "rho1");
        r.rho0 = real_at(j, "rho0");
        r.d = real_at(j, "d");
        r.dim = j.at("dim").get<int>();
        r.n = j.at("n").get<int>();
        r.p_y1 = real_at(j, "p_y1");
        r.noise_frac = real_at(j, "noise_frac");
        r.trial = j.at("trial").get<int>();
        r.method = j.at("method").get<std::string>();
        r.metrics = Metrics{real_at(j, "f1"), real_at(j, "error"), real_at(j, "auc_pr")};
        r.rho1_hat = real_at(j, "rho1_hat");
        r.rho0_hat = real_at(j, "rho0_hat");
        r.pi1_hat = real_at(j, "pi1_hat");
        r.pi0_hat = real_at(j, "pi0_hat");
        r.rho1_realized = real_at(j, "rho1_realized");
        r.rho0_realized = real_at(j, "rho0_realized");
        r.wall_ms = real_at(j, "wall_ms");
        r.seed = j.at("seed").get<std::uint64_t>();
        r.failure = j.at("failure").get<std::string>();
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("record JSON: ") + e.what());
    }
}

}  // namespace rankprune
