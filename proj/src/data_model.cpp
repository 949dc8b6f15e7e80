#include "rankprune/data_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "rankprune/errors.hpp"

namespace rankprune {

void check_binary(std::span<const int> labels, const char* what) {
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != 0 && labels[i] != 1) {
            throw Error(ErrorCode::ParseError, std::string(what) + " label at row " +
                                                   std::to_string(i) + " is not 0/1");
        }
    }
}

Dataset::Dataset(Matrix features, Labels observed, std::optional<Labels> hidden)
    : features_(std::move(features)), observed_(std::move(observed)), hidden_(std::move(hidden)) {
    if (observed_.size() != size()) {
        throw Error(ErrorCode::LengthMismatch, "observed labels do not match feature rows");
    }
    if (size() > 0 && dim() == 0) {
        throw Error(ErrorCode::DimensionMismatch, "dataset needs at least one feature column");
    }
    check_binary(observed_, "observed");
    if (hidden_) {
        if (hidden_->size() != size()) {
            throw Error(ErrorCode::LengthMismatch, "hidden labels do not match feature rows");
        }
        check_binary(*hidden_, "hidden");
    }
}

const Labels& Dataset::hidden_labels() const {
    if (!hidden_) throw Error(ErrorCode::MissingHiddenLabels, "dataset has no hidden labels");
    return *hidden_;
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
    Matrix x(static_cast<Eigen::Index>(rows.size()), features_.cols());
    Labels s(rows.size());
    std::optional<Labels> y;
    if (hidden_) y.emplace(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto src = rows[r];
        if (src >= size()) throw Error(ErrorCode::LengthMismatch, "row index out of range");
        x.row(static_cast<Eigen::Index>(r)) = features_.row(static_cast<Eigen::Index>(src));
        s[r] = observed_[src];
        if (y) (*y)[r] = (*hidden_)[src];
    }
    return Dataset(std::move(x), std::move(s), std::move(y));
}

Dataset Dataset::with_observed(Labels observed) const {
    return Dataset(features_, std::move(observed), hidden_);
}

std::pair<IndexSet, IndexSet> split_by_observed_label(std::span<const int> labels) {
    IndexSet pos;
    IndexSet neg;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        (labels[i] == 1 ? pos : neg).push_back(i);
    }
    return {std::move(pos), std::move(neg)};
}

double positive_fraction(std::span<const int> labels) {
    if (labels.empty()) return 0.0;
    const auto ones = std::count(labels.begin(), labels.end(), 1);
    return static_cast<double>(ones) / static_cast<double>(labels.size());
}

NoiseRates complete_rates(double rho1, double rho0, double p_s1) {
    if (!(p_s1 > 0.0 && p_s1 < 1.0)) {
        throw Error(ErrorCode::InvalidRates, "p_s1 must lie in (0,1)");
    }
    if (!(rho1 >= 0.0 && rho1 < 1.0 && rho0 >= 0.0 && rho0 < 1.0)) {
        throw Error(ErrorCode::InvalidRates, "noise rates must lie in [0,1)");
    }
    const double denom = 1.0 - rho1 - rho0;
    if (denom <= kMinRateDenominator) {
        throw Error(ErrorCode::InvalidRates, "rho1 + rho0 must be below 1");
    }

    NoiseRates r;
    r.rho1 = rho1;
    r.rho0 = rho0;
    r.p_s1 = p_s1;
    double pi1 = (rho0 / p_s1) * (1.0 - p_s1 - rho1) / denom;
    double pi0 = (rho1 / (1.0 - p_s1)) * (p_s1 - rho0) / denom;
    double p_y1 = (p_s1 - rho0) / denom;

    auto clamp = [&r](double v, double lo, double hi) {
        if (v < lo || v > hi) {
            r.clamped = true;
            return std::clamp(v, lo, hi);
        }
        return v;
    };
    r.pi1 = clamp(pi1, 0.0, kMaxDerivedRate);
    r.pi0 = clamp(pi0, 0.0, kMaxDerivedRate);
    r.p_y1 = clamp(p_y1, 1.0 - kMaxDerivedRate, kMaxDerivedRate);
    return r;
}

double rho0_from_pi1(double pi1, double rho1, double p_y1) {
    if (!(p_y1 > 0.0 && p_y1 < 1.0)) throw Error(ErrorCode::InvalidRates, "p_y1 must lie in (0,1)");
    if (!(pi1 >= 0.0 && pi1 < 1.0 && rho1 >= 0.0 && rho1 < 1.0)) {
        throw Error(ErrorCode::InvalidRates, "pi1 and rho1 must lie in [0,1)");
    }
    // pi1 * p_s1 = rho0 (1 - p_y1), p_s1 = p_y1 (1 - rho1) + (1 - p_y1) rho0
    const double rho0 = pi1 * p_y1 * (1.0 - rho1) / ((1.0 - p_y1) * (1.0 - pi1));
    if (!(rho0 < 1.0) || rho1 + rho0 >= 1.0) {
        throw Error(ErrorCode::InvalidRates, "pair (pi1=" + std::to_string(pi1) + ", rho1=" +
                                                 std::to_string(rho1) + ") has no valid rho0");
    }
    return rho0;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
        while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
        out.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_double(const std::string& cell, std::size_t row) {
    double v = 0.0;
    const auto* first = cell.data();
    const auto* last = cell.data() + cell.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
        throw Error(ErrorCode::ParseError,
                    "bad feature value '" + cell + "' at data row " + std::to_string(row));
    }
    return v;
}

int parse_label(const std::string& cell, std::size_t row) {
    if (cell == "0") return 0;
    if (cell == "1") return 1;
    throw Error(ErrorCode::ParseError,
                "label '" + cell + "' at data row " + std::to_string(row) + " is not 0 or 1");
}

struct CsvLayout {
    std::size_t m = 0;
    bool has_s = false;
    bool has_y = false;
};

CsvLayout parse_header(const std::string& line, bool labels_required) {
    const auto cols = split_csv_line(line);
    CsvLayout layout;
    while (layout.m < cols.size() && cols[layout.m] == "f" + std::to_string(layout.m)) ++layout.m;
    std::size_t rest = cols.size() - layout.m;
    if (rest >= 1) {
        if (cols[layout.m] != "s") throw Error(ErrorCode::ParseError, "expected column 's' after features");
        layout.has_s = true;
    }
    if (rest >= 2) {
        if (cols[layout.m + 1] != "y") throw Error(ErrorCode::ParseError, "expected column 'y' after 's'");
        layout.has_y = true;
    }
    if (rest > 2) throw Error(ErrorCode::ParseError, "unexpected trailing header columns");
    if (layout.m == 0) throw Error(ErrorCode::ParseError, "header has no feature columns f0..");
    if (labels_required && !layout.has_s) throw Error(ErrorCode::ParseError, "header lacks label column 's'");
    return layout;
}

struct RawCsv {
    CsvLayout layout;
    std::vector<double> values;
    Labels s;
    Labels y;
};

RawCsv read_raw(std::istream& in, bool labels_required) {
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, "empty CSV (missing header)");
    RawCsv raw;
    raw.layout = parse_header(line, labels_required);
    const std::size_t width = raw.layout.m + (raw.layout.has_s ? 1 : 0) + (raw.layout.has_y ? 1 : 0);
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != width) {
            throw Error(ErrorCode::ParseError, "data row " + std::to_string(row) + " has " +
                                                   std::to_string(cells.size()) + " cells, expected " +
                                                   std::to_string(width));
        }
        for (std::size_t j = 0; j < raw.layout.m; ++j) raw.values.push_back(parse_double(cells[j], row));
        if (raw.layout.has_s) raw.s.push_back(parse_label(cells[raw.layout.m], row));
        if (raw.layout.has_y) raw.y.push_back(parse_label(cells[raw.layout.m + 1], row));
        ++row;
    }
    return raw;
}

Matrix to_matrix(const RawCsv& raw) {
    const auto m = static_cast<Eigen::Index>(raw.layout.m);
    const auto n = static_cast<Eigen::Index>(raw.values.size() / raw.layout.m);
    Matrix x(n, m);
    std::copy(raw.values.begin(), raw.values.end(), x.data());
    return x;
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
    return in;
}

}  // namespace

Dataset read_dataset_csv(std::istream& in) {
    auto raw = read_raw(in, true);
    auto x = to_matrix(raw);
    std::optional<Labels> y;
    if (raw.layout.has_y) y = std::move(raw.y);
    return Dataset(std::move(x), std::move(raw.s), std::move(y));
}

Dataset read_dataset_csv(const std::string& path) {
    auto in = open_input(path);
    return read_dataset_csv(in);
}

void write_dataset_csv(std::ostream& out, const Dataset& d) {
    const auto m = d.dim() == 0 ? std::size_t{1} : d.dim();
    for (std::size_t j = 0; j < m; ++j) out << 'f' << j << ',';
    out << 's';
    if (d.has_hidden_labels()) out << ",y";
    out << '\n';
    const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
    for (std::size_t i = 0; i < d.size(); ++i) {
        for (std::size_t j = 0; j < d.dim(); ++j) {
            out << d.features()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) << ',';
        }
        out << d.observed_labels()[i];
        if (d.has_hidden_labels()) out << ',' << d.hidden_labels()[i];
        out << '\n';
    }
    out.precision(old_precision);
}

void write_dataset_csv(const std::string& path, const Dataset& d) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
    write_dataset_csv(out, d);
}

Matrix read_features_csv(std::istream& in) {
    return to_matrix(read_raw(in, false));
}

Matrix read_features_csv(const std::string& path) {
    auto in = open_input(path);
    return read_features_csv(in);
}

}  // namespace rankprune
