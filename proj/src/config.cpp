#include "rankprune/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "rankprune/errors.hpp"
#include "rankprune/records.hpp"

namespace rankprune {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream ss(s);
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
    T v{};
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw Error(ErrorCode::ConfigError, "bad value '" + text + "' for key '" + key + "'");
    }
    return v;
}

}  // namespace

SweepSpec parse_sweep_config(std::istream& in) {
    SweepSpec spec;
    using Setter = std::function<void(const std::string&, const std::string&)>;
    const std::map<std::string, Setter> setters{
        {"axis", [&](auto&, auto& v) { spec.axis = parse_axis(v); }},
        {"values",
         [&](auto& k, auto& v) {
             spec.values.clear();
             for (const auto& item : split_list(v)) spec.values.push_back(parse_number<double>(k, item));
         }},
        {"pairs",
         [&](auto& k, auto& v) {
             spec.pairs.clear();
             for (const auto& item : split_list(v)) {
                 const auto colon = item.find(':');
                 if (colon == std::string::npos) {
                     throw Error(ErrorCode::ConfigError, "pair '" + item + "' must be pi1:rho1");
                 }
                 spec.pairs.emplace_back(parse_number<double>(k, trim(item.substr(0, colon))),
                                         parse_number<double>(k, trim(item.substr(colon + 1))));
             }
         }},
        {"methods",
         [&](auto&, auto& v) {
             spec.methods.clear();
             for (const auto& item : split_list(v)) spec.methods.push_back(parse_method(item));
         }},
        {"d", [&](auto& k, auto& v) { spec.base.d = parse_number<double>(k, v); }},
        {"dim", [&](auto& k, auto& v) { spec.base.dim = parse_number<int>(k, v); }},
        {"n", [&](auto& k, auto& v) { spec.base.n = parse_number<int>(k, v); }},
        {"p_y1", [&](auto& k, auto& v) { spec.base.p_y1 = parse_number<double>(k, v); }},
        {"noise_frac", [&](auto& k, auto& v) { spec.base.noise_frac = parse_number<double>(k, v); }},
        {"trials", [&](auto& k, auto& v) { spec.base.trials = parse_number<int>(k, v); }},
        {"seed", [&](auto& k, auto& v) { spec.base.seed = parse_number<std::uint64_t>(k, v); }},
        {"cv_k", [&](auto& k, auto& v) { spec.cv_k = parse_number<int>(k, v); }},
        {"max_iters", [&](auto& k, auto& v) { spec.fit.max_iters = parse_number<int>(k, v); }},
        {"tolerance", [&](auto& k, auto& v) { spec.fit.tolerance = parse_number<double>(k, v); }},
        {"reg_inverse_c", [&](auto& k, auto& v) { spec.fit.reg_inverse_c = parse_number<double>(k, v); }},
        {"learning_rate",
         [&](auto& k, auto& v) {
             if (v == "auto") {
                 spec.fit.learning_rate.reset();
             } else {
                 spec.fit.learning_rate = parse_number<double>(k, v);
             }
         }},
        {"threads", [&](auto& k, auto& v) { spec.threads = parse_number<int>(k, v); }},
    };

    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw Error(ErrorCode::ConfigError, "line " + std::to_string(line_no) + ": expected key = value");
        }
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        const auto it = setters.find(key);
        if (it == setters.end()) {
            throw Error(ErrorCode::ConfigError, "line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        }
        it->second(key, value);
    }
    return spec;
}

SweepSpec read_sweep_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open config '" + path + "'");
    return parse_sweep_config(in);
}

std::string format_sweep_config(const SweepSpec& spec) {
    std::ostringstream out;
    out << "axis = " << to_string(spec.axis) << '\n';
    out << "values = ";
    for (std::size_t i = 0; i < spec.values.size(); ++i) out << (i ? "," : "") << format_real(spec.values[i]);
    out << "\npairs = ";
    for (std::size_t i = 0; i < spec.pairs.size(); ++i) {
        out << (i ? "," : "") << format_real(spec.pairs[i].first) << ':' << format_real(spec.pairs[i].second);
    }
    out << "\nmethods = ";
    for (std::size_t i = 0; i < spec.methods.size(); ++i) out << (i ? "," : "") << to_string(spec.methods[i]);
    out << "\nd = " << format_real(spec.base.d) << "\ndim = " << spec.base.dim << "\nn = " << spec.base.n
        << "\np_y1 = " << format_real(spec.base.p_y1) << "\nnoise_frac = " << format_real(spec.base.noise_frac)
        << "\ntrials = " << spec.base.trials << "\nseed = " << spec.base.seed << "\ncv_k = " << spec.cv_k
        << "\nmax_iters = " << spec.fit.max_iters << "\ntolerance = " << format_real(spec.fit.tolerance)
        << "\nreg_inverse_c = " << format_real(spec.fit.reg_inverse_c) << "\nlearning_rate = "
        << (spec.fit.learning_rate ? format_real(*spec.fit.learning_rate) : std::string("auto"))
        << "\nthreads = " << spec.threads << '\n';
    return out.str();
}

}  // namespace rankprune
