#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"

#include "rankprune/cli.hpp"
#include "rankprune/config.hpp"
#include "rankprune/errors.hpp"
#include "rankprune/idx.hpp"
#include "rankprune/records.hpp"
#include "rankprune/synthetic_bench.hpp"

using namespace rankprune;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        std::random_device rd;
        path = fs::temp_directory_path() / ("rankprune_test_" + std::to_string(rd()) + std::to_string(rd()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

struct RunResult {
    int code;
    std::string out;
    std::string err;
};

RunResult run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream(path, std::ios::binary) << text;
}

void put_u32(std::vector<std::uint8_t>& b, std::uint32_t v) {
    for (int shift = 24; shift >= 0; shift -= 8) b.push_back(static_cast<std::uint8_t>(v >> shift));
}

std::vector<std::uint8_t> image_fixture() {
    std::vector<std::uint8_t> b;
    put_u32(b, 0x00000803);
    put_u32(b, 2);
    put_u32(b, 2);
    put_u32(b, 2);
    for (std::uint8_t p : {0, 255, 51, 102, 255, 0, 0, 204}) b.push_back(p);
    return b;
}

std::vector<std::uint8_t> label_fixture(std::initializer_list<std::uint8_t> labels) {
    std::vector<std::uint8_t> b;
    put_u32(b, 0x00000801);
    put_u32(b, static_cast<std::uint32_t>(labels.size()));
    b.insert(b.end(), labels);
    return b;
}

// A small noisy synthetic dataset written as CSV.
std::string noisy_csv(const TempDir& dir, double rho1, double rho0, int n = 600) {
    SynthConfig cfg;
    cfg.n = n;
    cfg.d = 2;
    cfg.p_y1 = 0.5;
    Rng rng(31);
    const auto gen = generate(cfg, rng);
    const auto flips = corrupt(gen.data.hidden_labels(), rho1, rho0, rng);
    const auto path = dir.file("data.csv");
    write_dataset_csv(path, gen.data.with_observed(flips.s));
    return path;
}

}  // namespace

TEST_CASE("exit code mapping") {
    CHECK(cli::exit_code_for(ErrorCode::DegenerateCounts) == cli::kExitDegenerate);
    CHECK(cli::exit_code_for(ErrorCode::InfeasibleConfig) == cli::kExitInfeasible);
    CHECK(cli::exit_code_for(ErrorCode::ParseError) == cli::kExitInput);
    CHECK(cli::exit_code_for(ErrorCode::IoError) == cli::kExitInput);
}

TEST_CASE("help and usage errors") {
    CHECK(run({"--help"}).code == 0);
    CHECK(run({"estimate"}).code == cli::kExitInput);
    CHECK(run({"no-such-command"}).code == cli::kExitInput);
}

TEST_CASE("estimate") {
    TempDir dir;
    SUBCASE("malformed label") {
        write_text(dir.file("bad.csv"), "f0,s\n0.1,1\n0.2,2\n0.3,0\n");
        const auto r = run({"estimate", dir.file("bad.csv")});
        CHECK(r.code == cli::kExitInput);
        CHECK_FALSE(r.err.empty());
    }
    SUBCASE("missing file") {
        CHECK(run({"estimate", dir.file("absent.csv")}).code == cli::kExitInput);
    }
    SUBCASE("zero-noise separable data") {
        const auto path = noisy_csv(dir, 0.0, 0.0);
        const auto r = run({"estimate", path, "--json", "--seed", "3"});
        REQUIRE(r.code == 0);
        const auto j = nlohmann::json::parse(r.out);
        CHECK(j.at("rho1").get<double>() < 0.05);
        CHECK(j.at("rho0").get<double>() < 0.05);
        CHECK(j.contains("lb_y1"));
        CHECK(j.contains("ub_y0"));
    }
    SUBCASE("text output and determinism") {
        const auto path = noisy_csv(dir, 0.3, 0.1);
        const auto a = run({"estimate", path, "--seed", "5"});
        const auto b = run({"estimate", path, "--seed", "5"});
        REQUIRE(a.code == 0);
        CHECK(a.out == b.out);
        for (const char* key : {"rho1_hat", "rho0_hat", "pi1_hat", "pi0_hat", "lb_y1", "ub_y0"}) {
            CHECK(a.out.find(key) != std::string::npos);
        }
    }
    SUBCASE("single positive cannot be cross-validated") {
        write_text(dir.file("tiny.csv"), "f0,s\n1,1\n1,0\n1,0\n1,0\n1,0\n1,0\n");
        const auto r = run({"estimate", dir.file("tiny.csv")});
        CHECK(r.code == cli::kExitInput);
    }
}

TEST_CASE("train and predict round trip") {
    TempDir dir;
    const auto path = noisy_csv(dir, 0.3, 0.1);
    const auto model = dir.file("model.json");
    const auto r = run({"train", path, "--model-out", model, "--prune-out", dir.file("prune.json"),
                        "--seed", "2"});
    REQUIRE(r.code == 0);
    const auto m = model_from_json(nlohmann::json::parse(slurp(model)));
    const auto d = read_dataset_csv(path);

    const auto p = run({"predict", "--model", model, path, "--out", dir.file("pred.csv")});
    REQUIRE(p.code == 0);
    std::istringstream in(slurp(dir.file("pred.csv")));
    std::string line;
    std::getline(in, line);
    CHECK(line == "g,pred");
    const auto expect = predict_proba(m, d.features());
    std::size_t i = 0;
    while (std::getline(in, line)) {
        REQUIRE(i < expect.size());
        const auto comma = line.find(',');
        CHECK(std::stod(line.substr(0, comma)) == expect[i]);
        CHECK(std::stoi(line.substr(comma + 1)) == (expect[i] >= 0.5 ? 1 : 0));
        ++i;
    }
    CHECK(i == expect.size());
    CHECK(nlohmann::json::parse(slurp(dir.file("prune.json"))).contains("kept_indices"));
}

TEST_CASE("train overrides") {
    TempDir dir;
    const auto path = noisy_csv(dir, 0.0, 0.0);
    CHECK(run({"train", path, "--model-out", dir.file("m.json"), "--rho1", "0.1"}).code == cli::kExitInput);
    CHECK(run({"train", path, "--model-out", dir.file("m.json"), "--rho1", "0.7", "--rho0", "0.5"}).code ==
          cli::kExitInput);
    REQUIRE(run({"train", path, "--model-out", dir.file("m.json"), "--rho1", "0", "--rho0", "0"}).code == 0);
    // Zero rates keep every example at unit weight: a plain fit.
    const auto d = read_dataset_csv(path);
    const auto plain = fit(d, d.observed_labels(), {}, FitConfig{});
    const auto m = model_from_json(nlohmann::json::parse(slurp(dir.file("m.json"))));
    CHECK((m.weights - plain.weights).norm() < 1e-12);
    CHECK(m.bias == doctest::Approx(plain.bias).epsilon(1e-12));
}

TEST_CASE("bench") {
    TempDir dir;
    const auto cfg = dir.file("sweep.cfg");
    write_text(cfg,
               "# tiny sweep\naxis = n\nvalues = 200\npairs = 0:0,0.25:0.25\nmethods = RP,naive\n"
               "trials = 1\nthreads = 2\n");
    SUBCASE("byte-identical reruns") {
        REQUIRE(run({"bench", "--config", cfg, "--out", dir.file("a"), "--trials", "1", "--seed", "7"}).code == 0);
        REQUIRE(run({"bench", "--config", cfg, "--out", dir.file("b"), "--trials", "1", "--seed", "7"}).code == 0);
        CHECK(slurp(dir.file("a/trials.csv")) == slurp(dir.file("b/trials.csv")));
        CHECK(slurp(dir.file("a/aggregate.csv")) == slurp(dir.file("b/aggregate.csv")));
        std::istringstream in(slurp(dir.file("a/trials.csv")));
        const auto recs = read_records_csv(in);
        CHECK(recs.size() == 4);
        for (const auto& r : recs) CHECK(r.seed != 0);
    }
    SUBCASE("empty values list") {
        write_text(dir.file("empty.cfg"), "values =\n");
        CHECK(run({"bench", "--config", dir.file("empty.cfg"), "--out", dir.file("c")}).code ==
              cli::kExitInfeasible);
    }
    SUBCASE("infeasible pair") {
        write_text(dir.file("inf.cfg"), "values = 4\npairs = 0.9:0.9\n");
        CHECK(run({"bench", "--config", dir.file("inf.cfg"), "--out", dir.file("c")}).code ==
              cli::kExitInfeasible);
    }
    SUBCASE("unknown key") {
        write_text(dir.file("bad.cfg"), "colour = red\n");
        CHECK(run({"bench", "--config", dir.file("bad.cfg"), "--out", dir.file("c")}).code == cli::kExitInput);
    }
    SUBCASE("default config") {
        const auto r = run({"bench", "--print-default-config"});
        REQUIRE(r.code == 0);
        std::istringstream in(r.out);
        const auto spec = parse_sweep_config(in);
        CHECK(spec.base.d == 4.0);
        CHECK(spec.base.dim == 2);
        CHECK(spec.base.n == 5000);
        CHECK(spec.base.p_y1 == 0.2);
        CHECK(spec.base.noise_frac == 0.0);
        CHECK(spec.pairs.size() == 5);
    }
}

TEST_CASE("generate writes a loadable corrupted dataset") {
    TempDir dir;
    const auto out = dir.file("g.csv");
    REQUIRE(run({"generate", "--n", "300", "--rho1", "0.2", "--rho0", "0.1", "--out", out, "--seed", "4"}).code ==
            0);
    const auto d = read_dataset_csv(out);
    CHECK(d.size() == 300);
    CHECK(d.has_hidden_labels());
    CHECK(slurp(out) == [&] {
        const auto other = dir.file("h.csv");
        run({"generate", "--n", "300", "--rho1", "0.2", "--rho0", "0.1", "--out", other, "--seed", "4"});
        return slurp(other);
    }());
    CHECK(run({"generate", "--pi1", "0.9", "--rho1", "0.9", "--out", out}).code == cli::kExitInfeasible);
}

TEST_CASE("IDX parsing") {
    SUBCASE("2x2 fixture") {
        const auto img = image_fixture();
        const auto images = parse_idx_images(img);
        CHECK(images.count == 2);
        CHECK(images.rows == 2);
        CHECK(images.cols == 2);
        const auto lab = label_fixture({1, 0});
        const auto d = mnist_dataset(images, parse_idx_labels(lab), std::nullopt);
        REQUIRE(d.size() == 2);
        CHECK(d.dim() == 4);
        CHECK(d.features()(0, 1) == 1.0);
        CHECK(d.features()(0, 2) == doctest::Approx(0.2));
        CHECK(d.features()(1, 3) == doctest::Approx(0.8));
        CHECK(d.observed_labels() == Labels{1, 0});
    }
    SUBCASE("bad magic") {
        auto img = image_fixture();
        img[3] = 0x01;
        try {
            parse_idx_images(img);
            FAIL("expected BadMagic");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::BadMagic);
        }
        CHECK_THROWS_AS(parse_idx_labels(image_fixture()), Error);
    }
    SUBCASE("truncated") {
        auto img = image_fixture();
        img.pop_back();
        try {
            parse_idx_images(img);
            FAIL("expected TruncatedFile");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::TruncatedFile);
        }
    }
    SUBCASE("digit filter") {
        std::vector<std::uint8_t> img;
        put_u32(img, 0x00000803);
        put_u32(img, 3);
        put_u32(img, 1);
        put_u32(img, 1);
        for (std::uint8_t p : {10, 20, 30}) img.push_back(p);
        const auto lab = label_fixture({1, 7, 1});
        const auto d = mnist_dataset(parse_idx_images(img), parse_idx_labels(lab), 1);
        CHECK(d.observed_labels() == Labels{1, 0, 1});
        CHECK(d.hidden_labels() == Labels{1, 0, 1});
        // Without a digit the raw labels must already be binary.
        CHECK_THROWS_AS(mnist_dataset(parse_idx_images(img), parse_idx_labels(lab), std::nullopt), Error);
    }
    SUBCASE("files on disk") {
        TempDir dir;
        const auto img = image_fixture();
        const auto lab = label_fixture({3, 5});
        std::ofstream(dir.file("img"), std::ios::binary)
            .write(reinterpret_cast<const char*>(img.data()), static_cast<std::streamsize>(img.size()));
        std::ofstream(dir.file("lab"), std::ios::binary)
            .write(reinterpret_cast<const char*>(lab.data()), static_cast<std::streamsize>(lab.size()));
        const auto d = load_mnist_idx(dir.file("img"), dir.file("lab"), 5);
        CHECK(d.observed_labels() == Labels{0, 1});
        CHECK_THROWS_AS(load_mnist_idx(dir.file("nope"), dir.file("lab"), 5), Error);
    }
}

TEST_CASE("sweep config parsing") {
    std::istringstream in(
        "# comment\n\naxis = noise_frac\nvalues = 0, 0.25,0.5\npairs = 0:0,0.5:0.5\n"
        "methods = RP,truth\nd = 3\ndim = 5\nn = 100\np_y1 = 0.3\ntrials = 4\nseed = 11\ncv_k = 4\n"
        "max_iters = 50\ntolerance = 1e-5\nreg_inverse_c = 2\nlearning_rate = auto\nthreads = 1\n");
    const auto spec = parse_sweep_config(in);
    CHECK(spec.axis == Axis::NoiseFrac);
    CHECK(spec.values == std::vector<double>{0, 0.25, 0.5});
    CHECK(spec.pairs.size() == 2);
    CHECK(spec.methods == std::vector<Method>{Method::RP, Method::Truth});
    CHECK(spec.base.dim == 5);
    CHECK(spec.base.seed == 11);
    CHECK(spec.cv_k == 4);
    CHECK(spec.fit.reg_inverse_c == 2.0);
    CHECK_FALSE(spec.fit.learning_rate.has_value());

    std::istringstream again(format_sweep_config(spec));
    const auto back = parse_sweep_config(again);
    CHECK(back.values == spec.values);
    CHECK(back.pairs == spec.pairs);
    CHECK(back.base.n == spec.base.n);
    CHECK(back.fit.tolerance == spec.fit.tolerance);

    for (const char* bad : {"colour = red\n", "n = ten\n", "axis = z\n", "pairs = 0.5\n", "novalue\n"}) {
        std::istringstream b(bad);
        try {
            parse_sweep_config(b);
            FAIL("expected ConfigError for " << bad);
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::ConfigError);
        }
    }
}

TEST_CASE("record CSV and JSON round trips") {
    ExperimentRecord r;
    r.axis = "d";
    r.axis_value = 2.5;
    r.pi1 = 0.25;
    r.rho1 = 0.5;
    r.rho0 = 0.123456789;
    r.d = 2.5;
    r.dim = 2;
    r.n = 5000;
    r.p_y1 = 0.2;
    r.trial = 3;
    r.method = "RP_rho";
    r.metrics = {0.912345678, 0.0312, kNaN};
    r.rho1_hat = 0.41;
    r.rho0_hat = 0.11;
    r.pi1_hat = 0.39;
    r.pi0_hat = 0.12;
    r.seed = 18446744073709551557ULL;

    std::stringstream ss;
    write_records_csv(ss, {r, r});
    const auto back = read_records_csv(ss);
    REQUIRE(back.size() == 2);
    CHECK(back[0].axis == "d");
    CHECK(back[0].method == "RP_rho");
    CHECK(back[0].metrics.f1 == 0.912345678);
    CHECK(std::isnan(back[0].metrics.auc_pr));
    CHECK(back[0].seed == r.seed);
    std::stringstream again;
    write_records_csv(again, back);
    std::stringstream first;
    write_records_csv(first, {r, r});
    CHECK(again.str() == first.str());

    const auto j = record_to_json(r);
    const auto rj = record_from_json(nlohmann::json::parse(j.dump()));
    CHECK(rj.rho0 == r.rho0);
    CHECK(rj.n == r.n);
    CHECK(std::isnan(rj.metrics.auc_pr));
    CHECK(rj.seed == r.seed);
    CHECK(format_real(1.0 / 3.0) == "0.333333333");

    std::istringstream wrong("a,b\n");
    CHECK_THROWS_AS(read_records_csv(wrong), Error);
}

TEST_CASE("aggregate means and standard errors") {
    std::vector<ExperimentRecord> recs(3);
    for (int i = 0; i < 3; ++i) {
        recs[static_cast<std::size_t>(i)].axis = "d";
        recs[static_cast<std::size_t>(i)].method = "RP";
        recs[static_cast<std::size_t>(i)].metrics = {0.5 + 0.1 * i, 0.1, kNaN};
    }
    recs[2].failure = "boom";
    const auto rows = aggregate(recs);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].trials == 3);
    CHECK(rows[0].failures == 1);
    CHECK(rows[0].f1_mean == doctest::Approx(0.55));
    CHECK(rows[0].f1_se == doctest::Approx(0.05));
    CHECK(std::isnan(rows[0].auc_pr_mean));
}
