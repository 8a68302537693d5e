// File surfaces: response/predictor round-trips in both formats, chain and
// results persistence, truth lists, ROC output, and the JSON run manifest.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mobs/errors.hpp"
#include "mobs/gibbs.hpp"
#include "mobs/io.hpp"
#include "mobs/rng.hpp"
#include "mobs/screening.hpp"
#include "mobs/types.hpp"

using namespace mobs;
namespace fs = std::filesystem;

namespace {

// Unique scratch directory per test run, removed on destruction.
struct TempDir {
    fs::path dir;
    TempDir() {
        dir = fs::temp_directory_path() /
              ("mobs_io_test_" + std::to_string(::getpid()) + "_" +
               std::to_string(counter++));
        fs::create_directories(dir);
    }
    ~TempDir() { fs::remove_all(dir); }
    fs::path operator/(const std::string& name) const { return dir / name; }
    static int counter;
};
int TempDir::counter = 0;

bool same_bits(double a, double b) {
    return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b);
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path);
    return std::string(std::istreambuf_iterator<char>(in),
                       std::istreambuf_iterator<char>());
}

bool message_contains(const std::exception& err, const std::string& needle) {
    return std::string(err.what()).find(needle) != std::string::npos;
}

// Kilobytes from a /proc/self/status line such as "VmHWM:  123 kB".
long read_vm_kb(const std::string& key) {
    std::ifstream in("/proc/self/status");
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind(key, 0) != 0) continue;
        long kb = 0;
        std::size_t at = key.size();
        while (at < line.size() && (line[at] == ' ' || line[at] == '\t')) ++at;
        while (at < line.size() && line[at] >= '0' && line[at] <= '9')
            kb = kb * 10 + (line[at++] - '0');
        return kb;
    }
    return -1;
}

Dataset small_dataset() {
    Dataset data;
    data.y.resize(6);
    data.y << 0.25, -1.5, 3.0, 0.0, 2.25, -0.75;
    data.x.resize(6, 3);
    data.x << 0, 1, 2,
              1, 0, 0,
              0, 1, 1,
              1, 0, 3,
              0, kMissingCode, 2,
              1, 1, 0;
    data.levels.resize(3);
    data.levels << 2, 2, 4;
    return data;
}

}  // namespace

TEST_CASE("response files round-trip bitwise") {
    TempDir tmp;
    Eigen::VectorXd y(8);
    y << 0.1, -1.0 / 3.0, 1e-300, 1.7976931348623157e308, 0.0, -0.0,
        std::numeric_limits<double>::infinity(), 3.141592653589793;
    const fs::path path = tmp / "y.csv";
    save_y_csv(y, path);
    Eigen::VectorXd back = load_y_csv(path);
    REQUIRE(back.size() == y.size());
    for (Eigen::Index i = 0; i < y.size(); ++i) CHECK(same_bits(back[i], y[i]));

    CHECK_THROWS_AS(load_y_csv(tmp / "absent.csv"), IoFailure);
    write_text(tmp / "empty.csv", "");
    CHECK_THROWS_AS(load_y_csv(tmp / "empty.csv"), FormatError);
    write_text(tmp / "bad.csv", "1.5\nnot a number\n2.5\n");
    try {
        load_y_csv(tmp / "bad.csv");
        FAIL("expected FormatError");
    } catch (const FormatError& err) {
        CHECK(message_contains(err, "bad.csv:2"));
    }
}

TEST_CASE("predictor CSV round-trips, tolerates a header, rejects bad codes") {
    TempDir tmp;
    Rng gen(31);
    CodeMatrix x(20, 4);
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            const double u = gen.uniform();
            x(i, j) = u < 0.1 ? kMissingCode
                              : static_cast<std::uint8_t>(gen.uniform() * 5.0);
        }
    x(3, 2) = 254;  // largest representable code survives the trip

    const fs::path path = tmp / "x.csv";
    save_x_csv(x, path);
    CHECK(load_x_csv(path) == x);
    // The writer spells missing entries as NA.
    CHECK(read_text(path).find("NA") != std::string::npos);

    // Optional header row is skipped; a second numeric row is not.
    write_text(tmp / "hdr.csv", "snp_a,snp_b,snp_c\n0,1,2\n1,NA,0\n");
    CodeMatrix with_header = load_x_csv(tmp / "hdr.csv");
    CHECK(with_header.rows() == 2);
    CHECK(with_header.cols() == 3);
    CHECK(with_header(1, 1) == kMissingCode);

    write_text(tmp / "only_hdr.csv", "a,b,c\n");
    CHECK_THROWS_AS(load_x_csv(tmp / "only_hdr.csv"), FormatError);
    write_text(tmp / "ragged.csv", "0,1,0\n1,0\n");
    try {
        load_x_csv(tmp / "ragged.csv");
        FAIL("expected FormatError");
    } catch (const FormatError& err) {
        CHECK(message_contains(err, "ragged.csv:2"));
    }
    // 255 is reserved for missing storage; only NA may spell a missing value.
    write_text(tmp / "code255.csv", "0,255\n1,0\n");
    CHECK_THROWS_AS(load_x_csv(tmp / "code255.csv"), FormatError);
    write_text(tmp / "code300.csv", "0,300\n");
    CHECK_THROWS_AS(load_x_csv(tmp / "code300.csv"), FormatError);
    write_text(tmp / "negative.csv", "0,-1\n");
    CHECK_THROWS_AS(load_x_csv(tmp / "negative.csv"), FormatError);
}

TEST_CASE("packed predictor files round-trip and reject corruption") {
    TempDir tmp;
    Rng gen(32);
    CodeMatrix x(15, 5);
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index j = 0; j < x.cols(); ++j)
            x(i, j) = gen.uniform() < 0.05
                          ? kMissingCode
                          : static_cast<std::uint8_t>(gen.uniform() * 3.0);
    Eigen::VectorXi levels(5);
    levels << 3, 3, 4, 255, 3;

    const fs::path path = tmp / "x.bin";
    save_x_packed(x, levels, path);
    auto [back, back_levels] = load_x_packed(path);
    CHECK(back == x);
    CHECK(back_levels == levels);

    // Truncated code block.
    const auto full = read_text(path);
    write_text(tmp / "trunc.bin", full.substr(0, full.size() - 3));
    try {
        load_x_packed(tmp / "trunc.bin");
        FAIL("expected FormatError");
    } catch (const FormatError& err) {
        CHECK(message_contains(err, "truncated"));
    }
    // Wrong magic.
    std::string bad_magic = full;
    bad_magic[0] = 'Z';
    write_text(tmp / "magic.bin", bad_magic);
    CHECK_THROWS_AS(load_x_packed(tmp / "magic.bin"), FormatError);
    // Unsupported version (bytes 4-5, little endian).
    std::string bad_version = full;
    bad_version[4] = 9;
    write_text(tmp / "version.bin", bad_version);
    CHECK_THROWS_AS(load_x_packed(tmp / "version.bin"), FormatError);
    // Level byte below 2.
    std::string bad_level = full;
    bad_level[4 + 2 + 8 + 8] = 1;
    write_text(tmp / "level.bin", bad_level);
    CHECK_THROWS_AS(load_x_packed(tmp / "level.bin"), FormatError);

    CHECK_THROWS_AS(save_x_packed(x, Eigen::VectorXi::Constant(4, 2), tmp / "z.bin"),
                    InvalidArgument);
    Eigen::VectorXi low = levels;
    low[0] = 1;
    CHECK_THROWS_AS(save_x_packed(x, low, tmp / "z.bin"), InvalidArgument);
}

TEST_CASE("load_dataset infers, reads, or rejects level tables") {
    TempDir tmp;
    const Dataset data = small_dataset();
    save_y_csv(data.y, tmp / "y.csv");
    save_x_csv(data.x, tmp / "x.csv");

    // CSV without a sidecar: levels inferred as 1 + max code, floored at 2.
    Dataset inferred = load_dataset(tmp / "y.csv", tmp / "x.csv", DatasetFormat::csv);
    CHECK(inferred.y == data.y);
    CHECK(inferred.x == data.x);
    CHECK(inferred.levels == data.levels);

    write_text(tmp / "zeros.csv", "0,0\n0,1\n");
    write_text(tmp / "y2.csv", "1.0\n2.0\n");
    Dataset floored = load_dataset(tmp / "y2.csv", tmp / "zeros.csv", DatasetFormat::csv);
    CHECK(floored.levels == Eigen::VectorXi::Constant(2, 2));

    // Sidecar declares wider supports than observed.
    write_text(tmp / "levels.txt", "3\n2\n5\n");
    Dataset declared =
        load_dataset(tmp / "y.csv", tmp / "x.csv", DatasetFormat::csv, tmp / "levels.txt");
    Eigen::VectorXi wide(3);
    wide << 3, 2, 5;
    CHECK(declared.levels == wide);

    write_text(tmp / "short.txt", "2\n2\n");
    CHECK_THROWS_AS(load_dataset(tmp / "y.csv", tmp / "x.csv", DatasetFormat::csv,
                                 tmp / "short.txt"),
                    FormatError);
    write_text(tmp / "low.txt", "2\n1\n4\n");
    CHECK_THROWS_AS(load_dataset(tmp / "y.csv", tmp / "x.csv", DatasetFormat::csv,
                                 tmp / "low.txt"),
                    FormatError);
    // Sidecar narrower than the observed codes fails dataset validation.
    write_text(tmp / "narrow.txt", "2\n2\n3\n");
    CHECK_THROWS_AS(load_dataset(tmp / "y.csv", tmp / "x.csv", DatasetFormat::csv,
                                 tmp / "narrow.txt"),
                    InvalidArgument);

    // Packed carries its own table and must agree with the CSV route.
    save_x_packed(data.x, data.levels, tmp / "x.bin");
    Dataset packed = load_dataset(tmp / "y.csv", tmp / "x.bin", DatasetFormat::packed);
    CHECK(packed.y == inferred.y);
    CHECK(packed.x == inferred.x);
    CHECK(packed.levels == inferred.levels);
    CHECK_THROWS_AS(load_dataset(tmp / "y.csv", tmp / "x.bin", DatasetFormat::packed,
                                 tmp / "levels.txt"),
                    InvalidArgument);

    CHECK(parse_dataset_format("csv") == DatasetFormat::csv);
    CHECK(parse_dataset_format("packed") == DatasetFormat::packed);
    CHECK_THROWS_AS(parse_dataset_format("xml"), InvalidArgument);
    CHECK(to_string(DatasetFormat::packed) == "packed");
}

TEST_CASE("chain files round-trip bitwise and feed screening unchanged") {
    TempDir tmp;
    Rng gen(41);
    Dataset data = small_dataset();
    data.y.resize(40);
    data.x.resize(40, 3);
    data.levels << 2, 2, 4;
    for (Eigen::Index i = 0; i < 40; ++i) {
        data.y[i] = gen.normal(0.0, 1.5);
        data.x(i, 0) = static_cast<std::uint8_t>(i % 2);
        data.x(i, 1) = static_cast<std::uint8_t>((i / 2) % 2);
        data.x(i, 2) = static_cast<std::uint8_t>(i % 4);
    }

    ChainConfig cfg;
    cfg.total_iters = 60;
    cfg.burn_in = 40;
    cfg.keep = 20;
    cfg.thin = 1;
    cfg.seed = 5;
    Hyperparams hp;
    hp.k = 3;
    ChainOutput chain = run_chain(data.y, hp, cfg);

    const fs::path path = tmp / "chain.txt";
    persist_chain(chain, cfg, path);
    ChainOutput loaded = load_chain(path);
    REQUIRE(loaded.draws.size() == chain.draws.size());
    for (std::size_t m = 0; m < chain.draws.size(); ++m) {
        const MixtureDraw& a = chain.draws[m];
        const MixtureDraw& b = loaded.draws[m];
        REQUIRE(b.weights.size() == a.weights.size());
        for (Eigen::Index h = 0; h < a.weights.size(); ++h) {
            CHECK(same_bits(a.weights[h], b.weights[h]));
            CHECK(same_bits(a.means[h], b.means[h]));
            CHECK(same_bits(a.variances[h], b.variances[h]));
        }
        CHECK(a.allocations == b.allocations);
    }
    // Retained-state iteration labels: burn_in + (m + 1) * thin.
    CHECK(read_text(path).rfind("41;", 0) == 0);

    // Screening the loaded chain gives the same numbers as the original.
    ScreeningResult from_orig = screen(data, chain, hp);
    ScreeningResult from_file = screen(data, loaded, hp);
    REQUIRE(from_file.probs.size() == from_orig.probs.size());
    for (std::size_t j = 0; j < from_orig.probs.size(); ++j)
        CHECK(same_bits(from_file.probs[j].p0, from_orig.probs[j].p0));
    for (int i = 0; i < 4; ++i)
        CHECK(same_bits(from_file.kappa[i], from_orig.kappa[i]));

    // Shape errors.
    ChainConfig wrong = cfg;
    wrong.keep = 19;
    CHECK_THROWS_AS(persist_chain(chain, wrong, tmp / "z.txt"), InvalidArgument);
    write_text(tmp / "empty.txt", "");
    CHECK_THROWS_AS(load_chain(tmp / "empty.txt"), FormatError);
    write_text(tmp / "sections.txt", "1;0.5,0.5;0,0;1,1\n");
    CHECK_THROWS_AS(load_chain(tmp / "sections.txt"), FormatError);
    write_text(tmp / "kdrift.txt",
               "1;0.5,0.5;0,0;1,1;1,2,1\n2;0.3,0.3,0.4;0,0,0;1,1,1;1,2,1\n");
    try {
        load_chain(tmp / "kdrift.txt");
        FAIL("expected FormatError");
    } catch (const FormatError& err) {
        CHECK(message_contains(err, "kdrift.txt:2"));
    }
    write_text(tmp / "ndrift.txt", "1;0.5,0.5;0,0;1,1;1,2,1\n2;0.5,0.5;0,0;1,1;1,2\n");
    CHECK_THROWS_AS(load_chain(tmp / "ndrift.txt"), FormatError);
    // Draw validation failures surface as format errors with a location.
    write_text(tmp / "badvar.txt", "1;0.5,0.5;0,0;1,-1;1,2,1\n");
    try {
        load_chain(tmp / "badvar.txt");
        FAIL("expected FormatError");
    } catch (const FormatError& err) {
        CHECK(message_contains(err, "badvar.txt:1"));
    }
    write_text(tmp / "notnum.txt", "1;0.5,oops;0,0;1,1;1,2,1\n");
    CHECK_THROWS_AS(load_chain(tmp / "notnum.txt"), FormatError);
}

TEST_CASE("results files persist probabilities and metadata exactly") {
    TempDir tmp;
    ScreeningResult result;
    result.probs = {{0.25, 0.3, 0.25, 0.2},
                    {1.0, 0.0, 0.0, 0.0},
                    {0.015625, 0.484375, 0.25, 0.25}};
    result.degenerate = {0, 1, 0};
    result.kappa << 0.3, 0.2, 0.4, 0.1;
    result.iterations = 7;
    result.converged = true;

    const fs::path path = tmp / "results.csv";
    write_results(result, 123456789012345ull, path);
    LoadedResults loaded = load_results(path);
    REQUIRE(loaded.probs.size() == 3);
    for (std::size_t j = 0; j < 3; ++j) {
        CHECK(same_bits(loaded.probs[j].p0, result.probs[j].p0));
        CHECK(same_bits(loaded.probs[j].p11, result.probs[j].p11));
        CHECK(same_bits(loaded.probs[j].p12, result.probs[j].p12));
        CHECK(same_bits(loaded.probs[j].p13, result.probs[j].p13));
    }
    CHECK(loaded.degenerate == std::vector<std::uint8_t>({0, 1, 0}));
    for (int i = 0; i < 4; ++i) CHECK(same_bits(loaded.kappa[i], result.kappa[i]));
    CHECK(loaded.iterations == 7);
    CHECK(loaded.converged);
    CHECK(loaded.seed == 123456789012345ull);
    Eigen::VectorXd pi0 = loaded.pi0();
    CHECK(pi0.size() == 3);
    CHECK(pi0[1] == 1.0);
    // The loaded statistic drives selection directly.
    CHECK(select_top(pi0, 1) == std::vector<Eigen::Index>{2});

    const std::string trailer = "# kappa: 0.25 0.25 0.25 0.25\n# iterations: 2\n"
                                "# converged: 1\n# seed: 9\n";
    write_text(tmp / "nohdr.csv", "1,1,0,0,0,0\n" + trailer);
    CHECK_THROWS_AS(load_results(tmp / "nohdr.csv"), FormatError);
    const std::string header = "j,pi0,p11,p12,p13,degenerate\n";
    write_text(tmp / "order.csv", header + "2,1,0,0,0,0\n" + trailer);
    CHECK_THROWS_AS(load_results(tmp / "order.csv"), FormatError);
    write_text(tmp / "fields.csv", header + "1,1,0,0,0\n" + trailer);
    CHECK_THROWS_AS(load_results(tmp / "fields.csv"), FormatError);
    write_text(tmp / "flag.csv", header + "1,1,0,0,0,2\n" + trailer);
    CHECK_THROWS_AS(load_results(tmp / "flag.csv"), FormatError);
    write_text(tmp / "sum.csv", header + "1,0.9,0.9,0,0,0\n" + trailer);
    CHECK_THROWS_AS(load_results(tmp / "sum.csv"), FormatError);
    write_text(tmp / "meta.csv", header + "1,1,0,0,0,0\n# bogus: 3\n" + trailer);
    CHECK_THROWS_AS(load_results(tmp / "meta.csv"), FormatError);
    write_text(tmp / "trailer.csv", header + "1,1,0,0,0,0\n# kappa: 0.25 0.25 0.25 0.25\n");
    CHECK_THROWS_AS(load_results(tmp / "trailer.csv"), FormatError);
    write_text(tmp / "rows.csv", header + trailer);
    CHECK_THROWS_AS(load_results(tmp / "rows.csv"), FormatError);

    ScreeningResult inconsistent = result;
    inconsistent.degenerate.pop_back();
    CHECK_THROWS_AS(write_results(inconsistent, 0, tmp / "z.csv"), InvalidArgument);
}

TEST_CASE("truth lists are 1-based on disk, 0-based in memory") {
    TempDir tmp;
    const std::vector<Eigen::Index> truth = {0, 4, 9};
    save_truth(truth, tmp / "truth.txt");
    CHECK(read_text(tmp / "truth.txt") == "1\n5\n10\n");
    CHECK(load_truth(tmp / "truth.txt") == truth);

    write_text(tmp / "blank.txt", "3\n\n7\n");
    CHECK(load_truth(tmp / "blank.txt") == std::vector<Eigen::Index>({2, 6}));
    write_text(tmp / "zero.txt", "0\n");
    CHECK_THROWS_AS(load_truth(tmp / "zero.txt"), FormatError);
    write_text(tmp / "junk.txt", "1\nx\n");
    CHECK_THROWS_AS(load_truth(tmp / "junk.txt"), FormatError);
    CHECK_THROWS_AS(save_truth({-1}, tmp / "z.txt"), InvalidArgument);
}

TEST_CASE("ROC curves serialize with their area") {
    TempDir tmp;
    RocCurve curve;
    curve.threshold = {-std::numeric_limits<double>::infinity(), 0.125, 0.5};
    curve.fpr = {0.0, 0.0, 1.0};
    curve.tpr = {0.0, 1.0, 1.0};
    curve.auc = 1.0;
    write_roc_csv(curve, tmp / "roc.csv");
    const std::string text = read_text(tmp / "roc.csv");
    CHECK(text.rfind("threshold,fpr,tpr\n", 0) == 0);
    CHECK(text.find("-inf,0,0\n") != std::string::npos);
    CHECK(text.find("0.125,0,1\n") != std::string::npos);
    CHECK(text.find("# auc: 1\n") != std::string::npos);
}

TEST_CASE("manifests round-trip with resolved paths and strict keys") {
    TempDir tmp;
    fs::create_directories(tmp / "sub");

    RunManifest manifest;
    manifest.y_path = "data/y.csv";
    manifest.x_path = "data/x.bin";
    manifest.format = DatasetFormat::packed;
    manifest.output_dir = "out";
    manifest.seed = 42;
    manifest.hp.k = 4;
    manifest.hp.alpha = 2.5;
    manifest.hp.tau_omega = 30.0;
    manifest.hp.kappa = Eigen::Vector4d(0.4, 0.3, 0.2, 0.1);
    manifest.chain.total_iters = 800;
    manifest.chain.burn_in = 300;
    manifest.chain.keep = 250;
    manifest.chain.thin = 2;
    manifest.screen.tol = 1e-6;
    manifest.screen.max_iter = 50;
    manifest.screen.threads = 3;
    manifest.screen.chunk_size = 7;
    manifest.screen.mem_budget = 1024;
    manifest.screen.spill_dir = "spill";

    const fs::path path = tmp / "sub" / "run.json";
    save_manifest(manifest, path);
    RunManifest loaded = load_manifest(path);
    CHECK(loaded.y_path == tmp / "sub" / "data/y.csv");
    CHECK(loaded.x_path == tmp / "sub" / "data/x.bin");
    CHECK(loaded.output_dir == tmp / "sub" / "out");
    CHECK(loaded.screen.spill_dir == tmp / "sub" / "spill");
    CHECK(loaded.format == DatasetFormat::packed);
    CHECK(loaded.seed == 42);
    CHECK(loaded.chain.seed == 42);  // chain seed follows the run seed
    CHECK(loaded.hp.k == 4);
    CHECK(same_bits(loaded.hp.alpha, 2.5));
    CHECK(same_bits(loaded.hp.tau_omega, 30.0));
    CHECK(loaded.hp.kappa == Eigen::Vector4d(0.4, 0.3, 0.2, 0.1));
    CHECK(loaded.chain.total_iters == 800);
    CHECK(loaded.chain.burn_in == 300);
    CHECK(loaded.chain.keep == 250);
    CHECK(loaded.chain.thin == 2);
    CHECK(same_bits(loaded.screen.tol, 1e-6));
    CHECK(loaded.screen.max_iter == 50);
    CHECK(loaded.screen.threads == 3);
    CHECK(loaded.screen.chunk_size == 7);
    CHECK(loaded.screen.mem_budget == 1024);

    // Absolute paths pass through untouched.
    write_text(tmp / "abs.json", std::string("{\"y\": \"") + (tmp / "y.csv").string() +
                                     "\", \"x\": \"" + (tmp / "x.csv").string() + "\"}\n");
    RunManifest abs = load_manifest(tmp / "abs.json");
    CHECK(abs.y_path == tmp / "y.csv");
    CHECK(abs.format == DatasetFormat::csv);  // defaults apply
    CHECK(fs::equivalent(abs.output_dir, tmp.dir));

    // Unknown keys are rejected at every level.
    write_text(tmp / "k1.json", "{\"y\": \"a\", \"x\": \"b\", \"extra\": 1}\n");
    try {
        load_manifest(tmp / "k1.json");
        FAIL("expected FormatError");
    } catch (const FormatError& err) {
        CHECK(message_contains(err, "extra"));
    }
    write_text(tmp / "k2.json",
               "{\"y\": \"a\", \"x\": \"b\", \"hyperparams\": {\"kk\": 3}}\n");
    CHECK_THROWS_AS(load_manifest(tmp / "k2.json"), FormatError);
    write_text(tmp / "k3.json", "{\"y\": \"a\", \"x\": \"b\", \"chain\": {\"burn\": 3}}\n");
    CHECK_THROWS_AS(load_manifest(tmp / "k3.json"), FormatError);
    write_text(tmp / "k4.json", "{\"y\": \"a\", \"x\": \"b\", \"screen\": {\"tols\": 1}}\n");
    CHECK_THROWS_AS(load_manifest(tmp / "k4.json"), FormatError);

    write_text(tmp / "noy.json", "{\"x\": \"b\"}\n");
    CHECK_THROWS_AS(load_manifest(tmp / "noy.json"), FormatError);
    write_text(tmp / "syntax.json", "{\"y\": \n");
    CHECK_THROWS_AS(load_manifest(tmp / "syntax.json"), FormatError);
    write_text(tmp / "arr.json", "[1,2]\n");
    CHECK_THROWS_AS(load_manifest(tmp / "arr.json"), FormatError);
    write_text(tmp / "kappa.json",
               "{\"y\": \"a\", \"x\": \"b\", \"hyperparams\": {\"kappa\": [1, 2]}}\n");
    CHECK_THROWS_AS(load_manifest(tmp / "kappa.json"), FormatError);
    write_text(tmp / "fmt.json", "{\"y\": \"a\", \"x\": \"b\", \"format\": \"xml\"}\n");
    CHECK_THROWS_AS(load_manifest(tmp / "fmt.json"), InvalidArgument);
    // Semantic validation runs on load: a broken k never reaches the sampler.
    write_text(tmp / "badk.json",
               "{\"y\": \"a\", \"x\": \"b\", \"hyperparams\": {\"k\": 0}}\n");
    CHECK_THROWS_AS(load_manifest(tmp / "badk.json"), InvalidArgument);

    RunManifest invalid;
    invalid.x_path = "x.csv";
    CHECK_THROWS_AS(save_manifest(invalid, tmp / "z.json"), InvalidArgument);
}

TEST_CASE("packed loader reads a gigabyte matrix without double-buffering") {
    TempDir tmp;
    const std::uint64_t n = 1000000, p = 1000;
    const fs::path path = tmp / "big.bin";

    // Write the file directly (header, level table, column-major codes) so
    // no second copy of the matrix exists in this process beforehand.
    {
        std::ofstream out(path, std::ios::binary);
        const char magic[4] = {'M', 'O', 'B', 'X'};
        const std::uint16_t version = 1;
        out.write(magic, 4);
        out.write(reinterpret_cast<const char*>(&version), sizeof version);
        out.write(reinterpret_cast<const char*>(&n), sizeof n);
        out.write(reinterpret_cast<const char*>(&p), sizeof p);
        std::vector<std::uint8_t> levels(p, 2);
        out.write(reinterpret_cast<const char*>(levels.data()),
                  static_cast<std::streamsize>(p));
        std::vector<std::uint8_t> chunk(n);  // one column at a time
        for (std::uint64_t j = 0; j < p; ++j) {
            for (std::uint64_t i = 0; i < n; ++i)
                chunk[i] = static_cast<std::uint8_t>((i + j) % 2);
            out.write(reinterpret_cast<const char*>(chunk.data()),
                      static_cast<std::streamsize>(n));
        }
        REQUIRE(bool(out));
    }

    const long before_kb = read_vm_kb("VmHWM:");
    REQUIRE(before_kb > 0);
    {
        auto [x, levels] = load_x_packed(path);
        REQUIRE(x.rows() == static_cast<Eigen::Index>(n));
        REQUIRE(x.cols() == static_cast<Eigen::Index>(p));
        CHECK(levels == Eigen::VectorXi::Constant(static_cast<Eigen::Index>(p), 2));
        CHECK(x(0, 0) == 0);
        CHECK(x(1, 0) == 1);
        CHECK(x(0, 999) == 1);
        CHECK(x(999999, 0) == 1);
        const long during_kb = read_vm_kb("VmHWM:");
        // Peak growth must be the matrix itself (977 MB) plus small
        // constants; a staging copy would double it.
        const long matrix_kb = static_cast<long>(n * p / 1024);
        CHECK(during_kb - before_kb < matrix_kb + 131072);  // + 128 MB slack
        CHECK(during_kb - before_kb > matrix_kb / 2);       // it was really loaded
    }
}
