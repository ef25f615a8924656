#include <doctest.h>

#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include "steermux/cli.hpp"
#include "steermux/config.hpp"
#include "steermux/replay.hpp"

using namespace steermux;

namespace {

struct TempDir {
    std::filesystem::path path;

    TempDir() {
        static int counter = 0;
        path = std::filesystem::temp_directory_path() /
               ("steermux_cli_test_" + std::to_string(counter++));
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }

    std::string file(const std::string& name, const std::string& content) const {
        const auto p = path / name;
        std::ofstream os(p, std::ios::binary);
        os << content;
        return p.string();
    }
};

std::string read_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    REQUIRE(is.good());
    std::ostringstream buffer;
    buffer << is.rdbuf();
    return buffer.str();
}

bool same_bits(Complex a, Complex b) {
    return std::bit_cast<std::uint64_t>(a.real()) == std::bit_cast<std::uint64_t>(b.real()) &&
           std::bit_cast<std::uint64_t>(a.imag()) == std::bit_cast<std::uint64_t>(b.imag());
}

// A two-transmitter misaligned collision with no noise; decodes cleanly.
const char* kRunConfig = R"(# demo collision
[scenario]
mode = misaligned
packet_len = 12
seed = 7
extra_slots = 2
preamble_len = 4

[assignment]
count = 8

[noise]
sigma2 = 0

[transmitter.0]
id = 1
packet = 10, 20, 30, 40, 50, 60, 70, 80, 90, 100, 110, 120

[transmitter.1]
id = 5
packet = 3, 1, 4, 1, 5, 9, 2, 6, 5, 3, 5, 8
symbol_offset = 5
)";

const char* kSweepConfig = R"([sweep]
candidate_count = 12
active_count = 3
packet_len = 10
sigma2 = 1e-6, 1
extra_slots = 1, 2
trials = 5
mode = slot_aligned
seed = 4
)";

}  // namespace

TEST_CASE("parse_config reads sections, pairs, comments and blanks") {
    const ParsedConfig config = parse_config(
        "# header comment\n"
        "[alpha]\n"
        "one = 1\n"
        "two = a, b\r\n"
        "\n"
        "[beta.0]\n"
        "key = value with spaces\n");

    REQUIRE(config.sections.size() == 2);
    const ConfigSection* alpha = config.find("alpha");
    REQUIRE(alpha != nullptr);
    CHECK(alpha->line == 2);
    REQUIRE(alpha->entries.size() == 2);
    CHECK(alpha->find("one")->value == "1");
    CHECK(alpha->find("two")->value == "a, b");  // carriage return stripped
    CHECK(config.find("beta.0")->find("key")->value == "value with spaces");
    CHECK(config.find("gamma") == nullptr);
}

TEST_CASE("parse_config reports positions with its errors") {
    try {
        parse_config("key = 1\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.line() == 1);
        CHECK(e.column() == 1);
        CHECK(std::string(e.what()).find("outside") != std::string::npos);
    }

    try {
        parse_config("[a]\nkey =\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.line() == 2);
        CHECK(e.column() == 6);
    }

    CHECK_THROWS_AS(parse_config("[a]\n[a]\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[a]\nk = 1\nk = 2\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[unterminated\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[a]\njust text\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[]\n"), ConfigError);
}

TEST_CASE("load_run_config assembles the scenario") {
    const RunConfig run = load_run_config(parse_config(kRunConfig));

    CHECK(run.mode == ScenarioMode::Misaligned);
    CHECK(run.extra_slots == 2);
    CHECK(run.preamble_len == 4);
    CHECK(run.max_slots == 0);
    CHECK(run.scenario.packet_len == 12);
    CHECK(run.scenario.seed == 7);
    CHECK(run.scenario.sigma2 == 0.0);
    CHECK(run.scenario.factor2_enabled);  // defaulted from the mode
    CHECK(run.scenario.assignment.size() == 8);

    REQUIRE(run.scenario.transmitters.size() == 2);
    const auto& b = run.scenario.transmitters[1];
    CHECK(b.id == 5);
    CHECK(b.symbol_offset == 5);
    CHECK(b.arrival_slot == 1);
    CHECK(b.packet.at(2) == Complex{4.0, 0.0});
    CHECK_NOTHROW(run.scenario.validate());
}

TEST_CASE("load_run_config covers angles, overrides and complex literals") {
    const RunConfig run = load_run_config(parse_config(
        "[scenario]\n"
        "mode = static_gain\n"
        "packet_len = 6\n"
        "factor2 = false\n"
        "[assignment]\n"
        "angles = 0, 1.5707963267948966\n"
        "[transmitter.0]\n"
        "id = 1\n"
        "gain = 0.5:-0.25\n"
        "packet = 1, 2:3, -4\n"));

    CHECK_FALSE(run.scenario.factor2_enabled);  // explicit override beats the mode
    REQUIRE(run.scenario.assignment.size() == 2);
    CHECK(run.scenario.assignment.angles[1] == std::numbers::pi / 2);
    const auto& tx = run.scenario.transmitters.at(0);
    CHECK(tx.static_gain == Complex{0.5, -0.25});
    CHECK(tx.packet.at(1) == Complex{2.0, 3.0});
    CHECK(tx.packet.at(2) == Complex{-4.0, 0.0});
    CHECK_FALSE(tx.fading);
}

TEST_CASE("load_run_config rejects structural mistakes") {
    CHECK_THROWS_WITH_AS(load_run_config(parse_config("[scenario]\nmode = aligned_t0\n"
                                                      "[assignment]\ncount = 4\n")),
                         doctest::Contains("packet_len"), ConfigError);

    CHECK_THROWS_WITH_AS(
        load_run_config(parse_config("[scenario]\nmode = aligned_t0\npacket_len = 8\n"
                                     "[assignment]\ncount = 4\nangles = 0, 1\n")),
        doctest::Contains("not both"), ConfigError);

    CHECK_THROWS_WITH_AS(
        load_run_config(parse_config("[scenario]\nmode = aligned_t0\npacket_len = 8\n"
                                     "wat = 1\n[assignment]\ncount = 4\n")),
        doctest::Contains("unknown key"), ConfigError);

    CHECK_THROWS_WITH_AS(
        load_run_config(parse_config("[scenario]\nmode = aligned_t0\npacket_len = 8\n"
                                     "[assignment]\ncount = 4\n[typo]\nx = 1\n")),
        doctest::Contains("unknown section"), ConfigError);

    CHECK_THROWS_WITH_AS(
        load_run_config(parse_config("[scenario]\nmode = aligned_t0\npacket_len = 8\n"
                                     "[assignment]\ncount = 4\n"
                                     "[transmitter.1]\nid = 0\npacket = 1, 2\n")),
        doctest::Contains("contiguously"), ConfigError);

    CHECK_THROWS_WITH_AS(
        load_run_config(parse_config("[scenario]\nmode = sideways\npacket_len = 8\n"
                                     "[assignment]\ncount = 4\n")),
        doctest::Contains("sideways"), ConfigError);
}

TEST_CASE("load_sweep_config reads grids and falls back to defaults") {
    const SweepConfig sweep = load_sweep_config(parse_config(kSweepConfig));
    CHECK(sweep.candidate_count == 12);
    CHECK(sweep.active_count == 3);
    CHECK(sweep.packet_len == 10);
    CHECK(sweep.sigma2_grid == std::vector<double>{1e-6, 1.0});
    CHECK(sweep.extra_slots_grid == std::vector<std::size_t>{1, 2});
    CHECK(sweep.trials == 5);
    CHECK(sweep.mode == ScenarioMode::SlotAligned);
    CHECK_FALSE(sweep.known_ids);
    CHECK(sweep.seed == 4);

    const SweepConfig defaults = load_sweep_config(parse_config("[sweep]\ntrials = 9\n"));
    CHECK(defaults.candidate_count == 32);
    CHECK(defaults.sigma2_grid.empty());
    CHECK(defaults.extra_slots_grid.empty());
    CHECK(defaults.trials == 9);
}

TEST_CASE("run configs survive a serialize/parse round trip byte for byte") {
    RunConfig run;
    run.mode = ScenarioMode::StaticGain;
    run.extra_slots = 3;
    run.preamble_len = 2;
    run.max_slots = 40;
    run.scenario.assignment = make_equally_spaced_assignment(6);
    run.scenario.packet_len = 5;
    run.scenario.sigma2 = 0.25;
    run.scenario.seed = 12345;
    run.scenario.factor2_enabled = false;  // differs from the mode default

    TransmitterSpec a;
    a.id = 2;
    a.packet = {Complex{1.0, 0.0}, Complex{2.0, 3.0}, Complex{-4.5, 0.0}, Complex{0.0, -1.0},
                Complex{7.0, 0.0}};
    a.arrival_slot = 2;
    a.symbol_offset = 3;
    a.static_gain = {0.5, -0.25};
    TransmitterSpec b;
    b.id = 4;
    b.packet = {Complex{9.0, 0.0}, Complex{8.0, 0.0}, Complex{7.0, 0.0}, Complex{6.0, 0.0},
                Complex{5.0, 0.0}};
    b.fading = true;
    run.scenario.transmitters = {a, b};

    const std::string text = serialize_run_config(run);
    const RunConfig reloaded = load_run_config(parse_config(text));
    CHECK(serialize_run_config(reloaded) == text);

    CHECK(reloaded.mode == run.mode);
    CHECK(reloaded.max_slots == 40);
    CHECK_FALSE(reloaded.scenario.factor2_enabled);
    CHECK(reloaded.scenario.assignment.angles == run.scenario.assignment.angles);
    CHECK(reloaded.scenario.transmitters[0].static_gain == a.static_gain);
    CHECK(reloaded.scenario.transmitters[0].packet == a.packet);
    CHECK(reloaded.scenario.transmitters[1].fading);
}

TEST_CASE("sweep configs survive the same round trip") {
    SweepConfig sweep;
    sweep.candidate_count = 16;
    sweep.active_count = 4;
    sweep.packet_len = 24;
    sweep.sigma2_grid = {1e-6, 0.001, 1000.0};
    sweep.extra_slots_grid = {1, 2, 5};
    sweep.trials = 42;
    sweep.mode = ScenarioMode::Fading;
    sweep.known_ids = true;
    sweep.seed = 99;
    sweep.preamble_len = 3;
    sweep.threads = 2;

    const std::string text = serialize_sweep_config(sweep);
    const SweepConfig reloaded = load_sweep_config(parse_config(text));
    CHECK(serialize_sweep_config(reloaded) == text);
    CHECK(reloaded.sigma2_grid == sweep.sigma2_grid);
    CHECK(reloaded.extra_slots_grid == sweep.extra_slots_grid);
    CHECK(reloaded.known_ids);
    CHECK(reloaded.threads == 2);
}

TEST_CASE("matrix files round trip bit for bit") {
    ReceivedMatrix m(3);
    m.push_row(std::vector<Complex>{{1.5, -2.0}, {0.0, -0.0}, {1e-300, 3e5}});
    m.push_row(std::vector<Complex>{{std::numbers::pi, 0.25}, {-7.0, 1.0}, {2.0, 2.0}});

    std::stringstream buffer(std::ios::in | std::ios::out | std::ios::binary);
    write_matrix(m, buffer);
    const ReceivedMatrix back = read_matrix(buffer);

    REQUIRE(back.rows() == 2);
    REQUIRE(back.cols() == 3);
    for (std::size_t i = 0; i < back.rows(); ++i)
        for (std::size_t j = 0; j < back.cols(); ++j) CHECK(same_bits(back.at(i, j), m.at(i, j)));
}

TEST_CASE("read_matrix refuses malformed payloads") {
    ReceivedMatrix m(2);
    m.push_row(std::vector<Complex>{{1.0, 0.0}, {2.0, 0.0}});
    std::ostringstream os(std::ios::binary);
    write_matrix(m, os);
    const std::string bytes = os.str();

    auto as_stream = [](std::string data) {
        return std::istringstream(std::move(data), std::ios::binary);
    };

    auto short_header = as_stream(bytes.substr(0, 8));
    CHECK_THROWS_AS(read_matrix(short_header), FormatError);

    auto short_body = as_stream(bytes.substr(0, 20));
    CHECK_THROWS_AS(read_matrix(short_body), FormatError);

    auto trailing = as_stream(bytes + 'x');
    CHECK_THROWS_AS(read_matrix(trailing), FormatError);

    // 8-byte little-endian counts: N = 2^21 is over the sanity bound
    std::string huge(16, '\0');
    huge[2] = '\x20';
    huge[8] = '\x01';
    auto oversized = as_stream(huge);
    CHECK_THROWS_AS(read_matrix(oversized), FormatError);

    CHECK_THROWS_AS(load_matrix("/nonexistent/matrix.bin"), FormatError);
}

TEST_CASE("cmd_run decodes a configured collision") {
    TempDir tmp;
    CliOptions options;
    options.config_path = tmp.file("run.cfg", kRunConfig);

    std::ostringstream out, err;
    CHECK(cmd_run(options, out, err) == kExitOk);
    CHECK(err.str().empty());

    const std::string text = out.str();
    CHECK(text.find("collected 5 slots") != std::string::npos);
    CHECK(text.find("k_hat: 3") != std::string::npos);
    CHECK(text.find("misaligned") != std::string::npos);
    CHECK(text.find("detected 2/2, SER 0\n") != std::string::npos);
}

TEST_CASE("cmd_run verbose traces roots and packet heads") {
    TempDir tmp;
    CliOptions options;
    options.config_path = tmp.file("run.cfg", kRunConfig);
    options.verbose = true;

    std::ostringstream out, err;
    CHECK(cmd_run(options, out, err) == kExitOk);
    CHECK(out.str().find("shift 0 roots:") != std::string::npos);
    CHECK(out.str().find("packet head:") != std::string::npos);
    CHECK(out.str().find("singular values:") != std::string::npos);
}

TEST_CASE("cmd_run exits 2 on config problems") {
    TempDir tmp;
    std::ostringstream out, err;

    CliOptions missing;
    missing.config_path = (tmp.path / "absent.cfg").string();
    CHECK(cmd_run(missing, out, err) == kExitBadInput);
    CHECK(err.str().find("cannot open") != std::string::npos);

    CliOptions none;
    CHECK(cmd_run(none, out, err) == kExitBadInput);

    CliOptions broken;
    broken.config_path = tmp.file("broken.cfg",
                                  "[scenario]\nmode = aligned_t0\n[assignment]\ncount = 4\n");
    std::ostringstream err2;
    CHECK(cmd_run(broken, out, err2) == kExitBadInput);
    CHECK(err2.str().find("packet_len") != std::string::npos);
    CHECK(err2.str().find("broken.cfg") != std::string::npos);
}

TEST_CASE("cmd_run surfaces the duplicate-root ambiguity as a decode failure") {
    TempDir tmp;
    CliOptions options;
    options.config_path = tmp.file("ambiguous.cfg",
                                   "[scenario]\n"
                                   "mode = misaligned\n"
                                   "packet_len = 12\n"
                                   "factor2 = false\n"
                                   "extra_slots = 2\n"
                                   "[assignment]\n"
                                   "count = 8\n"
                                   "[transmitter.0]\n"
                                   "id = 1\n"
                                   "packet = 10, 20, 30, 40, 50, 60, 70, 80, 90, 100, 110, 120\n"
                                   "[transmitter.1]\n"
                                   "id = 5\n"
                                   "packet = 3, 1, 4, 1, 5, 9, 2, 6, 5, 3, 5, 8\n"
                                   "symbol_offset = 5\n");

    std::ostringstream out, err;
    CHECK(cmd_run(options, out, err) == kExitDecodeFailure);
    CHECK(err.str().find("decode failed") != std::string::npos);
    CHECK(err.str().find("hypothesis: candidate 5") != std::string::npos);
}

TEST_CASE("cmd_run dumps a matrix that cmd_replay decodes identically") {
    TempDir tmp;
    const std::string config = tmp.file("run.cfg", kRunConfig);
    const std::string dump = (tmp.path / "y.mat").string();

    CliOptions run_options;
    run_options.config_path = config;
    run_options.output_path = dump;
    std::ostringstream run_out, run_err;
    REQUIRE(cmd_run(run_options, run_out, run_err) == kExitOk);
    CHECK(run_out.str().find("matrix written to") != std::string::npos);
    REQUIRE(std::filesystem::exists(dump));

    CliOptions replay_options;
    replay_options.config_path = config;
    replay_options.matrix_path = dump;
    std::ostringstream replay_out, replay_err;
    CHECK(cmd_replay(replay_options, replay_out, replay_err) == kExitOk);
    CHECK(replay_out.str().find("detected 2/2, SER 0\n") != std::string::npos);

    // damaged file: cut the body short
    const std::string bytes = read_file(dump);
    tmp.file("y.mat", bytes.substr(0, 20));
    std::ostringstream trunc_out, trunc_err;
    CHECK(cmd_replay(replay_options, trunc_out, trunc_err) == kExitBadInput);
    CHECK(trunc_err.str().find("truncated") != std::string::npos);

    // geometry mismatch between file and config
    tmp.file("y.mat", bytes);
    replay_options.config_path = tmp.file("narrow.cfg",
                                          "[scenario]\n"
                                          "mode = aligned_t0\n"
                                          "packet_len = 10\n"
                                          "[assignment]\n"
                                          "count = 8\n");
    std::ostringstream mismatch_out, mismatch_err;
    CHECK(cmd_replay(replay_options, mismatch_out, mismatch_err) == kExitBadInput);
    CHECK(mismatch_err.str().find("12 columns but the config says 10") != std::string::npos);
}

TEST_CASE("cmd_sweep writes a CSV and plot script deterministically") {
    TempDir tmp;
    CliOptions options;
    options.config_path = tmp.file("sweep.cfg", kSweepConfig);
    options.output_path = (tmp.path / "result.csv").string();
    options.threads = 1;

    std::ostringstream out, err;
    REQUIRE(cmd_sweep(options, out, err) == kExitOk);
    CHECK(out.str().find("points=4") != std::string::npos);
    CHECK(out.str().find("csv: ") != std::string::npos);

    const std::string csv = read_file(options.output_path);
    CHECK(csv.rfind("snr_db,sigma2,extra_slots,mode,trials,", 0) == 0);
    CHECK(std::filesystem::exists(tmp.path / "result.gp"));

    // same seed, more threads: byte-identical output
    options.threads = 3;
    std::ostringstream out2, err2;
    REQUIRE(cmd_sweep(options, out2, err2) == kExitOk);
    CHECK(read_file(options.output_path) == csv);
    CHECK(out2.str() == out.str());

    // the CLI seed override changes the result
    options.seed = 5;
    std::ostringstream out3, err3;
    REQUIRE(cmd_sweep(options, out3, err3) == kExitOk);
    CHECK(read_file(options.output_path) != csv);
}

TEST_CASE("cmd_sweep exits 3 when the CSV cannot be written") {
    TempDir tmp;
    CliOptions options;
    options.config_path = tmp.file("sweep.cfg", kSweepConfig);
    options.output_path = (tmp.path / "no_such_dir" / "result.csv").string();

    std::ostringstream out, err;
    CHECK(cmd_sweep(options, out, err) == kExitUnwritableOutput);
    CHECK(err.str().find("cannot open") != std::string::npos);
}
