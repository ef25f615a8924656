#include "steermux/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include "steermux/airsim.hpp"
#include "steermux/config.hpp"
#include "steermux/decoder.hpp"
#include "steermux/harness.hpp"
#include "steermux/replay.hpp"

namespace steermux {

namespace {

std::string fmt6(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%.6g", value);
    return buffer;
}

std::string fmt_complex(Complex value) {
    if (value.imag() == 0.0) return fmt6(value.real());
    return fmt6(value.real()) + (value.imag() < 0.0 ? "" : "+") + fmt6(value.imag()) + "i";
}

std::optional<std::string> slurp(const std::string& path) {
    std::ifstream is(path);
    if (!is) return std::nullopt;
    std::ostringstream buffer;
    buffer << is.rdbuf();
    return buffer.str();
}

// Both loaders funnel errors into the bad-input exit path.
template <typename Loader>
auto load_config(const CliOptions& options, std::ostream& err, Loader&& loader)
    -> std::optional<decltype(loader(std::declval<ParsedConfig>()))> {
    if (options.config_path.empty()) {
        err << "error: no config file given\n";
        return std::nullopt;
    }
    const auto text = slurp(options.config_path);
    if (!text) {
        err << "error: cannot open config " << options.config_path << '\n';
        return std::nullopt;
    }
    try {
        return loader(parse_config(*text));
    } catch (const ConfigError& e) {
        err << options.config_path << ": " << e.what() << '\n';
    } catch (const std::invalid_argument& e) {
        err << options.config_path << ": " << e.what() << '\n';
    }
    return std::nullopt;
}

void print_singular_values(std::ostream& out, const RVector& values) {
    out << "singular values:";
    for (Eigen::Index i = 0; i < values.size(); ++i) out << ' ' << fmt6(values(i));
    out << '\n';
}

void print_matches(std::ostream& out, const std::vector<TransmitterMatch>& matches,
                   bool verbose) {
    out << "matches:\n"
        << "  id  shift  type        offset  gain\n";
    for (const auto& m : matches) {
        out << std::setw(4) << m.id << "  " << std::setw(5) << m.arrival_shift << "  "
            << std::left << std::setw(10) << (m.misaligned ? "misaligned" : "aligned")
            << std::right << "  " << std::setw(6) << m.symbol_offset << "  "
            << fmt_complex(m.gain_estimate) << '\n';
        if (verbose && !m.packet.empty()) {
            out << "      packet head:";
            for (std::size_t j = 0; j < std::min<std::size_t>(8, m.packet.size()); ++j)
                out << ' ' << fmt_complex(m.packet[j]);
            out << '\n';
        }
    }
}

// Re-derive the per-shift root sets for tracing; mirrors what full_decode
// probed but keeps the decoder free of output concerns.
void print_root_trace(std::ostream& out, const ReceivedMatrix& y, std::size_t k_hat,
                      const DecodeParams& params) {
    const std::size_t n = y.rows();
    if (k_hat == 0 || k_hat >= n) return;
    const bool factor2 = params.factor2.value_or(mode_uses_factor2(params.mode));
    const SubspaceSplit split = svd_split(y.view(), k_hat);
    const std::size_t max_shift = params.mode == ScenarioMode::AlignedT0 ? 0 : n - 2;

    auto trace_one = [&](std::size_t d, std::span<const Complex> h, const char* label) {
        out << "shift " << d << label << " roots:";
        try {
            const auto roots = solve_polynomial(music_polynomial(split.noise_basis, d, factor2, h));
            for (Complex z : roots)
                if (std::abs(std::abs(z) - 1.0) < 0.05)
                    out << "  |z|=" << fmt6(std::abs(z)) << " arg=" << fmt6(std::arg(z));
        } catch (const DegeneratePolynomialError& e) {
            out << "  (" << e.what() << ')';
        }
        out << '\n';
    };

    if (params.mode == ScenarioMode::Fading) {
        for (const auto& [id, h] : params.fading) {
            const std::string label = " family " + std::to_string(id);
            for (std::size_t d = 0; d <= max_shift; ++d) trace_one(d, h, label.c_str());
        }
    } else {
        for (std::size_t d = 0; d <= max_shift; ++d) trace_one(d, {}, "");
    }
}

int report_decode(std::ostream& out, std::ostream& err, const DecodeResult& result,
                  const Scenario* truth, bool verbose) {
    print_singular_values(out, result.diagnostics.singular_values);
    out << "k_hat: " << result.diagnostics.k_hat
        << ", gap: " << fmt6(result.diagnostics.singular_gap) << '\n';

    if (!result.ok()) {
        err << "decode failed: " << result.message << '\n';
        for (const auto& h : result.hypotheses) err << "  hypothesis: " << h << '\n';
        if (!result.matches.empty()) print_matches(err, result.matches, false);
        return kExitDecodeFailure;
    }

    print_matches(out, result.matches, verbose);
    out << "residual: " << fmt6(result.diagnostics.residual_norm) << '\n';

    if (truth && !truth->transmitters.empty()) {
        std::size_t correct = 0;
        for (const auto& tx : truth->transmitters)
            for (const auto& m : result.matches)
                if (m.id == tx.id) {
                    ++correct;
                    break;
                }
        out << "detected " << correct << '/' << truth->transmitters.size() << ", SER "
            << fmt6(packet_symbol_error_rate(*truth, result.matches)) << '\n';
    }
    return kExitOk;
}

}  // namespace

int cmd_run(const CliOptions& options, std::ostream& out, std::ostream& err) {
    auto loaded = load_config(options, err, [](const ParsedConfig& pc) {
        RunConfig rc = load_run_config(pc);
        return rc;
    });
    if (!loaded) return kExitBadInput;
    RunConfig& run = *loaded;
    if (options.seed) run.scenario.seed = *options.seed;

    try {
        run.scenario.validate();
    } catch (const std::invalid_argument& e) {
        err << options.config_path << ": " << e.what() << '\n';
        return kExitBadInput;
    }

    auto stop = [&](const ReceivedMatrix& y) {
        const StopDecision decision = rank_stop_rule(y, run.scenario.sigma2, run.extra_slots);
        out << "slot " << std::setw(3) << y.rows() << ": k_hat " << decision.k_hat;
        if (options.verbose) {
            out << ", ";
            print_singular_values(out, singular_values_of(y.view()));
        } else {
            out << '\n';
        }
        return decision.stop;
    };

    std::optional<ReceivedMatrix> collected;
    try {
        collected = run_until(run.scenario, stop, run.max_slots);
    } catch (const NoConvergenceError& e) {
        err << "decode failed: " << e.what() << '\n';
        return kExitDecodeFailure;
    }
    out << "collected " << collected->rows() << " slots\n";

    if (!options.output_path.empty()) {
        try {
            save_matrix(*collected, options.output_path);
            out << "matrix written to " << options.output_path << '\n';
        } catch (const FormatError& e) {
            err << "error: " << e.what() << '\n';
            return kExitUnwritableOutput;
        }
    }

    const DecodeParams params =
        side_info_params(run.scenario, run.mode, run.scenario.sigma2, run.extra_slots,
                         run.preamble_len, collected->rows());

    DecodeResult result;
    try {
        result = full_decode(*collected, run.scenario.assignment, params);
    } catch (const std::runtime_error& e) {
        err << "decode failed: " << e.what() << '\n';
        return kExitDecodeFailure;
    }

    if (options.verbose) print_root_trace(out, *collected, result.diagnostics.k_hat, params);
    return report_decode(out, err, result, &run.scenario, options.verbose);
}

int cmd_sweep(const CliOptions& options, std::ostream& out, std::ostream& err) {
    auto loaded = load_config(options, err, [](const ParsedConfig& pc) {
        SweepConfig sc = load_sweep_config(pc);
        sc.validate();
        return sc;
    });
    if (!loaded) return kExitBadInput;
    SweepConfig& sweep = *loaded;
    if (options.seed) sweep.seed = *options.seed;
    if (options.threads) sweep.threads = *options.threads;

    const SweepResult result = run_sweep(sweep);

    const std::string csv_path = options.output_path.empty() ? "sweep.csv" : options.output_path;
    {
        std::ofstream csv(csv_path);
        if (!csv) {
            err << "error: cannot open " << csv_path << " for writing\n";
            return kExitUnwritableOutput;
        }
        write_csv(result, csv);
        if (!csv.good()) {
            err << "error: short write to " << csv_path << '\n';
            return kExitUnwritableOutput;
        }
    }

    const std::size_t dot = csv_path.find_last_of('.');
    const std::size_t slash = csv_path.find_last_of('/');
    const bool has_ext = dot != std::string::npos && (slash == std::string::npos || dot > slash);
    const std::string plot_path = (has_ext ? csv_path.substr(0, dot) : csv_path) + ".gp";
    {
        std::ofstream plot(plot_path);
        if (!plot) {
            err << "error: cannot open " << plot_path << " for writing\n";
            return kExitUnwritableOutput;
        }
        write_plot_script(result, csv_path, plot);
    }

    write_summary(result, out);
    out << "csv: " << csv_path << "\nplot: " << plot_path << '\n';
    return kExitOk;
}

int cmd_replay(const CliOptions& options, std::ostream& out, std::ostream& err) {
    std::optional<ReceivedMatrix> matrix;
    try {
        matrix = load_matrix(options.matrix_path);
    } catch (const FormatError& e) {
        err << options.matrix_path << ": " << e.what() << '\n';
        return kExitBadInput;
    }

    auto loaded = load_config(options, err, [](const ParsedConfig& pc) {
        RunConfig rc = load_run_config(pc);
        return rc;
    });
    if (!loaded) return kExitBadInput;
    RunConfig& run = *loaded;
    if (options.seed) run.scenario.seed = *options.seed;

    if (matrix->cols() != run.scenario.packet_len) {
        err << "error: matrix has " << matrix->cols() << " columns but the config says "
            << run.scenario.packet_len << '\n';
        return kExitBadInput;
    }

    const DecodeParams params =
        side_info_params(run.scenario, run.mode, run.scenario.sigma2, run.extra_slots,
                         run.preamble_len, matrix->rows());

    DecodeResult result;
    try {
        result = full_decode(*matrix, run.scenario.assignment, params);
    } catch (const std::runtime_error& e) {
        err << "decode failed: " << e.what() << '\n';
        return kExitDecodeFailure;
    }

    if (options.verbose) print_root_trace(out, *matrix, result.diagnostics.k_hat, params);
    return report_decode(out, err, result, &run.scenario, options.verbose);
}

}  // namespace steermux
