// photorc command-line front end.

#include "photorc/config.hpp"
#include "photorc/dataset.hpp"
#include "photorc/encoding.hpp"
#include "photorc/errors.hpp"
#include "photorc/experiment.hpp"
#include "photorc/report.hpp"
#include "photorc/sweep.hpp"
#include "photorc/synthetic.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace photorc;

std::vector<double> read_numbers(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open " + path);
    std::stringstream text;
    text << in.rdbuf();
    std::string s = text.str();
    for (auto& c : s) {
        if (c == ',') c = ' ';
    }
    std::istringstream ss(s);
    std::vector<double> out;
    std::string tok;
    while (ss >> tok) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(tok, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != tok.size()) throw FormatError(path + ": '" + tok + "' is not a number");
        out.push_back(v);
    }
    return out;
}

void print_files(const std::vector<std::filesystem::path>& files) {
    for (const auto& f : files) std::cout << "wrote " << f.string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Deep binarized photonic reservoir computing simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;

    auto* run = app.add_subcommand("run", "Run one experiment");
    run->add_option("config", config_path, "Experiment config file")->required();
    run->add_option("--out", out_dir, "Output directory (default: output.dir from the config)");

    std::string axis;
    auto* sweep = app.add_subcommand("sweep", "Run an ablation sweep");
    sweep->add_option("config", config_path, "Base experiment config file")->required();
    sweep->add_option("--axis", axis, "allocation-strategy | leakage-config | bias-profile | depth-vs-shallow")
        ->required();
    sweep->add_option("--out", out_dir, "Output directory (default: output.dir from the config)");

    std::string vector_path;
    int n_bin = 10;
    auto* encode = app.add_subcommand("encode", "Basket-encode a file of numbers in [0, 1]");
    encode->add_option("file", vector_path, "Whitespace- or comma-separated values")->required();
    encode->add_option("--n-bin", n_bin, "Bits per value")->capture_default_str();

    auto* dataset = app.add_subcommand("dataset", "Dataset utilities");
    dataset->require_subcommand(1);
    std::string synth_kind;
    SyntheticParams params;
    std::uint64_t seed = 4;
    auto* synth = dataset->add_subcommand("synth", "Write a synthetic sequence dataset");
    synth->add_option("kind", synth_kind, "delayed-recall | noisy-channel-classification")->required();
    synth->add_option("--out", out_dir, "Output directory")->required();
    synth->add_option("--seed", seed, "Generation seed")->capture_default_str();
    synth->add_option("--classes", params.classes)->capture_default_str();
    synth->add_option("--per-class", params.per_class)->capture_default_str();
    synth->add_option("--length", params.length)->capture_default_str();
    synth->add_option("--dim", params.dim)->capture_default_str();
    synth->add_option("--delay", params.delay)->capture_default_str();
    synth->add_option("--noise", params.noise)->capture_default_str();
    synth->add_option("--distractor", params.distractor, "Distractor amplitude in [0, 1]")->capture_default_str();

    std::string results_path;
    auto* report = app.add_subcommand("report", "Re-render cell tables and plot data from results.csv");
    report->add_option("results", results_path, "Long-format results table")->required();
    report->add_option("--out", out_dir, "Output directory (default: next to the results)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            const auto config = load_config(config_path);
            const auto r = run_experiment(config);
            print_files(write_run_outputs(out_dir.empty() ? config.output.dir : out_dir, r));
            std::cout << "mean accuracy " << format_double(r.mean_accuracy) << " over " << r.folds.size() << " fold(s)";
            if (r.failed_folds()) std::cout << ", " << r.failed_folds() << " failed";
            std::cout << '\n';
            return r.failed_folds() == static_cast<int>(r.folds.size()) ? 1 : 0;
        }
        if (*sweep) {
            const auto config = load_config(config_path);
            const auto result = run_sweep(config, parse_sweep_axis(axis));
            print_files(write_sweep_outputs(out_dir.empty() ? config.output.dir : out_dir, result));
            return 0;
        }
        if (*encode) {
            const auto codec = make_codec(n_bin);
            const auto values = read_numbers(vector_path);
            const auto bits = encode_vector(values, codec);
            for (std::size_t i = 0; i < values.size(); ++i) {
                std::cout << i << ',' << format_double(values[i]) << ',';
                for (int b = 0; b < n_bin; ++b) std::cout << static_cast<int>(bits.bits[i * static_cast<std::size_t>(n_bin) + b]);
                std::cout << '\n';
            }
            return 0;
        }
        if (*synth) {
            const auto samples = synthetic_task(parse_synthetic_kind(synth_kind), params, seed);
            write_sequence_dataset(out_dir, samples);
            std::cout << "wrote " << samples.size() << " samples to " << out_dir << '\n';
            return 0;
        }
        if (*report) {
            const std::filesystem::path results(results_path);
            print_files(rerender(results, out_dir.empty() ? results.parent_path() : std::filesystem::path(out_dir)));
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "photorc: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
