#include <doctest.h>

#include "photorc/config.hpp"
#include "photorc/errors.hpp"
#include "photorc/experiment.hpp"
#include "photorc/report.hpp"
#include "photorc/sweep.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

using namespace photorc;
namespace fs = std::filesystem;

namespace {

// Small, fast synthetic configuration.
ExperimentConfig tiny_config() {
    ExperimentConfig c;
    c.name = "tiny";
    c.dataset.kind = DatasetKind::synthetic;
    c.dataset.synthetic.classes = 3;
    c.dataset.synthetic.per_class = 20;
    c.dataset.synthetic.length = 5;
    c.dataset.synthetic.dim = 4;
    c.dataset.synthetic.delay = 1;
    c.dataset.synthetic.noise = 0.1;
    c.reservoir.deep.depth = 2;
    c.reservoir.deep.total_neurons = 100;
    c.reservoir.deep.bias_width = 40;
    c.reservoir.calibration_samples = 32;
    c.readout.lambda_points = 5;
    c.protocol.repetitions = 2;
    return c;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("config round trip") {
    auto c = tiny_config();
    c.dataset.path = "mnist";
    c.protocol.cv = CvProtocol::ti46_grouped;
    c.sweep.depths = {1, 7};
    c.seeds.optics = 0xFFFFFFFFFFFFFFFFull;
    c.reservoir.deep.alpha_first = 0.1 + 0.2;  // needs the full 17 digits
    const auto text = render_config(c);
    const auto back = parse_config(text);
    CHECK(render_config(back) == text);
    CHECK(back.reservoir.deep.alpha_first == c.reservoir.deep.alpha_first);
    CHECK(back.seeds.optics == c.seeds.optics);
    CHECK(back.sweep.depths == c.sweep.depths);
    CHECK(config_digest(back) == config_digest(c));
    CHECK(config_digest(c).size() == 16);
    auto d = c;
    d.readout.folds = 4;
    CHECK(config_digest(d) != config_digest(c));
}

TEST_CASE("config parsing errors carry the line") {
    auto fails_with = [](const std::string& text, const std::string& needle) {
        try {
            parse_config(text);
        } catch (const ConfigError& e) {
            INFO(e.what());
            return std::string(e.what()).find(needle) != std::string::npos;
        }
        return false;
    };
    CHECK(fails_with("[reservoir]\ndepth = 3\nunknown = 1\n", "line 3"));
    CHECK(fails_with("[reservoir]\ndepth = 3\ndepth = 4\n", "line 3"));
    CHECK(fails_with("[reservoir]\ndepth = three\n", "line 2"));
    CHECK(fails_with("[reservoir]\nalpha_first = 0.5x\n", "line 2"));
    CHECK(fails_with("[readout]\nstandardize = maybe\n", "line 2"));
    CHECK(fails_with("[nowhere]\nx = 1\n", "line 1"));
    CHECK(fails_with("depth = 3\n", "line 1"));
    CHECK(fails_with("[reservoir]\nallocation = sideways\n", "line 2"));

    const auto c = parse_config("# comment\n\n[reservoir]\ndepth = 4   # inline\n");
    CHECK(c.reservoir.deep.depth == 4);
    CHECK(c.reservoir.deep.total_neurons == 500);
}

TEST_CASE("shipped configs parse") {
    for (const auto& e : fs::directory_iterator(fs::path(PHOTORC_SOURCE_DIR) / "configs")) {
        if (e.path().extension() != ".ini") continue;
        INFO(e.path());
        CHECK_NOTHROW(load_config(e.path()));
    }
}

TEST_CASE("runs are deterministic and self-consistent") {
    const auto c = tiny_config();
    const auto a = run_experiment(c);
    const auto b = run_experiment(c);
    REQUIRE(a.folds.size() == 2);
    CHECK(a.failed_folds() == 0);
    double sum = 0.0;
    for (std::size_t i = 0; i < a.folds.size(); ++i) {
        const auto& f = a.folds[i];
        CHECK(f.ok);
        CHECK(f.accuracy == b.folds[i].accuracy);
        CHECK(f.lambda == b.folds[i].lambda);
        CHECK(f.confusion.counts == b.folds[i].confusion.counts);
        CHECK(f.accuracy == static_cast<double>(f.confusion.trace()) / static_cast<double>(f.confusion.total()));
        CHECK(f.optics_seed == c.seeds.optics + static_cast<std::uint64_t>(f.repetition));
        sum += f.accuracy;
    }
    CHECK(a.mean_accuracy == sum / 2.0);
    const double d0 = a.folds[0].accuracy - a.mean_accuracy;
    const double d1 = a.folds[1].accuracy - a.mean_accuracy;
    CHECK(a.std_accuracy == doctest::Approx(std::sqrt(d0 * d0 + d1 * d1)));
    CHECK(a.confusion.total() == static_cast<long>(a.folds[0].n_test + a.folds[1].n_test));
    CHECK(summary_json(a) == summary_json(b));
    CHECK(a.layer_neurons == std::vector<int>{75, 25});
}

TEST_CASE("scoring the training set is not worse than a proper split") {
    auto c = tiny_config();
    c.protocol.repetitions = 1;
    const auto pool = load_pool(c);
    const auto splits = make_splits(c, pool);
    REQUIRE(splits.size() == 1);
    Split self = splits[0];
    self.test = self.train;
    const auto proper = run_fold(c, pool, splits[0], 0).result.accuracy;
    const auto own = run_fold(c, pool, self, 0).result.accuracy;
    CHECK(own >= proper);
}

TEST_CASE("fold failures are recorded, not fatal") {
    auto c = tiny_config();
    c.readout.folds = 1000;
    const auto r = run_experiment(c);
    CHECK(r.failed_folds() == 2);
    for (const auto& f : r.folds) {
        CHECK_FALSE(f.ok);
        CHECK(f.error.rfind("protocol: ", 0) == 0);
    }
    const auto j = nlohmann::json::parse(summary_json(r));
    CHECK(j["failed_folds"] == 2);
    CHECK(j["folds"][0]["status"] == "failed");
}

TEST_CASE("holdout leakage audit") {
    const auto c = tiny_config();
    const auto pool = load_pool(c);
    const auto splits = make_splits(c, pool);
    const auto audit = audit_leakage(c, pool, splits[0]);
    INFO(audit.difference);
    CHECK(audit.unchanged);
    const auto poisoned = poison_rows(pool, splits[0].test);
    CHECK(poisoned.labels != pool.labels);
    CHECK(poisoned.sequences[splits[0].test[0]].frames != pool.sequences[splits[0].test[0]].frames);
}

TEST_CASE("sweep grids") {
    auto base = tiny_config();
    CHECK(sweep_grid(base, SweepAxis::allocation_strategy).size() == 12);
    CHECK(sweep_grid(base, SweepAxis::leakage_config).size() == 16);
    CHECK(sweep_grid(base, SweepAxis::bias_profile).size() == 8);
    const auto dvs = sweep_grid(base, SweepAxis::depth_vs_shallow);
    CHECK(dvs.size() == 12);
    std::set<std::string> series;
    for (const auto& cell : dvs) {
        series.insert(cell.series);
        CHECK(cell.config.reservoir.deep.total_neurons == cell.x);
        if (cell.series == "shallow") CHECK(cell.config.reservoir.deep.depth == 1);
    }
    CHECK(series == std::set<std::string>{"shallow", "deep-3", "deep-5"});

    for (const auto& cell : sweep_grid(base, SweepAxis::allocation_strategy)) {
        CHECK(cell.config.reservoir.deep.depth == cell.x);
        CHECK(cell.config.reservoir.deep.total_neurons == 100 * cell.x);
    }
    base.sweep.budget_rule = BudgetRule::fixed;
    for (const auto& cell : sweep_grid(base, SweepAxis::leakage_config)) {
        CHECK(cell.config.reservoir.deep.total_neurons == base.reservoir.deep.total_neurons);
    }
    for (const auto& name : {"allocation-strategy", "leakage-config", "bias-profile", "depth-vs-shallow"}) {
        CHECK(to_string(parse_sweep_axis(name)) == name);
    }
    CHECK_THROWS(parse_sweep_axis("sideways"));
}

TEST_CASE("sweeps survive failing cells and report deterministically") {
    auto base = tiny_config();
    base.protocol.repetitions = 1;
    base.sweep.depths = {2, 5};
    base.sweep.budget_rule = BudgetRule::fixed;  // 100 neurons cannot fill 5 layers
    const auto a = run_sweep(base, SweepAxis::bias_profile);
    const auto b = run_sweep(base, SweepAxis::bias_profile);
    REQUIRE(a.cells.size() == 4);
    int failed = 0;
    for (const auto& cell : a.cells) {
        if (cell.cell.x == 5) {
            CHECK_FALSE(cell.ok);
            CHECK(cell.error.rfind("allocation: ", 0) == 0);
            ++failed;
        } else {
            CHECK(cell.ok);
        }
    }
    CHECK(failed == 2);
    CHECK(summary_json(a) == summary_json(b));

    std::ostringstream ra, rb;
    write_results_csv(ra, result_rows(a));
    write_results_csv(rb, result_rows(b));
    CHECK(ra.str() == rb.str());
}

TEST_CASE("results table round trip and re-rendering") {
    std::vector<ResultRow> rows;
    for (int cell = 0; cell < 2; ++cell) {
        for (int rep = 0; rep < 3; ++rep) {
            ResultRow r;
            r.cell = cell;
            r.axis = "leakage-config";
            r.series = cell ? "fixed-0.65" : "decreasing";
            r.x = 3;
            r.repetition = rep;
            r.fold = "holdout";
            r.optics_seed = 1 + static_cast<std::uint64_t>(rep);
            r.n_train = 150;
            r.n_test = 50;
            r.ok = !(cell == 1 && rep == 2);
            r.accuracy = r.ok ? 0.1 * (rep + 1) + 0.01 * cell : 0.0;
            r.lambda = 1e-3;
            if (!r.ok) r.error = "ill-conditioned: lambda, 0\nsecond line";
            rows.push_back(r);
        }
    }
    std::stringstream ss;
    write_results_csv(ss, rows);
    CHECK(ss.str().rfind("cell,axis,series,x,repetition,fold,optics_seed,n_train,n_test,status,accuracy,lambda,error\n", 0) == 0);
    const auto back = read_results_csv(ss);
    REQUIRE(back.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(back[i].series == rows[i].series);
        CHECK(back[i].accuracy == rows[i].accuracy);
        CHECK(back[i].ok == rows[i].ok);
    }
    CHECK(back.back().error.find('\n') == std::string::npos);

    const auto cells = summarize_cells(back);
    REQUIRE(cells.size() == 2);
    CHECK(cells[0].ok == 3);
    CHECK(cells[0].mean == doctest::Approx(0.2));
    CHECK(cells[0].std == doctest::Approx(0.1));
    CHECK(cells[1].ok == 2);
    CHECK(cells[1].failed == 1);

    const auto dir = fs::temp_directory_path() / "photorc-test-report";
    fs::remove_all(dir);
    fs::create_directories(dir);
    {
        std::ofstream out(dir / "results.csv");
        write_results_csv(out, rows);
    }
    rerender(dir / "results.csv", dir / "out");
    CHECK(fs::exists(dir / "out" / "cells.csv"));
    const auto plot = read_file(dir / "out" / "plot_leakage-config.csv");
    CHECK(plot.rfind("series,x,y,y_std\n", 0) == 0);
    CHECK(std::count(plot.begin(), plot.end(), '\n') == 3);
    fs::remove_all(dir);
}

TEST_CASE("confusion CSV is labeled") {
    ConfusionMatrix m;
    m.counts = Eigen::MatrixXi{{3, 1}, {0, 4}};
    std::ostringstream os;
    write_confusion_csv(os, m, {5, 9});
    CHECK(os.str() == "true\\predicted,5,9\n5,3,1\n9,0,4\n");
}

TEST_CASE("run outputs keep the wall clock out of deterministic files") {
    auto c = tiny_config();
    c.protocol.repetitions = 1;
    auto r = run_experiment(c);
    const auto dir = fs::temp_directory_path() / "photorc-test-outputs";
    fs::remove_all(dir);
    r.wall_seconds = 1.0;
    write_run_outputs(dir / "a", r);
    r.wall_seconds = 2.0;
    write_run_outputs(dir / "b", r);
    for (const auto* name : {"results.csv", "summary.json", "confusion.csv", "config.ini"}) {
        INFO(name);
        CHECK(read_file(dir / "a" / name) == read_file(dir / "b" / name));
    }
    CHECK(read_file(dir / "a" / "timing.txt") != read_file(dir / "b" / "timing.txt"));
    const auto j = nlohmann::json::parse(read_file(dir / "a" / "summary.json"));
    CHECK(j["kind"] == "run");
    CHECK(j["confusion_trace"].get<double>() / j["confusion_total"].get<double>() == j["mean_accuracy"].get<double>());
    CHECK(parse_config(read_file(dir / "a" / "config.ini")).name == "tiny");
    fs::remove_all(dir);
}
