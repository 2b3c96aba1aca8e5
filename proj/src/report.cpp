#include "photorc/report.hpp"

#include "photorc/dataset.hpp"
#include "photorc/errors.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace photorc {

namespace {

constexpr const char* kResultsHeader =
    "cell,axis,series,x,repetition,fold,optics_seed,n_train,n_test,status,accuracy,lambda,error";

// Free text goes in the last column, so it only has to lose newlines.
std::string one_line(std::string s) {
    for (auto& c : s) {
        if (c == '\n' || c == '\r') c = ' ';
    }
    return s;
}

ResultRow fold_row(const FoldResult& f) {
    ResultRow r;
    r.repetition = f.repetition;
    r.fold = f.split;
    r.optics_seed = f.optics_seed;
    r.n_train = f.n_train;
    r.n_test = f.n_test;
    r.ok = f.ok;
    r.accuracy = f.accuracy;
    r.lambda = f.lambda;
    r.error = f.error;
    return r;
}

template <typename T>
T field_number(const std::string& s, std::size_t line, const char* name) {
    T v{};
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw FormatError("results line " + std::to_string(line) + ": bad " + name + " '" + s + "'");
    }
    return v;
}

nlohmann::json fold_json(const FoldResult& f) {
    nlohmann::json j;
    j["split"] = f.split;
    j["repetition"] = f.repetition;
    j["optics_seed"] = f.optics_seed;
    j["n_train"] = f.n_train;
    j["n_test"] = f.n_test;
    j["status"] = f.ok ? "ok" : "failed";
    if (f.ok) {
        j["accuracy"] = f.accuracy;
        j["lambda"] = f.lambda;
        j["correct"] = f.confusion.trace();
    } else {
        j["error"] = f.error;
    }
    return j;
}

nlohmann::json report_json(const RunReport& r) {
    nlohmann::json j;
    j["name"] = r.name;
    j["config_digest"] = r.config_digest;
    j["layer_neurons"] = r.layer_neurons;
    j["mean_accuracy"] = r.mean_accuracy;
    j["std_accuracy"] = r.std_accuracy;
    j["failed_folds"] = r.failed_folds();
    j["notes"] = r.notes;
    j["folds"] = nlohmann::json::array();
    for (const auto& f : r.folds) j["folds"].push_back(fold_json(f));
    return j;
}

std::filesystem::path write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write " + path.string());
    out << text;
    if (!out) throw FormatError("failed writing " + path.string());
    return path;
}

template <typename Fn>
std::string render(Fn&& fn) {
    std::ostringstream os;
    fn(os);
    return os.str();
}

}  // namespace

std::vector<ResultRow> result_rows(const RunReport& report) {
    std::vector<ResultRow> rows;
    for (const auto& f : report.folds) {
        auto r = fold_row(f);
        r.series = report.name;
        rows.push_back(std::move(r));
    }
    return rows;
}

std::vector<ResultRow> result_rows(const SweepResult& sweep) {
    std::vector<ResultRow> rows;
    const std::string axis = to_string(sweep.axis);
    for (const auto& c : sweep.cells) {
        auto stamp = [&](ResultRow r) {
            r.cell = c.cell.index;
            r.axis = axis;
            r.series = c.cell.series;
            r.x = c.cell.x;
            return r;
        };
        if (c.report.folds.empty()) {
            // The cell failed before any fold ran.
            ResultRow r;
            r.fold = "-";
            r.optics_seed = c.cell.config.seeds.optics;
            r.error = c.error;
            rows.push_back(stamp(std::move(r)));
            continue;
        }
        for (const auto& f : c.report.folds) rows.push_back(stamp(fold_row(f)));
    }
    return rows;
}

void write_results_csv(std::ostream& os, const std::vector<ResultRow>& rows) {
    os << kResultsHeader << '\n';
    for (const auto& r : rows) {
        os << r.cell << ',' << r.axis << ',' << r.series << ',' << r.x << ',' << r.repetition << ',' << r.fold << ','
           << r.optics_seed << ',' << r.n_train << ',' << r.n_test << ',' << (r.ok ? "ok" : "failed") << ','
           << format_double(r.accuracy) << ',' << format_double(r.lambda) << ',' << one_line(r.error) << '\n';
    }
}

std::vector<ResultRow> read_results_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != kResultsHeader) {
        throw FormatError("results table must start with the header '" + std::string(kResultsHeader) + "'");
    }
    std::vector<ResultRow> rows;
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::size_t pos = 0;
        for (int k = 0; k < 12; ++k) {
            const auto comma = line.find(',', pos);
            if (comma == std::string::npos) {
                throw FormatError("results line " + std::to_string(line_no) + ": expected 13 columns");
            }
            f.push_back(line.substr(pos, comma - pos));
            pos = comma + 1;
        }
        f.push_back(line.substr(pos));
        ResultRow r;
        r.cell = field_number<int>(f[0], line_no, "cell");
        r.axis = f[1];
        r.series = f[2];
        r.x = field_number<int>(f[3], line_no, "x");
        r.repetition = field_number<int>(f[4], line_no, "repetition");
        r.fold = f[5];
        r.optics_seed = field_number<std::uint64_t>(f[6], line_no, "optics_seed");
        r.n_train = field_number<std::size_t>(f[7], line_no, "n_train");
        r.n_test = field_number<std::size_t>(f[8], line_no, "n_test");
        if (f[9] != "ok" && f[9] != "failed") throw FormatError("results line " + std::to_string(line_no) + ": bad status");
        r.ok = f[9] == "ok";
        r.accuracy = field_number<double>(f[10], line_no, "accuracy");
        r.lambda = field_number<double>(f[11], line_no, "lambda");
        r.error = f[12];
        rows.push_back(std::move(r));
    }
    return rows;
}

std::vector<CellSummary> summarize_cells(const std::vector<ResultRow>& rows) {
    std::vector<CellSummary> cells;
    std::vector<std::vector<double>> acc;
    std::map<std::pair<std::string, int>, std::size_t> where;
    for (const auto& r : rows) {
        const auto key = std::make_pair(r.axis, r.cell);
        auto it = where.find(key);
        if (it == where.end()) {
            it = where.emplace(key, cells.size()).first;
            cells.push_back({r.cell, r.axis, r.series, r.x, 0.0, 0.0, 0, 0});
            acc.emplace_back();
        }
        auto& c = cells[it->second];
        if (r.ok) {
            ++c.ok;
            acc[it->second].push_back(r.accuracy);
        } else {
            ++c.failed;
        }
    }
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const auto& a = acc[i];
        if (a.empty()) continue;
        double sum = 0.0;
        for (double v : a) sum += v;
        cells[i].mean = sum / static_cast<double>(a.size());
        if (a.size() > 1) {
            double ss = 0.0;
            for (double v : a) ss += (v - cells[i].mean) * (v - cells[i].mean);
            cells[i].std = std::sqrt(ss / static_cast<double>(a.size() - 1));
        }
    }
    return cells;
}

void write_plot_csv(std::ostream& os, const std::vector<CellSummary>& cells) {
    os << "series,x,y,y_std\n";
    for (const auto& c : cells) {
        if (c.ok == 0) continue;
        os << c.series << ',' << c.x << ',' << format_double(c.mean) << ',' << format_double(c.std) << '\n';
    }
}

void write_cells_csv(std::ostream& os, const std::vector<CellSummary>& cells) {
    os << "cell,axis,series,x,mean_accuracy,std_accuracy,ok_folds,failed_folds\n";
    for (const auto& c : cells) {
        os << c.cell << ',' << c.axis << ',' << c.series << ',' << c.x << ',' << format_double(c.mean) << ','
           << format_double(c.std) << ',' << c.ok << ',' << c.failed << '\n';
    }
}

void write_confusion_csv(std::ostream& os, const ConfusionMatrix& confusion, const std::vector<int>& labels) {
    const auto n = confusion.counts.rows();
    if (confusion.counts.cols() != n || static_cast<std::size_t>(n) != labels.size()) {
        throw ShapeError("confusion matrix and label list disagree in size");
    }
    os << "true\\predicted";
    for (int l : labels) os << ',' << l;
    os << '\n';
    for (Eigen::Index i = 0; i < n; ++i) {
        os << labels[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < n; ++j) os << ',' << confusion.counts(i, j);
        os << '\n';
    }
}

std::string summary_json(const RunReport& report) {
    auto j = report_json(report);
    j["kind"] = "run";
    j["confusion_total"] = report.confusion.total();
    j["confusion_trace"] = report.confusion.trace();
    return j.dump(2) + "\n";
}

std::string summary_json(const SweepResult& sweep) {
    nlohmann::json j;
    j["kind"] = "sweep";
    j["axis"] = to_string(sweep.axis);
    j["base_config_digest"] = sweep.base_digest;
    j["cells"] = nlohmann::json::array();
    for (const auto& c : sweep.cells) {
        nlohmann::json cell;
        cell["index"] = c.cell.index;
        cell["series"] = c.cell.series;
        cell["x"] = c.cell.x;
        cell["status"] = c.ok ? "ok" : "failed";
        if (!c.error.empty()) cell["error"] = c.error;
        if (!c.report.folds.empty()) cell["report"] = report_json(c.report);
        j["cells"].push_back(std::move(cell));
    }
    return j.dump(2) + "\n";
}

std::vector<std::filesystem::path> write_run_outputs(const std::filesystem::path& dir, const RunReport& report) {
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> files;
    files.push_back(write_text(dir / "results.csv", render([&](std::ostream& os) { write_results_csv(os, result_rows(report)); })));
    files.push_back(write_text(dir / "summary.json", summary_json(report)));
    files.push_back(write_text(dir / "confusion.csv", render([&](std::ostream& os) {
                                   write_confusion_csv(os, report.confusion, report.class_labels);
                               })));
    files.push_back(write_text(dir / "config.ini", report.config_text));
    files.push_back(write_text(dir / "timing.txt", "wall_seconds = " + format_double(report.wall_seconds) + "\n"));
    return files;
}

std::vector<std::filesystem::path> write_sweep_outputs(const std::filesystem::path& dir, const SweepResult& sweep) {
    std::filesystem::create_directories(dir);
    const auto rows = result_rows(sweep);
    const auto cells = summarize_cells(rows);
    std::vector<std::filesystem::path> files;
    files.push_back(write_text(dir / "results.csv", render([&](std::ostream& os) { write_results_csv(os, rows); })));
    files.push_back(write_text(dir / "summary.json", summary_json(sweep)));
    files.push_back(write_text(dir / "cells.csv", render([&](std::ostream& os) { write_cells_csv(os, cells); })));
    files.push_back(write_text(dir / ("plot_" + to_string(sweep.axis) + ".csv"),
                               render([&](std::ostream& os) { write_plot_csv(os, cells); })));
    if (!sweep.cells.empty()) files.push_back(write_text(dir / "config.ini", sweep.cells.front().report.config_text));
    files.push_back(write_text(dir / "timing.txt", "wall_seconds = " + format_double(sweep.wall_seconds) + "\n"));
    return files;
}

std::vector<std::filesystem::path> rerender(const std::filesystem::path& results_csv, const std::filesystem::path& dir) {
    std::ifstream in(results_csv);
    if (!in) throw FormatError("cannot open " + results_csv.string());
    const auto cells = summarize_cells(read_results_csv(in));
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> files;
    files.push_back(write_text(dir / "cells.csv", render([&](std::ostream& os) { write_cells_csv(os, cells); })));
    std::map<std::string, std::vector<CellSummary>> by_axis;
    for (const auto& c : cells) {
        if (c.axis != "none") by_axis[c.axis].push_back(c);
    }
    for (const auto& [axis, group] : by_axis) {
        files.push_back(write_text(dir / ("plot_" + axis + ".csv"), render([&](std::ostream& os) { write_plot_csv(os, group); })));
    }
    return files;
}

}  // namespace photorc
