#pragma once

#include "photorc/experiment.hpp"
#include "photorc/sweep.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace photorc {

/// One row of the long-format results table: one fold of one cell.
struct ResultRow {
    int cell = 0;
    std::string axis = "none";
    std::string series;
    int x = 0;
    int repetition = 0;
    std::string fold;
    std::uint64_t optics_seed = 0;
    std::size_t n_train = 0;
    std::size_t n_test = 0;
    bool ok = false;
    double accuracy = 0.0;
    double lambda = 0.0;
    std::string error;
};

std::vector<ResultRow> result_rows(const RunReport& report);
std::vector<ResultRow> result_rows(const SweepResult& sweep);

/// Header: cell,axis,series,x,repetition,fold,optics_seed,n_train,n_test,status,accuracy,lambda,error
void write_results_csv(std::ostream& os, const std::vector<ResultRow>& rows);
std::vector<ResultRow> read_results_csv(std::istream& is);

/// Per-cell aggregate over successful folds, in first-appearance order.
struct CellSummary {
    int cell = 0;
    std::string axis;
    std::string series;
    int x = 0;
    double mean = 0.0;
    double std = 0.0;  // sample standard deviation
    int ok = 0;
    int failed = 0;
};

std::vector<CellSummary> summarize_cells(const std::vector<ResultRow>& rows);

/// series,x,y,y_std for every cell with at least one successful fold.
void write_plot_csv(std::ostream& os, const std::vector<CellSummary>& cells);
void write_cells_csv(std::ostream& os, const std::vector<CellSummary>& cells);

/// Labeled square table; rows are true classes, columns predictions.
void write_confusion_csv(std::ostream& os, const ConfusionMatrix& confusion, const std::vector<int>& labels);

std::string summary_json(const RunReport& report);
std::string summary_json(const SweepResult& sweep);

/// Deterministic artifacts (results.csv, summary.json, confusion.csv or
/// plot_<axis>.csv, config.ini) plus timing.txt, which alone carries the
/// wall clock. Returns the files written.
std::vector<std::filesystem::path> write_run_outputs(const std::filesystem::path& dir, const RunReport& report);
std::vector<std::filesystem::path> write_sweep_outputs(const std::filesystem::path& dir, const SweepResult& sweep);

/// Re-renders cells.csv and per-axis plot CSVs from a results table.
std::vector<std::filesystem::path> rerender(const std::filesystem::path& results_csv, const std::filesystem::path& dir);

}  // namespace photorc
