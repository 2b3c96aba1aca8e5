#pragma once

#include "photorc/config.hpp"
#include "photorc/experiment.hpp"

#include <string>
#include <vector>

namespace photorc {

enum class SweepAxis { allocation_strategy, leakage_config, bias_profile, depth_vs_shallow };

SweepAxis parse_sweep_axis(const std::string& s);
std::string to_string(SweepAxis a);

/// One grid point: a full configuration plus its plot coordinates.
struct SweepCell {
    int index = 0;
    std::string series;
    int x = 0;  // depth, or total budget for depth-vs-shallow
    ExperimentConfig config;
};

/// Grid of an ablation panel. Every setting not named by the axis is taken
/// from base.
///
/// allocation-strategy, leakage-config, bias-profile: series x depth over
///   sweep.depths, with total budget 100 * L under the per-layer-100 rule.
/// depth-vs-shallow: series shallow (L = 1, alpha 0.95), deep-3 and deep-5
///   over sweep.budgets.
std::vector<SweepCell> sweep_grid(const ExperimentConfig& base, SweepAxis axis);

struct CellOutcome {
    SweepCell cell;
    bool ok = false;
    std::string error;
    RunReport report;
};

struct SweepResult {
    SweepAxis axis = SweepAxis::allocation_strategy;
    std::string base_digest;
    std::vector<CellOutcome> cells;
    double wall_seconds = 0.0;
};

/// Runs every cell in grid order on one shared data pool. A cell that throws
/// is recorded with its diagnostic and the sweep moves on.
SweepResult run_sweep(const ExperimentConfig& base, SweepAxis axis);
SweepResult run_sweep(const ExperimentConfig& base, SweepAxis axis, const DataPool& pool);

}  // namespace photorc
