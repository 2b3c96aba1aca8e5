#include "photorc/sweep.hpp"

#include "photorc/errors.hpp"

#include <algorithm>
#include <chrono>

namespace photorc {

SweepAxis parse_sweep_axis(const std::string& s) {
    for (auto a : {SweepAxis::allocation_strategy, SweepAxis::leakage_config, SweepAxis::bias_profile,
                   SweepAxis::depth_vs_shallow}) {
        if (to_string(a) == s) return a;
    }
    throw ConfigError("unknown sweep axis '" + s +
                      "' (allocation-strategy|leakage-config|bias-profile|depth-vs-shallow)");
}

std::string to_string(SweepAxis a) {
    switch (a) {
        case SweepAxis::allocation_strategy: return "allocation-strategy";
        case SweepAxis::leakage_config: return "leakage-config";
        case SweepAxis::bias_profile: return "bias-profile";
        case SweepAxis::depth_vs_shallow: return "depth-vs-shallow";
    }
    return "?";
}

namespace {

struct Leakage {
    const char* name;
    double first;
    double last;
};

constexpr Leakage kLeakageConfigs[] = {
    {"decreasing", 0.95, 0.65},
    {"increasing", 0.65, 0.95},
    {"fixed-0.65", 0.65, 0.65},
    {"fixed-0.95", 0.95, 0.95},
};

int depth_budget(const ExperimentConfig& base, int depth) {
    return base.sweep.budget_rule == BudgetRule::per_layer_100 ? 100 * depth : base.reservoir.deep.total_neurons;
}

}  // namespace

std::vector<SweepCell> sweep_grid(const ExperimentConfig& base, SweepAxis axis) {
    std::vector<SweepCell> cells;
    auto add = [&](std::string series, int x, ExperimentConfig c) {
        c.name = base.name + "/" + series + "/" + std::to_string(x);
        cells.push_back({static_cast<int>(cells.size()), std::move(series), x, std::move(c)});
    };
    auto at_depth = [&](int depth) {
        if (depth < 1) throw ConfigError("sweep depth must be positive, got " + std::to_string(depth));
        ExperimentConfig c = base;
        c.reservoir.deep.depth = depth;
        c.reservoir.deep.total_neurons = depth_budget(base, depth);
        return c;
    };
    switch (axis) {
        case SweepAxis::allocation_strategy:
            for (auto a : {Allocation::decreasing, Allocation::uniform, Allocation::increasing}) {
                for (int d : base.sweep.depths) {
                    auto c = at_depth(d);
                    c.reservoir.deep.allocation = a;
                    add(to_string(a), d, std::move(c));
                }
            }
            break;
        case SweepAxis::leakage_config:
            for (const auto& lk : kLeakageConfigs) {
                for (int d : base.sweep.depths) {
                    auto c = at_depth(d);
                    c.reservoir.deep.alpha_first = lk.first;
                    c.reservoir.deep.alpha_last = lk.last;
                    add(lk.name, d, std::move(c));
                }
            }
            break;
        case SweepAxis::bias_profile:
            for (auto b : {BiasProfile::mild_increasing, BiasProfile::uniform}) {
                for (int d : base.sweep.depths) {
                    auto c = at_depth(d);
                    c.reservoir.deep.bias_profile = b;
                    add(to_string(b), d, std::move(c));
                }
            }
            break;
        case SweepAxis::depth_vs_shallow:
            for (int depth : {1, 3, 5}) {
                for (int budget : base.sweep.budgets) {
                    ExperimentConfig c = base;
                    c.reservoir.deep.depth = depth;
                    c.reservoir.deep.total_neurons = budget;
                    if (depth == 1) {
                        c.reservoir.deep.alpha_first = 0.95;
                        c.reservoir.deep.alpha_last = 0.95;
                    }
                    add(depth == 1 ? "shallow" : "deep-" + std::to_string(depth), budget, std::move(c));
                }
            }
            break;
    }
    return cells;
}

SweepResult run_sweep(const ExperimentConfig& base, SweepAxis axis) { return run_sweep(base, axis, load_pool(base)); }

SweepResult run_sweep(const ExperimentConfig& base, SweepAxis axis, const DataPool& pool) {
    const auto start = std::chrono::steady_clock::now();
    SweepResult result;
    result.axis = axis;
    result.base_digest = config_digest(base);
    for (auto& cell : sweep_grid(base, axis)) {
        CellOutcome outcome;
        try {
            outcome.report = run_experiment(cell.config, pool);
            outcome.ok = outcome.report.failed_folds() == 0;
            if (!outcome.ok) {
                const auto& folds = outcome.report.folds;
                const auto first = std::find_if(folds.begin(), folds.end(), [](const FoldResult& f) { return !f.ok; });
                outcome.error = first->error + " (" + std::to_string(outcome.report.failed_folds()) + " of " +
                                std::to_string(folds.size()) + " folds failed)";
            }
        } catch (const std::exception& e) {
            outcome.error = error_kind(e) + ": " + e.what();
        }
        outcome.cell = std::move(cell);
        result.cells.push_back(std::move(outcome));
    }
    result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

}  // namespace photorc
