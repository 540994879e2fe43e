#pragma once

#include <string>
#include <vector>

#include "dstp/train.hpp"

namespace dstp {

struct ForecastReport {
    std::string dataset;
    std::string arch;
    std::size_t T = 0;
    std::size_t horizon = 0;
    double rmse = 0.0;
    double mae = 0.0;
    std::size_t sample_count = 0;
    double seconds = 0.0;
    std::string checkpoint_path;
    std::vector<double> per_horizon_rmse;  // diagnostic, not part of the CSV row
};

struct EvaluateOptions {
    std::string prediction_csv;  // when non-empty, dump per-window predictions
    bool raw_units = false;      // re-express metrics via the stored stats
};

/// Forward pass over every window; pooled RMSE/MAE over all horizon*N scalars.
ForecastReport evaluate(const Checkpoint& checkpoint, const std::vector<WindowSample>& windows,
                        const EvaluateOptions& opts = {});

/// CSV rows (window, phase, step, index, weight) for every attention vector.
void export_attention(const Checkpoint& checkpoint, const std::vector<WindowSample>& windows,
                      const std::string& out_path);

struct ExperimentGrid {
    std::vector<Arch> architectures;
    std::vector<std::size_t> horizons;
    std::vector<std::size_t> window_sizes;
};

struct GridRow {
    std::string dataset;
    std::string arch;
    std::size_t T = 0;
    std::size_t horizon = 0;
    std::string status;  // "ok" or an error message
    ForecastReport report;
};

/// Trains and evaluates every (arch, T, horizon) combination in deterministic
/// grid order; failures are recorded and the remaining jobs continue.
std::vector<GridRow> run_grid(const SplitResult& split, const std::string& dataset_name,
                              const ExperimentGrid& grid, const ModelConfig& base,
                              const TrainConfig& tc, const std::string& out_dir);

void write_report_csv(const std::vector<GridRow>& rows, const std::string& path);
std::vector<GridRow> read_report_csv(const std::string& path);

/// %.17g formatting for exact round-trip.
std::string fmt17(double v);

}  // namespace dstp
