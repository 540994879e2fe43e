#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dstp/array.hpp"

namespace dstp {

struct DatasetSpec {
    std::string name;    // sml2010, nasdaq100, energy, eeg, synthetic
    std::string path;    // CSV source
    std::string target;  // target column name
    std::vector<std::string> exclude;
    std::size_t train_size = 0;
    std::size_t test_size = 0;
    bool whitespace_delimited = false;  // SML2010 raw format
    bool drop_binary = false;           // drop binary-valued (on/off) columns
};

/// Numeric table, column-major. The target column is kept alongside the
/// exogenous ones; target_index names it.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> cols;
    std::size_t target_index = 0;

    std::size_t rows() const { return cols.empty() ? 0 : cols[0].size(); }
    std::size_t width() const { return cols.size(); }
    std::size_t exogenous_count() const { return width() - 1; }
};

/// Per-column mean and population standard deviation from the training rows.
struct StandardizationStats {
    std::vector<double> mean;
    std::vector<double> stddev;
    std::size_t target_index = 0;
};

struct SplitResult {
    Table train;
    Table test;
    StandardizationStats stats;
};

struct WindowSample {
    Array X;                     // n x T exogenous history
    std::vector<double> y_hist;  // length T target history
    std::vector<double> future;  // length tau target truth
    std::size_t origin = 0;      // row index of y_T within the split
};

/// Parses the CSV, drops excluded columns, fills missing values (linear
/// interpolation inside a column, nearest value at the edges).
Table load(const DatasetSpec& spec);

/// Chronological split at the spec's row counts; z-scores both splits with
/// statistics computed from the training rows only.
SplitResult split_and_standardize(const Table& table, const DatasetSpec& spec);

/// Stride-1 sliding windows; count = rows - T - tau + 1.
std::vector<WindowSample> make_windows(const Table& table, std::size_t T, std::size_t tau);

struct SyntheticResult {
    Table table;
    std::vector<std::size_t> informative;  // indices of the designated series
    std::vector<double> coefficients;      // their lag-1 weights in the target
};

/// Mean offset applied to the designated series so that they are
/// distinguishable from the uninformative ones by value alone.
inline constexpr double kInformativeOffset = 5.0;

/// n AR(1) exogenous series; the designated `sparsity` series carry a mean
/// offset, and the target is a fixed linear combination of their centered
/// values lagged by one step, plus small noise.
SyntheticResult synthesize(std::size_t n, std::size_t rows, std::size_t sparsity,
                           std::uint64_t seed);

/// Reads a key=value config file into a DatasetSpec.
DatasetSpec dataset_spec_from_file(const std::string& path);

}  // namespace dstp
