#ifndef KANMIXER_DATA_HPP_
#define KANMIXER_DATA_HPP_

#include <cstddef>
#include <string>
#include <vector>

#include "kanmixer/tensor.hpp"

namespace kanmixer {

// Multivariate series loaded from an ETT-style CSV: a leading "date" column
// followed by numeric variables. Immutable after load apart from z-scoring.
struct SeriesTable {
    std::string name;
    std::vector<std::string> timestamps;
    std::vector<std::string> columns;
    std::vector<double> values;  // rows x d, row-major
    std::size_t rows = 0;
    std::size_t d = 0;

    double at(std::size_t r, std::size_t c) const { return values[r * d + c]; }
    double& at(std::size_t r, std::size_t c) { return values[r * d + c]; }
};

SeriesTable load_csv(const std::string& path);
void write_csv(const SeriesTable& table, const std::string& path);

// Deterministic sine-plus-trend series for harness runs: column c holds
// sin(2*pi*(t + 3c)/24) + 0.01*t.
SeriesTable make_synthetic_series(std::size_t rows, std::size_t cols);

struct SplitSpec {
    double train = 0.6;
    double val = 0.2;
    double test = 0.2;

    static SplitSpec ett() { return {0.6, 0.2, 0.2}; }
    static SplitSpec other() { return {0.7, 0.1, 0.2}; }
    static SplitSpec for_family(const std::string& family);

    void validate() const;
};

struct RowRange {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::size_t size() const { return end - begin; }
};

struct Splits {
    RowRange train, val, test;
};

// Contiguous train|val|test ranges by floored cumulative ratios; rows lost to
// flooring go to test.
Splits split(const SeriesTable& table, const SplitSpec& spec);

struct ColumnStats {
    std::vector<double> mean;
    std::vector<double> stdev;
};

// Global z-score with statistics taken from the train range only; transforms
// every row in place and returns the statistics. Metrics downstream live in
// this normalized space.
ColumnStats zscore(SeriesTable& table, RowRange train_range);
void zscore_invert(SeriesTable& table, const ColumnStats& stats);

// Stride-1 sliding windows over one split segment: window w reads rows
// [w, w+L) as input and [w+L, w+L+P) as target, never crossing the segment.
class WindowSet {
public:
    WindowSet(const SeriesTable& table, RowRange segment, int lookback, int horizon);

    std::size_t count() const { return count_; }
    std::size_t channels() const { return table_->d; }
    int lookback() const { return lookback_; }
    int horizon() const { return horizon_; }

    // Gathers windows idx[i0..i1) into [n x d x L] inputs and [n x d x P] targets.
    void gather(const std::vector<std::size_t>& idx, std::size_t i0, std::size_t i1,
                Tensor& inputs, Tensor& targets) const;
    // Sequential windows [w0, w1).
    void gather_range(std::size_t w0, std::size_t w1, Tensor& inputs, Tensor& targets) const;

private:
    const SeriesTable* table_;
    RowRange segment_;
    int lookback_;
    int horizon_;
    std::size_t count_;
};

}  // namespace kanmixer

#endif  // KANMIXER_DATA_HPP_
