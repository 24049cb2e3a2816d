#include "kanmixer/data.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "kanmixer/errors.hpp"

namespace kanmixer {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.push_back("");
    return cells;
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

SeriesTable load_csv(const std::string& path) {
    std::ifstream file(path);
    if (!file) throw load_error("cannot open dataset file '" + path + "'");

    SeriesTable table;
    table.name = std::filesystem::path(path).stem().string();

    std::string line;
    if (!std::getline(file, line)) throw load_error("empty dataset file '" + path + "'");
    const std::vector<std::string> header = split_line(line);
    if (header.empty() || trim(header[0]) != "date")
        throw load_error("first column of '" + path + "' must be named 'date'");
    if (header.size() < 2)
        throw load_error("dataset '" + path + "' has no value columns");
    for (std::size_t c = 1; c < header.size(); ++c) table.columns.push_back(trim(header[c]));
    table.d = table.columns.size();

    std::size_t row = 0;
    while (std::getline(file, line)) {
        ++row;
        if (trim(line).empty()) continue;
        const std::vector<std::string> cells = split_line(line);
        if (cells.size() != header.size())
            throw load_error("row " + std::to_string(row) + " of '" + path + "' has " +
                             std::to_string(cells.size()) + " cells, expected " +
                             std::to_string(header.size()));
        table.timestamps.push_back(trim(cells[0]));
        for (std::size_t c = 1; c < cells.size(); ++c) {
            const std::string cell = trim(cells[c]);
            if (cell.empty())
                throw load_error("missing value at row " + std::to_string(row) + " column " +
                                 std::to_string(c + 1) + " of '" + path + "'");
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            if (end != cell.c_str() + cell.size() || !std::isfinite(v))
                throw load_error("non-numeric cell '" + cell + "' at row " + std::to_string(row) +
                                 " column " + std::to_string(c + 1) + " of '" + path + "'");
            table.values.push_back(v);
        }
    }
    table.rows = table.timestamps.size();
    if (table.rows == 0) throw load_error("dataset '" + path + "' has no data rows");
    return table;
}

void write_csv(const SeriesTable& table, const std::string& path) {
    std::ofstream file(path);
    if (!file) throw load_error("cannot write dataset file '" + path + "'");
    file << "date";
    for (const std::string& c : table.columns) file << "," << c;
    file << "\n";
    char buf[40];
    for (std::size_t r = 0; r < table.rows; ++r) {
        file << table.timestamps[r];
        for (std::size_t c = 0; c < table.d; ++c) {
            std::snprintf(buf, sizeof(buf), "%.17g", table.at(r, c));
            file << "," << buf;
        }
        file << "\n";
    }
}

SeriesTable make_synthetic_series(std::size_t rows, std::size_t cols) {
    if (rows == 0 || cols == 0) throw config_error("synthetic series needs rows and cols >= 1");
    SeriesTable table;
    table.name = "synthetic";
    table.rows = rows;
    table.d = cols;
    const double two_pi = 6.283185307179586476925286766559;
    for (std::size_t c = 0; c < cols; ++c) table.columns.push_back("v" + std::to_string(c));
    table.values.resize(rows * cols);
    for (std::size_t t = 0; t < rows; ++t) {
        table.timestamps.push_back("t" + std::to_string(t));
        for (std::size_t c = 0; c < cols; ++c)
            table.values[t * cols + c] =
                std::sin(two_pi * (static_cast<double>(t) + 3.0 * c) / 24.0) + 0.01 * t;
    }
    return table;
}

SplitSpec SplitSpec::for_family(const std::string& family) {
    if (family == "ett") return ett();
    if (family == "other") return other();
    throw config_error("unknown dataset family '" + family + "' (use ett|other)");
}

void SplitSpec::validate() const {
    for (double f : {train, val, test})
        if (!(f > 0.0 && f < 1.0)) throw config_error("split fractions must lie in (0,1)");
    if (std::abs(train + val + test - 1.0) > 1e-9)
        throw config_error("split fractions must sum to 1");
}

namespace {

// floor(n * ratio) in exact rational arithmetic; products that are integers up
// to representation error (10 * 0.7 = 6.999...) must not lose a row.
std::size_t floor_boundary(double v) {
    const double nearest = std::nearbyint(v);
    if (std::abs(v - nearest) < 1e-9 * std::max(1.0, std::abs(v)))
        return static_cast<std::size_t>(nearest);
    return static_cast<std::size_t>(std::floor(v));
}

}  // namespace

Splits split(const SeriesTable& table, const SplitSpec& spec) {
    spec.validate();
    const std::size_t n = table.rows;
    const std::size_t b1 = floor_boundary(n * spec.train);
    const std::size_t b2 = floor_boundary(n * (spec.train + spec.val));
    Splits s;
    s.train = {0, b1};
    s.val = {b1, b2};
    s.test = {b2, n};  // flooring leftovers land in test
    if (s.train.size() == 0 || s.val.size() == 0 || s.test.size() == 0)
        throw config_error("split of " + std::to_string(n) + " rows leaves an empty segment");
    return s;
}

ColumnStats zscore(SeriesTable& table, RowRange train_range) {
    if (train_range.end > table.rows || train_range.size() == 0)
        throw config_error("invalid train range for zscore");
    ColumnStats stats;
    stats.mean.assign(table.d, 0.0);
    stats.stdev.assign(table.d, 0.0);
    const std::size_t n = train_range.size();
    for (std::size_t r = train_range.begin; r < train_range.end; ++r)
        for (std::size_t c = 0; c < table.d; ++c) stats.mean[c] += table.at(r, c);
    for (std::size_t c = 0; c < table.d; ++c) stats.mean[c] /= n;
    for (std::size_t r = train_range.begin; r < train_range.end; ++r)
        for (std::size_t c = 0; c < table.d; ++c) {
            const double dlt = table.at(r, c) - stats.mean[c];
            stats.stdev[c] += dlt * dlt;
        }
    for (std::size_t c = 0; c < table.d; ++c) stats.stdev[c] = std::sqrt(stats.stdev[c] / n);
    for (std::size_t r = 0; r < table.rows; ++r)
        for (std::size_t c = 0; c < table.d; ++c)
            table.at(r, c) = (table.at(r, c) - stats.mean[c]) / (stats.stdev[c] + 1e-8);
    return stats;
}

void zscore_invert(SeriesTable& table, const ColumnStats& stats) {
    for (std::size_t r = 0; r < table.rows; ++r)
        for (std::size_t c = 0; c < table.d; ++c)
            table.at(r, c) = table.at(r, c) * (stats.stdev[c] + 1e-8) + stats.mean[c];
}

WindowSet::WindowSet(const SeriesTable& table, RowRange segment, int lookback, int horizon)
    : table_(&table), segment_(segment), lookback_(lookback), horizon_(horizon) {
    if (lookback < 1 || horizon < 1) throw config_error("window sizes must be positive");
    if (segment.end > table.rows) throw config_error("window segment exceeds table rows");
    const std::size_t need = static_cast<std::size_t>(lookback) + horizon;
    if (segment.size() < need)
        throw config_error("segment of " + std::to_string(segment.size()) +
                           " rows is shorter than lookback+horizon = " + std::to_string(need));
    count_ = segment.size() - need + 1;
}

void WindowSet::gather(const std::vector<std::size_t>& idx, std::size_t i0, std::size_t i1,
                       Tensor& inputs, Tensor& targets) const {
    const std::size_t n = i1 - i0;
    const std::size_t d = table_->d;
    const std::size_t L = static_cast<std::size_t>(lookback_);
    const std::size_t P = static_cast<std::size_t>(horizon_);
    inputs = Tensor({n, d, L});
    targets = Tensor({n, d, P});
    for (std::size_t b = 0; b < n; ++b) {
        const std::size_t w = segment_.begin + idx[i0 + b];
        for (std::size_t c = 0; c < d; ++c) {
            for (std::size_t t = 0; t < L; ++t)
                inputs.data[(b * d + c) * L + t] = table_->at(w + t, c);
            for (std::size_t t = 0; t < P; ++t)
                targets.data[(b * d + c) * P + t] = table_->at(w + L + t, c);
        }
    }
}

void WindowSet::gather_range(std::size_t w0, std::size_t w1, Tensor& inputs,
                             Tensor& targets) const {
    std::vector<std::size_t> idx(w1 - w0);
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = w0 + i;
    gather(idx, 0, idx.size(), inputs, targets);
}

}  // namespace kanmixer
