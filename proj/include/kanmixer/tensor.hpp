#ifndef KANMIXER_TENSOR_HPP_
#define KANMIXER_TENSOR_HPP_

#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <string>
#include <vector>

#include "kanmixer/errors.hpp"

namespace kanmixer {

// Dense n-d array of doubles in row-major order. Plain value type; the
// gradient buffer is attached to trainable tensors and filled by
// Tape::backward (accumulating, never auto-zeroed).
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> data;
    std::vector<double> grad;  // empty when absent, else same length as data

    Tensor() = default;

    explicit Tensor(std::vector<std::size_t> s) : shape(std::move(s)) {
        data.assign(count(shape), 0.0);
    }

    Tensor(std::vector<std::size_t> s, std::vector<double> values)
        : shape(std::move(s)), data(std::move(values)) {
        if (data.size() != count(shape))
            throw shape_error("tensor data length " + std::to_string(data.size()) +
                              " does not match shape volume " + std::to_string(count(shape)));
    }

    static Tensor scalar(double v) { return Tensor({1}, {v}); }

    static std::size_t count(const std::vector<std::size_t>& s) {
        std::size_t n = 1;
        for (std::size_t d : s) n *= d;
        return n;
    }

    std::size_t size() const { return data.size(); }

    std::size_t rows() const { return shape.empty() ? 0 : shape[0]; }
    std::size_t cols() const { return shape.size() < 2 ? (shape.empty() ? 0 : 1) : shape[1]; }

    double& at(std::size_t r, std::size_t c) { return data[r * cols() + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols() + c]; }

    void ensure_grad() {
        if (grad.size() != data.size()) grad.assign(data.size(), 0.0);
    }
    void zero_grad() { grad.assign(data.size(), 0.0); }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }
};

inline std::string shape_string(const std::vector<std::size_t>& s) {
    std::string out = "[";
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) out += "x";
        out += std::to_string(s[i]);
    }
    return out + "]";
}

}  // namespace kanmixer

#endif  // KANMIXER_TENSOR_HPP_
