#pragma once

#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "dstp/errors.hpp"

namespace dstp {

/// Dense 64-bit real array, row-major, rank 1 or 2.
struct Array {
    std::vector<std::size_t> shape;
    std::vector<double> data;

    Array() = default;
    Array(std::vector<std::size_t> shape_, std::vector<double> data_)
        : shape(std::move(shape_)), data(std::move(data_)) {
        if (count(shape) != data.size())
            throw DimensionError("Array: shape " + shape_str(shape) + " does not match " +
                                 std::to_string(data.size()) + " values");
    }

    static std::size_t count(const std::vector<std::size_t>& s) {
        std::size_t n = 1;
        for (auto d : s) n *= d;
        return n;
    }

    static Array zeros(std::vector<std::size_t> shape) {
        std::size_t n = count(shape);
        return Array(std::move(shape), std::vector<double>(n, 0.0));
    }
    static Array scalar(double v) { return Array({1}, {v}); }
    static Array vec(std::vector<double> v) {
        std::size_t n = v.size();
        return Array({n}, std::move(v));
    }
    static Array matrix(std::size_t r, std::size_t c, std::vector<double> v) {
        return Array({r, c}, std::move(v));
    }

    std::size_t size() const { return data.size(); }
    std::size_t rank() const { return shape.size(); }
    bool is_scalar() const { return size() == 1; }
    std::size_t rows() const { return shape.empty() ? 0 : shape[0]; }
    std::size_t cols() const { return shape.size() < 2 ? 1 : shape[1]; }

    double& at(std::size_t i) { return data[i]; }
    double at(std::size_t i) const { return data[i]; }
    double& at(std::size_t r, std::size_t c) { return data[r * cols() + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols() + c]; }

    /// Row r of a rank-2 array as a rank-1 array.
    Array row(std::size_t r) const {
        std::size_t c = cols();
        return Array({c}, std::vector<double>(data.begin() + r * c, data.begin() + (r + 1) * c));
    }
    /// Column c of a rank-2 array as a rank-1 array.
    Array col(std::size_t c) const {
        std::vector<double> out(rows());
        for (std::size_t r = 0; r < rows(); ++r) out[r] = at(r, c);
        return Array({rows()}, std::move(out));
    }

    static std::string shape_str(const std::vector<std::size_t>& s) {
        std::ostringstream os;
        os << '[';
        for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "x" : "") << s[i];
        os << ']';
        return os.str();
    }
    std::string shape_str() const { return shape_str(shape); }
};

inline bool same_shape(const Array& a, const Array& b) { return a.shape == b.shape; }

inline void require_same_shape(const Array& a, const Array& b, const char* op) {
    if (!same_shape(a, b))
        throw DimensionError(std::string(op) + ": shape mismatch " + a.shape_str() + " vs " +
                             b.shape_str());
}

}  // namespace dstp
