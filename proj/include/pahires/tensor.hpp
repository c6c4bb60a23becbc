#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "pahires/error.hpp"

namespace pahires {

// Dense row-major float64 array. Rank 1 and 2 cover everything the model
// needs; scalars are rank-1 tensors of size 1.
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0)
        : shape_(std::move(shape)),
          data_(std::accumulate(shape_.begin(), shape_.end(), std::size_t{1},
                                std::multiplies<>()),
                fill) {}

    static Tensor scalar(double v) {
        Tensor t({1});
        t.data_[0] = v;
        return t;
    }

    static Tensor vector(std::vector<double> v) {
        Tensor t;
        t.shape_ = {v.size()};
        t.data_ = std::move(v);
        return t;
    }

    static Tensor matrix(std::size_t rows, std::size_t cols,
                         std::vector<double> v) {
        if (v.size() != rows * cols)
            throw Error(ErrorKind::numeric, "matrix: data size mismatch");
        Tensor t;
        t.shape_ = {rows, cols};
        t.data_ = std::move(v);
        return t;
    }

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    std::size_t rows() const { return rank() == 2 ? shape_[0] : 1; }
    std::size_t cols() const { return rank() == 2 ? shape_[1] : size(); }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    double& operator()(std::size_t r, std::size_t c) {
        return data_[r * shape_[1] + c];
    }
    double operator()(std::size_t r, std::size_t c) const {
        return data_[r * shape_[1] + c];
    }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& storage() { return data_; }
    const std::vector<double>& storage() const { return data_; }

    bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

    bool is_scalar() const { return size() == 1; }
    double scalar_value() const {
        if (!is_scalar())
            throw Error(ErrorKind::numeric, "scalar_value on non-scalar tensor");
        return data_[0];
    }

    bool all_finite() const {
        for (double v : data_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    Tensor reshaped(std::vector<std::size_t> shape) const {
        std::size_t n = std::accumulate(shape.begin(), shape.end(),
                                        std::size_t{1}, std::multiplies<>());
        if (n != size())
            throw Error(ErrorKind::numeric, "reshape: element count mismatch");
        Tensor t = *this;
        t.shape_ = std::move(shape);
        return t;
    }

    std::string shape_string() const {
        std::ostringstream os;
        os << "(";
        for (std::size_t i = 0; i < shape_.size(); ++i)
            os << (i ? "x" : "") << shape_[i];
        os << ")";
        return os.str();
    }

    bool operator==(const Tensor& o) const {
        return shape_ == o.shape_ && data_ == o.data_;
    }

private:
    std::vector<std::size_t> shape_;
    std::vector<double> data_;
};

}  // namespace pahires
