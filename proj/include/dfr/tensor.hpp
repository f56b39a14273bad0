#pragma once

#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace dfr {

// Dense row-major tensor of rank 1..3. The sample/coefficient container for
// the separable transform machinery; last axis varies fastest.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> dims, double fill = 0.0)
        : dims_(std::move(dims)),
          data_(std::accumulate(dims_.begin(), dims_.end(), std::size_t{1},
                                std::multiplies<>()),
                fill) {
        if (dims_.empty() || dims_.size() > 3)
            throw std::invalid_argument("Tensor: rank must be 1..3");
        for (std::size_t d : dims_)
            if (d == 0) throw std::invalid_argument("Tensor: zero dimension");
    }

    std::size_t rank() const { return dims_.size(); }
    const std::vector<std::size_t>& dims() const { return dims_; }
    std::size_t dim(std::size_t a) const { return dims_[a]; }
    std::size_t size() const { return data_.size(); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    double& operator[](std::size_t flat) { return data_[flat]; }
    double operator[](std::size_t flat) const { return data_[flat]; }

    double& at(std::size_t i) { return data_[i]; }
    double& at(std::size_t i, std::size_t j) { return data_[i * dims_[1] + j]; }
    double& at(std::size_t i, std::size_t j, std::size_t k) {
        return data_[(i * dims_[1] + j) * dims_[2] + k];
    }
    double at(std::size_t i) const { return data_[i]; }
    double at(std::size_t i, std::size_t j) const { return data_[i * dims_[1] + j]; }
    double at(std::size_t i, std::size_t j, std::size_t k) const {
        return data_[(i * dims_[1] + j) * dims_[2] + k];
    }

    bool same_shape(const Tensor& o) const { return dims_ == o.dims_; }

private:
    std::vector<std::size_t> dims_;
    std::vector<double> data_;
};

}  // namespace dfr
