#pragma once

#include <cassert>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace stdgan {

// Dense row-major tensor. Network activations use (N, C, H, W).
template <typename T>
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(std::vector<int> shape, T fill = T(0))
        : shape_(std::move(shape)), data_(count(shape_), fill) {}

    Tensor(std::initializer_list<int> shape, T fill = T(0))
        : Tensor(std::vector<int>(shape), fill) {}

    static Tensor zeros_like(const Tensor& other) { return Tensor(other.shape_); }

    static Tensor scalar(T v) {
        Tensor t({1});
        t.data_[0] = v;
        return t;
    }

    static Tensor from_vector(std::vector<int> shape, std::vector<T> values) {
        Tensor t;
        t.shape_ = std::move(shape);
        if (count(t.shape_) != values.size())
            throw std::invalid_argument("tensor: shape does not match value count");
        t.data_ = std::move(values);
        return t;
    }

    int ndim() const { return static_cast<int>(shape_.size()); }
    int dim(int i) const { return shape_[static_cast<size_t>(i)]; }
    const std::vector<int>& shape() const { return shape_; }
    size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }

    T& operator[](size_t i) { return data_[i]; }
    const T& operator[](size_t i) const { return data_[i]; }

    // 4-d accessors for (N, C, H, W) tensors.
    T& at(int n, int c, int h, int w) {
        return data_[idx4(n, c, h, w)];
    }
    const T& at(int n, int c, int h, int w) const {
        return data_[idx4(n, c, h, w)];
    }

    size_t idx4(int n, int c, int h, int w) const {
        assert(ndim() == 4);
        return ((static_cast<size_t>(n) * shape_[1] + c) * shape_[2] + h) * shape_[3] + w;
    }

    void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

    Tensor<T> reshaped(std::vector<int> shape) const {
        if (count(shape) != data_.size())
            throw std::invalid_argument("tensor: reshape changes element count");
        Tensor t = *this;
        t.shape_ = std::move(shape);
        return t;
    }

    template <typename U>
    Tensor<U> cast() const {
        Tensor<U> out;
        out = Tensor<U>(shape_);
        for (size_t i = 0; i < data_.size(); ++i) out[i] = static_cast<U>(data_[i]);
        return out;
    }

private:
    static size_t count(const std::vector<int>& shape) {
        size_t n = 1;
        for (int d : shape) {
            if (d < 0) throw std::invalid_argument("tensor: negative dimension");
            n *= static_cast<size_t>(d);
        }
        return shape.empty() ? 0 : n;
    }

    std::vector<int> shape_;
    std::vector<T> data_;
};

} // namespace stdgan
