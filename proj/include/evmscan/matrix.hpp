// evmscan: bytecode-level smart-contract vulnerability scanner
// Copyright 2026 The evmscan Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

namespace evmscan
{
/// Dense row-major matrix.
template <typename T>
class Matrix
{
public:
    Matrix() = default;
    Matrix(size_t rows, size_t cols, T fill = T{}) : rows_(rows), cols_(cols), data_(rows * cols, fill)
    {}

    size_t rows() const noexcept { return rows_; }
    size_t cols() const noexcept { return cols_; }
    size_t size() const noexcept { return data_.size(); }

    T& operator()(size_t r, size_t c) noexcept
    {
        assert(r < rows_ && c < cols_);
        return data_[r * cols_ + c];
    }
    const T& operator()(size_t r, size_t c) const noexcept
    {
        assert(r < rows_ && c < cols_);
        return data_[r * cols_ + c];
    }

    std::span<T> row(size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
    std::span<const T> row(size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }

    std::vector<T>& data() noexcept { return data_; }
    const std::vector<T>& data() const noexcept { return data_; }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    size_t rows_ = 0;
    size_t cols_ = 0;
    std::vector<T> data_;
};

using MatrixD = Matrix<double>;
using MatrixF = Matrix<float>;

/// a (n x k) * b (k x m). Mixed element types accumulate in double.
template <typename A, typename B>
MatrixD matmul(const Matrix<A>& a, const Matrix<B>& b)
{
    assert(a.cols() == b.rows());
    MatrixD out(a.rows(), b.cols());
    for (size_t i = 0; i < a.rows(); ++i)
    {
        auto out_row = out.row(i);
        for (size_t k = 0; k < a.cols(); ++k)
        {
            const double aik = static_cast<double>(a(i, k));
            const auto b_row = b.row(k);
            for (size_t j = 0; j < b.cols(); ++j)
                out_row[j] += aik * static_cast<double>(b_row[j]);
        }
    }
    return out;
}

/// a (n x k) * b^T where b is (m x k).
template <typename A, typename B>
MatrixD matmul_transposed(const Matrix<A>& a, const Matrix<B>& b)
{
    assert(a.cols() == b.cols());
    MatrixD out(a.rows(), b.rows());
    for (size_t i = 0; i < a.rows(); ++i)
    {
        const auto a_row = a.row(i);
        for (size_t j = 0; j < b.rows(); ++j)
        {
            const auto b_row = b.row(j);
            double s = 0.0;
            for (size_t k = 0; k < a.cols(); ++k)
                s += static_cast<double>(a_row[k]) * static_cast<double>(b_row[k]);
            out(i, j) = s;
        }
    }
    return out;
}

/// Adds a bias row vector to every row of m.
template <typename B>
void add_row_vector(MatrixD& m, std::span<const B> bias)
{
    assert(bias.size() == m.cols());
    for (size_t i = 0; i < m.rows(); ++i)
    {
        auto r = m.row(i);
        for (size_t j = 0; j < m.cols(); ++j)
            r[j] += static_cast<double>(bias[j]);
    }
}

}  // namespace evmscan
