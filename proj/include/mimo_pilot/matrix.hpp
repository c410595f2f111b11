// SPDX-License-Identifier: Apache-2.0
//
// mimo-pilot: channel estimation and pilot power allocation for multi-cell massive MIMO
// Copyright (C) 2026 The mimo-pilot authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef MIMO_PILOT_MATRIX_HPP
#define MIMO_PILOT_MATRIX_HPP

#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

namespace mimo_pilot
{

// Dense row-major matrix with value semantics.
template <typename T>
class Matrix
{
  public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, T value = T{})
        : rows_(rows), cols_(cols), data_(rows * cols, value) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    T &operator()(std::size_t r, std::size_t c)
    {
        assert(r < rows_ && c < cols_);
        return data_[r * cols_ + c];
    }
    const T &operator()(std::size_t r, std::size_t c) const
    {
        assert(r < rows_ && c < cols_);
        return data_[r * cols_ + c];
    }

    std::span<T> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const T> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::vector<T> col(std::size_t c) const
    {
        std::vector<T> out(rows_);
        for (std::size_t r = 0; r < rows_; ++r)
            out[r] = (*this)(r, c);
        return out;
    }

    std::span<T> data() { return data_; }
    std::span<const T> data() const { return data_; }

    bool operator==(const Matrix &) const = default;

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

// Large-scale coefficients seen by the target BS: rows are cells l (row 0 is
// the target cell), columns are users k.
using BetaMatrix = Matrix<double>;

// Pilot powers rho[l][k], same layout as BetaMatrix.
using PowerMatrix = Matrix<double>;

} // namespace mimo_pilot

#endif
