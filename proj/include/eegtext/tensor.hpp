// Copyright 2026 The eegtext Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "eegtext/common.hpp"

namespace eegtext {

template <typename S>
using ArrayX = Eigen::Array<S, Eigen::Dynamic, 1>;

template <typename S>
using MatrixRM = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Dense n-d array in C order over a flat Eigen array. Matrix views over the
/// flat storage keep all heavy lifting inside Eigen expressions.
template <typename S>
struct Tensor {
  std::vector<Index> shape;
  ArrayX<S> data;

  Tensor() = default;
  explicit Tensor(std::vector<Index> shp) : shape(std::move(shp)) {
    data = ArrayX<S>::Zero(numel_of(shape));
  }

  static Index numel_of(const std::vector<Index>& shp) {
    Index n = 1;
    for (Index d : shp) {
      if (d < 0) throw std::invalid_argument("Tensor: negative dimension");
      n *= d;
    }
    return n;
  }

  Index numel() const { return data.size(); }
  Index rank() const { return static_cast<Index>(shape.size()); }
  Index dim(Index i) const { return shape.at(static_cast<std::size_t>(i)); }

  /// View of the flat storage as a row-major [rows, cols] matrix.
  Eigen::Map<MatrixRM<S>> mat(Index rows, Index cols) {
    if (rows * cols != numel()) throw std::invalid_argument("Tensor::mat: size mismatch");
    return Eigen::Map<MatrixRM<S>>(data.data(), rows, cols);
  }
  Eigen::Map<const MatrixRM<S>> mat(Index rows, Index cols) const {
    if (rows * cols != numel()) throw std::invalid_argument("Tensor::mat: size mismatch");
    return Eigen::Map<const MatrixRM<S>>(data.data(), rows, cols);
  }

  /// Matrix view with the trailing dimension as columns (e.g. [B,T,d] as
  /// a (B*T, d) matrix).
  Eigen::Map<MatrixRM<S>> rows_by_last() { return mat(numel() / last(), last()); }
  Eigen::Map<const MatrixRM<S>> rows_by_last() const { return mat(numel() / last(), last()); }

  Index last() const {
    if (shape.empty()) throw std::invalid_argument("Tensor: rank 0 has no last dim");
    return shape.back();
  }

  S& at3(Index i, Index j, Index k) {
    return data[(i * shape[1] + j) * shape[2] + k];
  }
  S at3(Index i, Index j, Index k) const {
    return data[(i * shape[1] + j) * shape[2] + k];
  }

  /// Swaps the last two axes of a rank-3 tensor.
  Tensor transpose12() const {
    if (rank() != 3) throw std::invalid_argument("transpose12: rank-3 tensors only");
    Tensor out({shape[0], shape[2], shape[1]});
    for (Index b = 0; b < shape[0]; ++b)
      out.mat(shape[0] * shape[2], shape[1]).middleRows(b * shape[2], shape[2]) =
          mat(shape[0] * shape[1], shape[2]).middleRows(b * shape[1], shape[1]).transpose();
    return out;
  }

  bool same_shape(const Tensor& other) const { return shape == other.shape; }
};

template <typename S>
Tensor<S> tensor_like(const Tensor<S>& t) {
  return Tensor<S>(t.shape);
}

/// A named parameter (or non-trainable buffer) with its gradient.
template <typename S>
struct Param {
  std::string name;
  std::vector<Index> shape;
  ArrayX<S> value;
  ArrayX<S> grad;
  bool trainable = true;

  Param(std::string n, std::vector<Index> shp, bool train = true)
      : name(std::move(n)), shape(std::move(shp)), trainable(train) {
    const Index sz = Tensor<S>::numel_of(shape);
    value = ArrayX<S>::Zero(sz);
    grad = ArrayX<S>::Zero(sz);
  }

  Index size() const { return value.size(); }

  Eigen::Map<MatrixRM<S>> mat(Index rows, Index cols) {
    if (rows * cols != size()) throw std::invalid_argument("Param::mat: size mismatch");
    return Eigen::Map<MatrixRM<S>>(value.data(), rows, cols);
  }
  Eigen::Map<const MatrixRM<S>> mat(Index rows, Index cols) const {
    if (rows * cols != size()) throw std::invalid_argument("Param::mat: size mismatch");
    return Eigen::Map<const MatrixRM<S>>(value.data(), rows, cols);
  }
  Eigen::Map<MatrixRM<S>> grad_mat(Index rows, Index cols) {
    if (rows * cols != size()) throw std::invalid_argument("Param::grad_mat: size mismatch");
    return Eigen::Map<MatrixRM<S>>(grad.data(), rows, cols);
  }
};

}  // namespace eegtext
