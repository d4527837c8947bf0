// Copyright 2026 The esbench Authors
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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>

namespace esb::kernels {

// Row-major dense kernels shared by the in-path networks and the micro
// benchmark runner.

/// out(m×n) = x(m×k) · w(k×n) [+ bias(n) broadcast over rows].
template <typename T>
void dense(std::span<const T> x, std::span<const T> w, std::span<const T> bias, std::span<T> out,
           std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    T* row = out.data() + i * n;
    if (bias.empty()) {
      std::fill(row, row + n, T(0));
    } else {
      std::copy(bias.begin(), bias.begin() + n, row);
    }
    const T* xi = x.data() + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const T a = xi[p];
      const T* wp = w.data() + p * n;
      for (std::size_t j = 0; j < n; ++j) row[j] += a * wp[j];
    }
  }
}

template <typename T>
void relu(std::span<T> values) {
  for (T& v : values) v = v > T(0) ? v : T(0);
}

template <typename T>
void sigmoid(std::span<T> values) {
  for (T& v : values) v = T(1) / (T(1) + std::exp(-v));
}

/// Numerically stable softmax over each row of a rows×cols matrix.
template <typename T>
void softmax_rows(std::span<T> values, std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    T* row = values.data() + r * cols;
    const T peak = *std::max_element(row, row + cols);
    T total = 0;
    for (std::size_t c = 0; c < cols; ++c) {
      row[c] = std::exp(row[c] - peak);
      total += row[c];
    }
    for (std::size_t c = 0; c < cols; ++c) row[c] /= total;
  }
}

template <typename T>
void elementwise_multiply(std::span<const T> a, std::span<const T> b, std::span<T> out) {
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * b[i];
}

}  // namespace esb::kernels
