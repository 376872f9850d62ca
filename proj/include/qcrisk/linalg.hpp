// Copyright 2026 The qcrisk Authors
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

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "error.hpp"

namespace qcrisk {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;

[[nodiscard]] inline constexpr std::size_t pow2(std::size_t n) { return std::size_t{1} << n; }

[[nodiscard]] inline constexpr bool is_power_of_two(std::size_t n) {
    return n != 0 && (n & (n - 1)) == 0;
}

[[nodiscard]] inline std::size_t log2_exact(std::size_t n) {
    if (!is_power_of_two(n)) {
        throw DimensionError("length " + std::to_string(n) + " is not a power of two");
    }
    std::size_t k = 0;
    while ((std::size_t{1} << k) < n) {
        ++k;
    }
    return k;
}

/// Largest absolute entry of M - M^dagger.
[[nodiscard]] inline double hermiticity_residual(const CMatrix &m) {
    if (m.rows() != m.cols()) {
        throw DimensionError("matrix is not square");
    }
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

/// Tr(A B) without forming the product.
[[nodiscard]] inline Complex trace_product(const CMatrix &a, const CMatrix &b) {
    return (a.transpose().cwiseProduct(b)).sum();
}

[[nodiscard]] inline double frobenius_distance(const CMatrix &a, const CMatrix &b) {
    return (a - b).norm();
}

/// Largest singular value.
[[nodiscard]] inline double spectral_norm(const CMatrix &m) {
    if (m.size() == 0) {
        return 0.0;
    }
    Eigen::JacobiSVD<CMatrix> svd(m);
    return svd.singularValues()(0);
}

/// Kronecker product, first factor acting on the most significant index bits.
[[nodiscard]] inline CMatrix kron(const CMatrix &a, const CMatrix &b) {
    CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

namespace pauli {

[[nodiscard]] inline CMatrix identity() { return CMatrix::Identity(2, 2); }

[[nodiscard]] inline CMatrix x() {
    CMatrix m(2, 2);
    m << 0.0, 1.0, 1.0, 0.0;
    return m;
}

[[nodiscard]] inline CMatrix y() {
    CMatrix m(2, 2);
    m << 0.0, Complex(0.0, -1.0), Complex(0.0, 1.0), 0.0;
    return m;
}

[[nodiscard]] inline CMatrix z() {
    CMatrix m(2, 2);
    m << 1.0, 0.0, 0.0, -1.0;
    return m;
}

} // namespace pauli

/// SplitMix64 finaliser, used to derive independent per-trial seeds.
[[nodiscard]] inline constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

} // namespace qcrisk
