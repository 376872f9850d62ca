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

// Independent reference implementations used as oracles by the unit tests.
// Nothing here reuses the in-place kernels of the library.

#include <random>
#include <vector>

#include "qcrisk/linalg.hpp"

namespace oracle {

using qcrisk::CMatrix;
using qcrisk::CVector;
using qcrisk::Complex;

inline CMatrix rotation(const CMatrix &pauli, double angle) {
    return std::cos(angle / 2.0) * CMatrix::Identity(2, 2) - Complex(0.0, std::sin(angle / 2.0)) * pauli;
}

/// `g` on wire q of n, wire 0 being the most significant bit.
inline CMatrix on_wire(const CMatrix &g, std::size_t q, std::size_t n) {
    CMatrix out = CMatrix::Identity(1, 1);
    for (std::size_t w = 0; w < n; ++w) {
        out = qcrisk::kron(out, w == q ? g : CMatrix::Identity(2, 2));
    }
    return out;
}

inline CMatrix cnot(std::size_t c, std::size_t t, std::size_t n) {
    const std::size_t dim = std::size_t{1} << n;
    CMatrix m = CMatrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (std::size_t v = 0; v < dim; ++v) {
        const bool ctrl = (v >> (n - 1 - c)) & 1U;
        const std::size_t out = ctrl ? v ^ (std::size_t{1} << (n - 1 - t)) : v;
        m(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(v)) = 1.0;
    }
    return m;
}

/// Full unitary of the layered ansatz, built gate by gate.
inline CMatrix ansatz_unitary(std::size_t n, std::size_t layers, const std::vector<double> &theta) {
    const std::size_t dim = std::size_t{1} << n;
    CMatrix u = CMatrix::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    std::size_t p = 0;
    for (std::size_t l = 0; l < layers; ++l) {
        for (std::size_t i = 0; i < n; ++i) {
            u = on_wire(rotation(qcrisk::pauli::z(), theta[p++]), i, n) * u;
            u = on_wire(rotation(qcrisk::pauli::y(), theta[p++]), i, n) * u;
            u = on_wire(rotation(qcrisk::pauli::z(), theta[p++]), i, n) * u;
        }
        if (n > 1) {
            for (std::size_t i = 0; i < n; ++i) {
                u = cnot(i, (i + 1) % n, n) * u;
            }
        }
    }
    return u;
}

/// Partial trace by explicit index sums, keeping the first d wires.
inline CMatrix reduce(const CVector &psi, std::size_t n, std::size_t d) {
    const std::size_t kept = std::size_t{1} << d;
    const std::size_t rest = std::size_t{1} << (n - d);
    CMatrix rho = CMatrix::Zero(static_cast<Eigen::Index>(kept), static_cast<Eigen::Index>(kept));
    for (std::size_t a = 0; a < kept; ++a) {
        for (std::size_t b = 0; b < kept; ++b) {
            Complex s = 0.0;
            for (std::size_t e = 0; e < rest; ++e) {
                s += psi(static_cast<Eigen::Index>(a * rest + e)) * std::conj(psi(static_cast<Eigen::Index>(b * rest + e)));
            }
            rho(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = s;
        }
    }
    return rho;
}

inline std::vector<double> random_angles(std::size_t count, std::mt19937_64 &rng) {
    std::uniform_real_distribution<double> u(-qcrisk::kPi, qcrisk::kPi);
    std::vector<double> v(count);
    for (auto &x : v) {
        x = u(rng);
    }
    return v;
}

inline CMatrix random_matrix(std::size_t d, std::mt19937_64 &rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    CMatrix m(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            m(i, j) = Complex(g(rng), g(rng));
        }
    }
    return m;
}

inline CMatrix random_hermitian(std::size_t d, std::mt19937_64 &rng) {
    const CMatrix m = random_matrix(d, rng);
    return 0.5 * (m + m.adjoint());
}

inline CVector random_state(std::size_t dim, std::mt19937_64 &rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    CVector v(static_cast<Eigen::Index>(dim));
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        v(i) = Complex(g(rng), g(rng));
    }
    return v / v.norm();
}

inline double max_abs(const CMatrix &m) { return m.cwiseAbs().maxCoeff(); }

} // namespace oracle
