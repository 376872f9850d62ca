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

/**
 * @file measurements.hpp
 * Local measurement operator sets o^(k) acting on the first D wires, with
 * their orthogonality constant B (Tr(o_k o_k') = B delta_kk') and norm
 * bound C2 = max_k ||o_k||.
 */

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "linalg.hpp"

namespace qcrisk {

namespace detail {

[[nodiscard]] inline RMatrix operator_gram(const std::vector<CMatrix> &ops) {
    const auto k = static_cast<Eigen::Index>(ops.size());
    RMatrix g(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
        for (Eigen::Index j = 0; j < k; ++j) {
            g(i, j) = trace_product(ops[static_cast<std::size_t>(i)], ops[static_cast<std::size_t>(j)]).real();
        }
    }
    return g;
}

/// B when the Gram matrix is a constant multiple of the identity.
[[nodiscard]] inline std::optional<double> fit_ortho_constant(const RMatrix &gram, double tol = 1e-9) {
    if (gram.rows() == 0) {
        return std::nullopt;
    }
    const double b = gram(0, 0);
    for (Eigen::Index i = 0; i < gram.rows(); ++i) {
        for (Eigen::Index j = 0; j < gram.cols(); ++j) {
            const double expected = (i == j) ? b : 0.0;
            if (std::abs(gram(i, j) - expected) > tol) {
                return std::nullopt;
            }
        }
    }
    return b;
}

} // namespace detail

struct MeasurementSet {
    std::string name;
    std::size_t d_qubits = 0;
    std::vector<CMatrix> operators;
    std::optional<double> ortho_constant; // B, absent when the set is not orthogonal
    double norm_bound = 0.0;              // C2
    std::vector<RVector> frame_vectors;   // columns the operators were built from, if any

    [[nodiscard]] std::size_t size() const noexcept { return operators.size(); }
    [[nodiscard]] std::size_t dim() const noexcept { return pow2(d_qubits); }

    /// Builds a set and measures B and C2 from the operators themselves.
    [[nodiscard]] static MeasurementSet from_operators(std::string name, std::size_t d_qubits,
                                                       std::vector<CMatrix> ops,
                                                       std::vector<RVector> frames = {}) {
        const auto dim = static_cast<Eigen::Index>(pow2(d_qubits));
        if (ops.empty()) {
            throw DomainError("measurement set needs at least one operator");
        }
        double c2 = 0.0;
        for (const auto &o : ops) {
            if (o.rows() != dim || o.cols() != dim) {
                throw DimensionError("operator is not " + std::to_string(dim) + "x" + std::to_string(dim));
            }
            if (hermiticity_residual(o) > 1e-10) {
                throw DomainError("measurement operator is not Hermitian");
            }
            c2 = std::max(c2, spectral_norm(o));
        }
        MeasurementSet ms;
        ms.name = std::move(name);
        ms.d_qubits = d_qubits;
        ms.ortho_constant = detail::fit_ortho_constant(detail::operator_gram(ops));
        ms.norm_bound = c2;
        ms.operators = std::move(ops);
        ms.frame_vectors = std::move(frames);
        return ms;
    }

    /// Every operator multiplied by `factor`.
    [[nodiscard]] MeasurementSet scaled(double factor) const {
        std::vector<CMatrix> ops;
        ops.reserve(operators.size());
        for (const auto &o : operators) {
            ops.push_back(factor * o);
        }
        return from_operators(name, d_qubits, std::move(ops), frame_vectors);
    }
};

/// K computational-basis projectors |k><k| on D qubits.
[[nodiscard]] inline MeasurementSet basis_measurements(std::size_t k, std::size_t d) {
    if (k < 1 || pow2(d) < k) {
        throw DomainError("basis measurements need 1 <= K <= 2^D");
    }
    std::vector<CMatrix> ops;
    const auto dim = static_cast<Eigen::Index>(pow2(d));
    for (std::size_t i = 0; i < k; ++i) {
        CMatrix p = CMatrix::Zero(dim, dim);
        p(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = 1.0;
        ops.push_back(std::move(p));
    }
    return MeasurementSet::from_operators("basis", d, std::move(ops));
}

/// The nine two-qubit Pauli products P_a (x) P_b, a, b in {X, Y, Z}, in the
/// order XX, XY, XZ, YX, ..., ZZ. Only the local D = 2 part is stored; on a
/// wider register it acts on the two leading wires.
[[nodiscard]] inline MeasurementSet pauli_measurements() {
    const CMatrix p[3] = {pauli::x(), pauli::y(), pauli::z()};
    std::vector<CMatrix> ops;
    for (const auto &a : p) {
        for (const auto &b : p) {
            ops.push_back(kron(a, b));
        }
    }
    return MeasurementSet::from_operators("pauli", 2, std::move(ops));
}

/// Columns of the standard simplex ETF sqrt(K/(K-1)) (I - 11^T/K), embedded in
/// R^(2^D) by the first K columns of the identity.
[[nodiscard]] inline std::vector<RVector> simplex_etf_columns(std::size_t k, std::size_t d) {
    if (k < 2 || pow2(d) < k) {
        throw DomainError("simplex ETF needs 2 <= K <= 2^D");
    }
    const auto kk = static_cast<Eigen::Index>(k);
    const double kd = static_cast<double>(k);
    const RMatrix m = std::sqrt(kd / (kd - 1.0)) * (RMatrix::Identity(kk, kk) - RMatrix::Constant(kk, kk, 1.0 / kd));
    std::vector<RVector> cols;
    for (Eigen::Index j = 0; j < kk; ++j) {
        RVector v = RVector::Zero(static_cast<Eigen::Index>(pow2(d)));
        v.head(kk) = m.col(j);
        cols.push_back(std::move(v));
    }
    return cols;
}

/// Rank-one operators v_k v_k^T from the embedded simplex ETF columns.
[[nodiscard]] inline MeasurementSet simplex_etf_operators(std::size_t k, std::size_t d) {
    auto cols = simplex_etf_columns(k, d);
    std::vector<CMatrix> ops;
    for (const auto &v : cols) {
        const CVector c = v.cast<Complex>();
        ops.push_back(c * c.adjoint());
    }
    return MeasurementSet::from_operators("simplex_etf", d, std::move(ops), std::move(cols));
}

/// Tetrahedral qubit SIC-POVM: o_k = (I + n_k . sigma) / 4.
[[nodiscard]] inline MeasurementSet qubit_sic_povm() {
    const double s2 = std::sqrt(2.0);
    const double bloch[4][3] = {{0.0, 0.0, 1.0},
                                {2.0 * s2 / 3.0, 0.0, -1.0 / 3.0},
                                {-s2 / 3.0, std::sqrt(2.0 / 3.0), -1.0 / 3.0},
                                {-s2 / 3.0, -std::sqrt(2.0 / 3.0), -1.0 / 3.0}};
    std::vector<CMatrix> ops;
    for (const auto &n : bloch) {
        ops.push_back(0.25 * (pauli::identity() + n[0] * pauli::x() + n[1] * pauli::y() + n[2] * pauli::z()));
    }
    return MeasurementSet::from_operators("sic_povm", 1, std::move(ops));
}

/// Pure states |psi_k> whose scaled projectors make up the SIC-POVM.
[[nodiscard]] inline std::vector<CVector> sic_povm_states() {
    std::vector<CVector> states;
    for (const auto &o : qubit_sic_povm().operators) {
        Eigen::SelfAdjointEigenSolver<CMatrix> eig(o);
        states.push_back(eig.eigenvectors().col(1));
    }
    return states;
}

struct ValidationReport {
    std::vector<double> hermiticity_residuals;
    RMatrix gram;
    std::optional<double> fitted_b;
    double norm_bound = 0.0;
    std::size_t span_rank = 0;
    std::size_t full_dimension = 0; // 4^D
    bool hermitian = false;
    bool orthogonal = false;
    bool spans_full_space = false;
    bool passed = false; // Hermitian, orthogonal and B >= 1
};

[[nodiscard]] inline ValidationReport validate_set(const MeasurementSet &ms) {
    ValidationReport r;
    r.hermitian = true;
    for (const auto &o : ms.operators) {
        const double res = hermiticity_residual(o);
        r.hermiticity_residuals.push_back(res);
        r.hermitian = r.hermitian && res < 1e-10;
        r.norm_bound = std::max(r.norm_bound, spectral_norm(o));
    }
    r.gram = detail::operator_gram(ms.operators);
    r.fitted_b = detail::fit_ortho_constant(r.gram);
    r.orthogonal = r.fitted_b.has_value() && *r.fitted_b > 1e-12;

    const auto dim2 = static_cast<Eigen::Index>(ms.dim() * ms.dim());
    CMatrix vec(static_cast<Eigen::Index>(ms.size()), dim2);
    for (std::size_t k = 0; k < ms.size(); ++k) {
        vec.row(static_cast<Eigen::Index>(k)) = ms.operators[k].reshaped<Eigen::RowMajor>().transpose();
    }
    Eigen::ColPivHouseholderQR<CMatrix> qr(vec);
    qr.setThreshold(1e-10);
    r.span_rank = static_cast<std::size_t>(qr.rank());
    r.full_dimension = static_cast<std::size_t>(dim2);
    r.spans_full_space = r.span_rank == r.full_dimension;
    r.passed = r.hermitian && r.orthogonal && *r.fitted_b >= 1.0 - 1e-9;
    return r;
}

// ---------------------------------------------------------------------------
// JSON

namespace detail {

[[nodiscard]] inline nlohmann::json matrix_to_json(const CMatrix &m) {
    nlohmann::json re = nlohmann::json::array();
    nlohmann::json im = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        nlohmann::json rr = nlohmann::json::array();
        nlohmann::json ri = nlohmann::json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            rr.push_back(m(i, j).real());
            ri.push_back(m(i, j).imag());
        }
        re.push_back(std::move(rr));
        im.push_back(std::move(ri));
    }
    return {{"re", std::move(re)}, {"im", std::move(im)}};
}

[[nodiscard]] inline CMatrix matrix_from_json(const nlohmann::json &j) {
    const auto &re = j.at("re");
    const auto &im = j.at("im");
    const auto rows = static_cast<Eigen::Index>(re.size());
    const auto cols = rows == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(re.at(0).size());
    if (static_cast<Eigen::Index>(im.size()) != rows) {
        throw DimensionError("real and imaginary parts differ in shape");
    }
    CMatrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const auto &ri = re.at(static_cast<std::size_t>(i));
        const auto &ii = im.at(static_cast<std::size_t>(i));
        if (static_cast<Eigen::Index>(ri.size()) != cols || static_cast<Eigen::Index>(ii.size()) != cols) {
            throw DimensionError("ragged matrix in JSON");
        }
        for (Eigen::Index c = 0; c < cols; ++c) {
            m(i, c) = Complex(ri.at(static_cast<std::size_t>(c)).get<double>(), ii.at(static_cast<std::size_t>(c)).get<double>());
        }
    }
    return m;
}

} // namespace detail

inline void to_json(nlohmann::json &j, const MeasurementSet &ms) {
    j = nlohmann::json{{"name", ms.name}, {"d_qubits", ms.d_qubits}, {"norm_bound", ms.norm_bound}};
    j["ortho_constant"] = ms.ortho_constant ? nlohmann::json(*ms.ortho_constant) : nlohmann::json(nullptr);
    j["operators"] = nlohmann::json::array();
    for (const auto &o : ms.operators) {
        j["operators"].push_back(detail::matrix_to_json(o));
    }
}

inline void from_json(const nlohmann::json &j, MeasurementSet &ms) {
    std::vector<CMatrix> ops;
    for (const auto &o : j.at("operators")) {
        ops.push_back(detail::matrix_from_json(o));
    }
    ms = MeasurementSet::from_operators(j.at("name").get<std::string>(), j.at("d_qubits").get<std::size_t>(),
                                        std::move(ops));
}

} // namespace qcrisk
