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
 * @file quantum_core.hpp
 * Statevector simulation of the classifier circuits: single-qubit rotations,
 * CNOT, basis and amplitude encoders, the layered hardware-efficient ansatz,
 * reduction to feature states and Haar-random unitaries.
 *
 * Wire 0 is the most significant bit of a basis index, so the bitstring
 * "011" encodes to index 3 and the retained wires of a partial trace are the
 * leading bits of the index.
 */

#include <algorithm>
#include <array>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "linalg.hpp"

namespace qcrisk {

enum class Axis { X, Y, Z };

/// Classical bitstring, one entry (0 or 1) per wire.
using Bits = std::vector<std::uint8_t>;

/// Raw input of a classifier: a bitstring for basis encoding or a unit
/// vector for amplitude encoding.
using EncoderInput = std::variant<Bits, RVector>;

/// Pure N-qubit state. Always holds exactly 2^N amplitudes of unit norm.
class StateVector {
  public:
    /// |0...0> on `n_qubits` wires.
    explicit StateVector(std::size_t n_qubits) : n_qubits_(n_qubits), amps_(CVector::Zero(pow2(n_qubits))) {
        amps_(0) = 1.0;
    }

    /// Throws DimensionError unless the length is a power of two and
    /// DomainError unless the norm is one within `tol`.
    explicit StateVector(CVector amplitudes, double tol = 1e-9)
        : n_qubits_(log2_exact(static_cast<std::size_t>(amplitudes.size()))), amps_(std::move(amplitudes)) {
        const double norm2 = amps_.squaredNorm();
        if (std::abs(norm2 - 1.0) > tol) {
            throw DomainError("state amplitudes have squared norm " + std::to_string(norm2));
        }
    }

    [[nodiscard]] std::size_t n_qubits() const noexcept { return n_qubits_; }
    [[nodiscard]] std::size_t dim() const noexcept { return static_cast<std::size_t>(amps_.size()); }
    [[nodiscard]] const CVector &amplitudes() const noexcept { return amps_; }
    [[nodiscard]] Complex operator[](std::size_t i) const { return amps_(static_cast<Eigen::Index>(i)); }
    [[nodiscard]] double norm_squared() const { return amps_.squaredNorm(); }

    /// |<this|other>|^2, insensitive to global phase.
    [[nodiscard]] double fidelity(const StateVector &other) const {
        if (other.dim() != dim()) {
            throw DimensionError("fidelity between states of different size");
        }
        return std::norm(amps_.dot(other.amps_));
    }

    // In-place kernels. The free functions below are the value-semantics API.
    void rotate(Axis axis, std::size_t qubit, double angle);
    void cnot(std::size_t control, std::size_t target);

  private:
    void check_wire(std::size_t q) const {
        if (q >= n_qubits_) {
            throw IndexError("qubit " + std::to_string(q) + " out of range for " + std::to_string(n_qubits_) +
                             " qubits");
        }
    }

    std::size_t n_qubits_;
    CVector amps_;
};

inline void StateVector::rotate(Axis axis, std::size_t qubit, double angle) {
    check_wire(qubit);
    const std::size_t stride = pow2(n_qubits_ - 1 - qubit);
    const std::size_t n = dim();
    const double c = std::cos(angle / 2.0);
    const double s = std::sin(angle / 2.0);
    Complex *a = amps_.data();
    switch (axis) {
    case Axis::Z: {
        const Complex lo(c, -s);
        const Complex hi(c, s);
        for (std::size_t base = 0; base < n; base += 2 * stride) {
            for (std::size_t i = base; i < base + stride; ++i) {
                a[i] *= lo;
                a[i + stride] *= hi;
            }
        }
        break;
    }
    case Axis::Y:
        for (std::size_t base = 0; base < n; base += 2 * stride) {
            for (std::size_t i = base; i < base + stride; ++i) {
                const Complex v0 = a[i];
                const Complex v1 = a[i + stride];
                a[i] = c * v0 - s * v1;
                a[i + stride] = s * v0 + c * v1;
            }
        }
        break;
    case Axis::X: {
        const Complex mis(0.0, -s);
        for (std::size_t base = 0; base < n; base += 2 * stride) {
            for (std::size_t i = base; i < base + stride; ++i) {
                const Complex v0 = a[i];
                const Complex v1 = a[i + stride];
                a[i] = c * v0 + mis * v1;
                a[i + stride] = mis * v0 + c * v1;
            }
        }
        break;
    }
    }
}

inline void StateVector::cnot(std::size_t control, std::size_t target) {
    check_wire(control);
    check_wire(target);
    if (control == target) {
        throw DomainError("CNOT control and target must differ");
    }
    const std::size_t cmask = pow2(n_qubits_ - 1 - control);
    const std::size_t tmask = pow2(n_qubits_ - 1 - target);
    Complex *a = amps_.data();
    for (std::size_t i = 0; i < dim(); ++i) {
        if ((i & cmask) != 0 && (i & tmask) == 0) {
            std::swap(a[i], a[i | tmask]);
        }
    }
}

/// exp(-i angle P / 2) on `qubit`.
[[nodiscard]] inline StateVector apply_rotation(StateVector state, Axis axis, std::size_t qubit, double angle) {
    state.rotate(axis, qubit, angle);
    return state;
}

[[nodiscard]] inline StateVector apply_cnot(StateVector state, std::size_t control, std::size_t target) {
    state.cnot(control, target);
    return state;
}

// ---------------------------------------------------------------------------
// Encoders

enum class EncoderKind { basis, amplitude };

/// Encoding circuit description. The gate counts feed the generalization
/// bound only; the amplitude encoder is realised by direct assignment.
struct EncoderSpec {
    EncoderKind kind = EncoderKind::basis;
    std::size_t n_qubits = 0;
    std::size_t total_gates = 0;   // N_g
    std::size_t tunable_gates = 0; // N_ge
    std::size_t max_arity = 1;     // m

    /// One data-dependent X slot per wire.
    [[nodiscard]] static EncoderSpec basis(std::size_t n) { return {EncoderKind::basis, n, n, n, 1}; }

    [[nodiscard]] static EncoderSpec amplitude(std::size_t n, std::size_t total_gates, std::size_t tunable_gates,
                                               std::size_t max_arity) {
        return {EncoderKind::amplitude, n, total_gates, tunable_gates, max_arity};
    }
};

[[nodiscard]] inline StateVector encode_basis(const Bits &bits) {
    if (bits.empty()) {
        throw DimensionError("empty bitstring");
    }
    std::size_t index = 0;
    for (auto b : bits) {
        if (b > 1) {
            throw DomainError("bitstring entries must be 0 or 1");
        }
        index = (index << 1) | b;
    }
    CVector amps = CVector::Zero(static_cast<Eigen::Index>(pow2(bits.size())));
    amps(static_cast<Eigen::Index>(index)) = 1.0;
    return StateVector(std::move(amps));
}

[[nodiscard]] inline StateVector encode_amplitude(const RVector &x) {
    if (!is_power_of_two(static_cast<std::size_t>(x.size()))) {
        throw DimensionError("amplitude input length " + std::to_string(x.size()) + " is not a power of two");
    }
    const double n2 = x.squaredNorm();
    if (std::abs(std::sqrt(n2) - 1.0) > 1e-9) {
        throw DomainError("amplitude input has norm " + std::to_string(std::sqrt(n2)));
    }
    return StateVector(CVector(x.cast<Complex>()));
}

/// U_E(x)|0...0>.
[[nodiscard]] inline StateVector encode(const EncoderSpec &enc, const EncoderInput &x) {
    if (enc.kind == EncoderKind::basis) {
        const auto *bits = std::get_if<Bits>(&x);
        if (bits == nullptr) {
            throw DomainError("basis encoder expects a bitstring");
        }
        if (bits->size() != enc.n_qubits) {
            throw DimensionError("bitstring length " + std::to_string(bits->size()) + " != " +
                                 std::to_string(enc.n_qubits) + " qubits");
        }
        return encode_basis(*bits);
    }
    const auto *vec = std::get_if<RVector>(&x);
    if (vec == nullptr) {
        throw DomainError("amplitude encoder expects a real vector");
    }
    if (static_cast<std::size_t>(vec->size()) != pow2(enc.n_qubits)) {
        throw DimensionError("amplitude input length " + std::to_string(vec->size()) + " != 2^" +
                             std::to_string(enc.n_qubits));
    }
    return encode_amplitude(*vec);
}

// ---------------------------------------------------------------------------
// Hardware-efficient ansatz

/// L layers of per-qubit RZ, RY, RZ followed by a CNOT ring i -> (i+1) mod N.
/// Parameter (layer l, wire i, slot r) lives at index 3 (l N + i) + r.
struct AnsatzSpec {
    std::size_t n_qubits = 0;
    std::size_t n_layers = 0;
    RVector params;

    AnsatzSpec() = default;
    AnsatzSpec(std::size_t n, std::size_t layers, RVector theta)
        : n_qubits(n), n_layers(layers), params(std::move(theta)) {
        check();
    }
    AnsatzSpec(std::size_t n, std::size_t layers) : AnsatzSpec(n, layers, RVector::Zero(static_cast<Eigen::Index>(3 * n * layers))) {}

    [[nodiscard]] static std::size_t parameter_count(std::size_t n, std::size_t layers) { return 3 * n * layers; }
    [[nodiscard]] std::size_t parameter_count() const { return parameter_count(n_qubits, n_layers); }

    [[nodiscard]] static std::size_t index(std::size_t n, std::size_t layer, std::size_t wire, std::size_t slot) {
        return 3 * (layer * n + wire) + slot;
    }

    void check() const {
        if (static_cast<std::size_t>(params.size()) != parameter_count()) {
            throw DimensionError("ansatz expects " + std::to_string(parameter_count()) + " parameters, got " +
                                 std::to_string(params.size()));
        }
    }
};

/// Number of layers realising `n_params` on `n_qubits` wires.
[[nodiscard]] inline std::size_t layers_for_parameter_count(std::size_t n_params, std::size_t n_qubits) {
    if (n_qubits == 0 || n_params == 0 || n_params % (3 * n_qubits) != 0) {
        throw DomainError("parameter count " + std::to_string(n_params) + " is not a positive multiple of 3*" +
                          std::to_string(n_qubits));
    }
    return n_params / (3 * n_qubits);
}

/// Runs the ansatz on `state` in place with an explicit parameter vector.
inline void run_ansatz(StateVector &state, std::size_t n_layers, std::span<const double> theta) {
    const std::size_t n = state.n_qubits();
    if (theta.size() != AnsatzSpec::parameter_count(n, n_layers)) {
        throw DimensionError("ansatz parameter vector has wrong length");
    }
    static constexpr Axis kSlots[3] = {Axis::Z, Axis::Y, Axis::Z};
    for (std::size_t l = 0; l < n_layers; ++l) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t r = 0; r < 3; ++r) {
                state.rotate(kSlots[r], i, theta[AnsatzSpec::index(n, l, i, r)]);
            }
        }
        if (n > 1) {
            for (std::size_t i = 0; i < n; ++i) {
                state.cnot(i, (i + 1) % n);
            }
        }
    }
}

[[nodiscard]] inline StateVector apply_ansatz(StateVector state, const AnsatzSpec &ansatz) {
    ansatz.check();
    if (ansatz.n_qubits != state.n_qubits()) {
        throw DimensionError("ansatz acts on " + std::to_string(ansatz.n_qubits) + " qubits, state has " +
                             std::to_string(state.n_qubits()));
    }
    run_ansatz(state, ansatz.n_layers, std::span<const double>(ansatz.params.data(), ansatz.params.size()));
    return state;
}

// ---------------------------------------------------------------------------
// Feature states

/// Reduced density matrix on D qubits. Hermitian, unit trace, PSD.
class FeatureState {
  public:
    /// Validates the invariants; throws DomainError on violation.
    explicit FeatureState(CMatrix rho) : FeatureState(std::move(rho), Checked{}) {}

    [[nodiscard]] std::size_t d_qubits() const noexcept { return d_qubits_; }
    [[nodiscard]] std::size_t dim() const noexcept { return static_cast<std::size_t>(rho_.rows()); }
    [[nodiscard]] const CMatrix &matrix() const noexcept { return rho_; }
    [[nodiscard]] double purity() const { return trace_product(rho_, rho_).real(); }

    /// Skips the eigenvalue check; for matrices produced by a partial trace.
    [[nodiscard]] static FeatureState trusted(CMatrix rho) { return FeatureState(std::move(rho), Trusted{}); }

  private:
    struct Checked {};
    struct Trusted {};

    FeatureState(CMatrix rho, Trusted) : d_qubits_(log2_exact(static_cast<std::size_t>(rho.rows()))), rho_(std::move(rho)) {}

    FeatureState(CMatrix rho, Checked) : FeatureState(std::move(rho), Trusted{}) {
        if (rho_.rows() != rho_.cols()) {
            throw DimensionError("feature state must be square");
        }
        if (hermiticity_residual(rho_) > 1e-10) {
            throw DomainError("feature state is not Hermitian");
        }
        if (std::abs(rho_.trace().real() - 1.0) > 1e-10) {
            throw DomainError("feature state trace is not one");
        }
        Eigen::SelfAdjointEigenSolver<CMatrix> eig(rho_, Eigen::EigenvaluesOnly);
        if (eig.eigenvalues().minCoeff() < -1e-9) {
            throw DomainError("feature state is not positive semidefinite");
        }
    }

    std::size_t d_qubits_;
    CMatrix rho_;
};

/// Partial trace over all wires except the first `d_keep`.
[[nodiscard]] inline CMatrix reduce_to_leading(const CVector &amps, std::size_t n_qubits, std::size_t d_keep) {
    if (d_keep < 1 || d_keep > n_qubits) {
        throw DomainError("retained qubit count " + std::to_string(d_keep) + " outside [1, " +
                          std::to_string(n_qubits) + "]");
    }
    const auto kept = static_cast<Eigen::Index>(pow2(d_keep));
    const auto rest = static_cast<Eigen::Index>(pow2(n_qubits - d_keep));
    // Rows of `block` are retained indices, columns the traced-out environment.
    const Eigen::Map<const Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> block(
        amps.data(), kept, rest);
    return block * block.adjoint();
}

[[nodiscard]] inline FeatureState feature_state(const StateVector &state, std::size_t d_keep) {
    return FeatureState::trusted(reduce_to_leading(state.amplitudes(), state.n_qubits(), d_keep));
}

/// Tr(rho o) for Hermitian `o`; the imaginary residue is checked and dropped.
[[nodiscard]] inline double expectation(const CMatrix &rho, const CMatrix &o) {
    if (rho.rows() != o.rows() || rho.cols() != o.cols() || o.rows() != o.cols()) {
        throw DimensionError("operator and state dimensions differ");
    }
    if (hermiticity_residual(o) > 1e-10) {
        throw DomainError("measurement operator is not Hermitian");
    }
    const Complex v = trace_product(rho, o);
    if (std::abs(v.imag()) > 1e-10) {
        throw DomainError("expectation has imaginary part " + std::to_string(v.imag()));
    }
    return v.real();
}

[[nodiscard]] inline double expectation(const FeatureState &rho, const CMatrix &o) { return expectation(rho.matrix(), o); }

/// Bloch vector (<X>, <Y>, <Z>) of a single-qubit density matrix.
[[nodiscard]] inline std::array<double, 3> bloch_vector(const CMatrix &rho) {
    if (rho.rows() != 2 || rho.cols() != 2) {
        throw DimensionError("Bloch coordinates need a single-qubit state");
    }
    return {2.0 * rho(0, 1).real(), -2.0 * rho(0, 1).imag(), (rho(0, 0) - rho(1, 1)).real()};
}

// ---------------------------------------------------------------------------
// Haar measure

/// Haar-distributed d x d unitary: QR of a complex Ginibre matrix with the
/// phases of diag(R) folded back into Q.
template <class Rng> [[nodiscard]] CMatrix haar_unitary(std::size_t d, Rng &rng) {
    if (d < 2) {
        throw DomainError("Haar unitary needs dimension >= 2");
    }
    std::normal_distribution<double> gauss(0.0, 1.0);
    const auto n = static_cast<Eigen::Index>(d);
    CMatrix z(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
            const double re = gauss(rng);
            const double im = gauss(rng);
            z(i, j) = Complex(re, im);
        }
    }
    Eigen::HouseholderQR<CMatrix> qr(z);
    CMatrix q = qr.householderQ() * CMatrix::Identity(n, n);
    const CMatrix &r = qr.matrixQR();
    for (Eigen::Index j = 0; j < n; ++j) {
        const Complex rjj = r(j, j);
        const double mag = std::abs(rjj);
        q.col(j) *= (mag > 0.0) ? rjj / mag : Complex(1.0);
    }
    return q;
}

} // namespace qcrisk
