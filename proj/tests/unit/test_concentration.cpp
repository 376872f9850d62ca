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
#include <catch_amalgamated.hpp>

#include <sstream>

#include "oracles.hpp"
#include "qcrisk/concentration.hpp"

using namespace qcrisk;
using Catch::Matchers::WithinAbs;

TEST_CASE("first-moment closed form", "[concentration]") {
    const CMatrix i2 = CMatrix::Identity(2, 2);
    CHECK(std::abs(moment1_oracle(i2, i2, 2) - Complex(2.0, 0.0)) < 1e-15);
    CHECK(std::abs(moment1_oracle(pauli::z(), i2, 2)) < 1e-15);
    CHECK_THROWS_AS(moment1_oracle(i2, CMatrix::Identity(4, 4), 2), DimensionError);
}

TEST_CASE("second-moment closed form", "[concentration]") {
    // identities everywhere: integrand is d * d
    for (std::size_t d : {2, 4, 8}) {
        const CMatrix id = CMatrix::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
        const double dd = static_cast<double>(d);
        CHECK(std::abs(moment2_oracle(id, id, id, id, d) - Complex(dd * dd, 0.0)) < 1e-9);
    }
    // E |<0|W|0>|^4 = 2 / (d (d + 1)) for a projector
    for (std::size_t d : {2, 4, 8}) {
        CMatrix p = CMatrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
        p(0, 0) = 1.0;
        const double dd = static_cast<double>(d);
        CHECK_THAT(moment2_oracle(p, p, p, p, d).real(), WithinAbs(2.0 / (dd * (dd + 1.0)), 1e-14));
    }
    // E Tr(W Z W^dagger Z)^2 on a qubit = Tr(Z^2)^2 / 3 = 4/3
    const CMatrix z = pauli::z();
    CHECK_THAT(moment2_oracle(z, z, z, z, 2).real(), WithinAbs(4.0 / 3.0, 1e-14));
    CHECK_THROWS_AS(moment2_oracle(z, z, z, z, 1), DomainError);
}

TEST_CASE("Monte-Carlo moments agree with the closed forms", "[concentration][mc]") {
    std::mt19937_64 rng(11);
    for (std::size_t d : {2, 4}) {
        std::vector<std::array<CMatrix, 2>> t1;
        std::vector<std::array<CMatrix, 4>> t2;
        for (int i = 0; i < 3; ++i) {
            t1.push_back({oracle::random_matrix(d, rng), oracle::random_matrix(d, rng)});
            t2.push_back({oracle::random_matrix(d, rng), oracle::random_matrix(d, rng), oracle::random_matrix(d, rng),
                          oracle::random_matrix(d, rng)});
        }
        const auto e1 = haar_moment1_mc(t1, d, 20000, rng);
        const auto e2 = haar_moment2_mc(t2, d, 20000, rng);
        for (std::size_t i = 0; i < t1.size(); ++i) {
            CHECK(e1[i].agrees_with(moment1_oracle(t1[i][0], t1[i][1], d), 4.0));
            const auto &[a, b, c, dm] = t2[i];
            CHECK(e2[i].agrees_with(moment2_oracle(a, b, c, dm, d), 4.0));
        }
    }
}

TEST_CASE("MC estimate tolerance", "[concentration]") {
    MonteCarloEstimate e;
    e.mean = Complex(1.0, 0.0);
    e.standard_error = 0.1;
    CHECK(e.agrees_with(Complex(1.25, 0.0)));
    CHECK_FALSE(e.agrees_with(Complex(1.35, 0.0)));
    e.standard_error = 0.0;
    CHECK(e.agrees_with(Complex(1.0 + 1e-12, 0.0)));
    CHECK_FALSE(e.agrees_with(Complex(1.0 + 1e-6, 0.0)));
}

TEST_CASE("encoder overlaps concentrate", "[concentration][slow]") {
    const auto r = verify_encoder_concentration(4, 8, 400, 0.05, 3);
    CHECK(r.values.size() == 400);
    CHECK_THAT(r.expected, WithinAbs(1.0 / 16.0, 1e-15));
    CHECK_THAT(r.bound, WithinAbs(std::sqrt(3.0 / (256.0 * 0.05)), 1e-15));
    CHECK(r.violation_rate <= 0.07);
    CHECK(std::abs(r.mean - r.expected) <= 4.0 * r.standard_error());
    for (double v : r.values) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0 + 1e-12);
    }
    // Haar overlaps of dimension d have variance (d - 1) / (d^2 (d + 1))
    CHECK(r.variance < 3.0 * 15.0 / (256.0 * 17.0));

    const auto fixed = verify_encoder_concentration(4, 8, 200, 0.05, 3, PairMode::fixed_first);
    CHECK(fixed.violation_rate <= 0.1);
}

TEST_CASE("ansatz outputs concentrate", "[concentration][slow]") {
    const auto r = verify_ansatz_concentration(4, 1, 8, 400, 0.05, pauli::z(), 5);
    CHECK(r.expected == 0.0);
    CHECK_THAT(r.bound, WithinAbs(std::sqrt(4.0 / (4.0 * 0.05)), 1e-15));
    CHECK(r.violation_rate <= 0.12);
    CHECK(std::abs(r.mean) <= 4.0 * r.standard_error());

    // identity observable: every value is exactly 1
    const auto id = verify_ansatz_concentration(4, 1, 8, 100, 0.05, CMatrix::Identity(2, 2), 5);
    for (double v : id.values) {
        CHECK_THAT(v, WithinAbs(1.0, 1e-12));
    }
    CHECK(id.violation_rate == 0.0);
}

TEST_CASE("concentration runs are deterministic", "[concentration]") {
    const auto a = verify_encoder_concentration(3, 6, 100, 0.05, 9);
    const auto b = verify_encoder_concentration(3, 6, 100, 0.05, 9);
    CHECK(a.values == b.values);
    const auto c = verify_encoder_concentration(3, 6, 100, 0.05, 10);
    CHECK(a.values != c.values);
}

TEST_CASE("concentration argument checks", "[concentration]") {
    CHECK_THROWS_AS(verify_encoder_concentration(4, 7, 100, 0.05, 0), DomainError);
    CHECK_THROWS_AS(verify_encoder_concentration(4, 8, 99, 0.05, 0), DomainError);
    CHECK_THROWS_AS(verify_encoder_concentration(4, 8, 100, 0.0, 0), DomainError);
    CHECK_THROWS_AS(verify_encoder_concentration(4, 8, 100, 1.0, 0), DomainError);
    CHECK_THROWS_AS(verify_ansatz_concentration(4, 5, 8, 100, 0.05, pauli::z(), 0), DomainError);
    CHECK_THROWS_AS(verify_ansatz_concentration(4, 2, 8, 100, 0.05, pauli::z(), 0), DimensionError);
    CMatrix bad = pauli::x();
    bad(0, 1) = Complex(0.0, 1.0);
    CHECK_THROWS_AS(verify_ansatz_concentration(4, 1, 8, 100, 0.05, bad, 0), DomainError);
}

TEST_CASE("concentration CSV row", "[concentration][io]") {
    const auto r = verify_encoder_concentration(2, 4, 100, 0.05, 1);
    std::ostringstream out;
    write_concentration_row(r, out);
    const std::string line = out.str();
    const std::string header = concentration_csv_header();
    CHECK(line.rfind("encoder_overlap,2,2,4,100,", 0) == 0);
    CHECK(std::count(line.begin(), line.end(), ',') == std::count(header.begin(), header.end(), ','));
}
