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
#include <sstream>

#include <catch_amalgamated.hpp>

#include "oracles.hpp"
#include "qcrisk/classifier.hpp"

using namespace qcrisk;
using Catch::Matchers::WithinAbs;

namespace {

Bits random_bits(std::size_t n, std::mt19937_64 &rng) {
    Bits b(n);
    for (auto &x : b) {
        x = static_cast<std::uint8_t>(rng() & 1U);
    }
    return b;
}

RVector as_vector(const std::vector<double> &v) {
    return Eigen::Map<const RVector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

/// Central differences of batch_objective.
RVector numeric_gradient(const std::vector<StateVector> &xs, const std::vector<RVector> &ys, std::size_t layers,
                         const RVector &theta, const MeasurementSet &ms, const LossConfig &cfg, double h = 1e-5) {
    RVector g(theta.size());
    for (Eigen::Index j = 0; j < theta.size(); ++j) {
        RVector p = theta;
        RVector m = theta;
        p(j) += h;
        m(j) -= h;
        g(j) = (batch_objective(xs, ys, layers, p, ms, cfg) - batch_objective(xs, ys, layers, m, ms, cfg)) / (2.0 * h);
    }
    return g;
}

Split parity_split(std::uint64_t seed) { return split(gen_parity(6), 0.75, seed); }

QcTrainConfig parity_config(std::size_t layers, std::size_t epochs, std::uint64_t seed) {
    QcTrainConfig cfg;
    cfg.enc = EncoderSpec::basis(6);
    cfg.n_layers = layers;
    cfg.ms = basis_measurements(2, 1);
    cfg.epochs = epochs;
    cfg.lr = 0.5;
    cfg.batch = 4;
    cfg.seed = seed;
    return cfg;
}

} // namespace

TEST_CASE("predictions", "[classifier]") {
    const auto basis = basis_measurements(2, 1);
    const RVector h = predict(Bits{0}, EncoderSpec::basis(1), AnsatzSpec(1, 1), basis);
    CHECK_THAT(h(0), WithinAbs(1.0, 1e-15));
    CHECK_THAT(h(1), WithinAbs(0.0, 1e-15));

    const RVector z = predict_from_feature(0.25 * CMatrix::Identity(4, 4), pauli_measurements().operators);
    CHECK(z.cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("predictions agree with the full-register operator", "[classifier][oracle]") {
    std::mt19937_64 rng(31);
    for (int rep = 0; rep < 20; ++rep) {
        const std::size_t n = 2 + static_cast<std::size_t>(rep) % 3;
        const std::size_t layers = 1 + static_cast<std::size_t>(rep) % 2;
        const std::size_t d = 1 + static_cast<std::size_t>(rep) % 2;
        const auto ms = d == 2 ? pauli_measurements() : basis_measurements(2, 1);
        const auto th = oracle::random_angles(3 * n * layers, rng);
        const Bits x = random_bits(n, rng);
        const RVector h = predict(x, EncoderSpec::basis(n), AnsatzSpec(n, layers, as_vector(th)), ms);

        const CVector psi = oracle::ansatz_unitary(n, layers, th) * encode_basis(x).amplitudes();
        for (std::size_t k = 0; k < ms.size(); ++k) {
            const CMatrix full = kron(ms.operators[k], CMatrix::Identity(static_cast<Eigen::Index>(pow2(n - d)),
                                                                         static_cast<Eigen::Index>(pow2(n - d))));
            const double expected = (psi.adjoint() * full * psi)(0, 0).real();
            CHECK_THAT(h(static_cast<Eigen::Index>(k)), WithinAbs(expected, 1e-9));
        }
    }
}

TEST_CASE("basis-measurement predictions form a distribution", "[classifier][property]") {
    std::mt19937_64 rng(6);
    const auto ms = basis_measurements(4, 2);
    for (int rep = 0; rep < 30; ++rep) {
        const auto th = oracle::random_angles(3 * 4 * 2, rng);
        const RVector h = predict(random_bits(4, rng), EncoderSpec::basis(4), AnsatzSpec(4, 2, as_vector(th)), ms);
        CHECK(h.minCoeff() >= -1e-9);
        CHECK(h.maxCoeff() <= 1.0 + 1e-9);
        CHECK_THAT(h.sum(), WithinAbs(1.0, 1e-9));
    }
    const auto partial = basis_measurements(3, 2);
    const auto th = oracle::random_angles(3 * 4 * 2, rng);
    const RVector h = predict(random_bits(4, rng), EncoderSpec::basis(4), AnsatzSpec(4, 2, as_vector(th)), partial);
    CHECK(h.sum() <= 1.0 + 1e-9);
}

TEST_CASE("argmax rule", "[classifier]") {
    CHECK(argmax(RVector::Constant(3, 0.2)) == 0);
    RVector v(3);
    v << 0.1, 0.5, 0.5;
    CHECK(argmax(v) == 1);

    std::mt19937_64 rng(9);
    const auto ms = pauli_measurements();
    const auto scaled = ms.scaled(3.7);
    for (int rep = 0; rep < 20; ++rep) {
        const auto th = oracle::random_angles(3 * 4 * 2, rng);
        const AnsatzSpec a(4, 2, as_vector(th));
        const Bits x = random_bits(4, rng);
        CHECK(argmax(predict(x, EncoderSpec::basis(4), a, ms)) == argmax(predict(x, EncoderSpec::basis(4), a, scaled)));
    }
}

TEST_CASE("loss values", "[classifier][loss]") {
    const std::vector<RVector> y{label_target(0, 2, false), label_target(1, 2, false)};
    CHECK(empirical_risk(y, y) == 0.0);
    const std::vector<RVector> zeros{RVector::Zero(2), RVector::Zero(2)};
    CHECK(empirical_risk(zeros, y) == 0.5);
    CHECK_THROWS_AS(empirical_risk(zeros, {y[0]}), DimensionError);
    CHECK_THROWS_AS(empirical_risk({RVector::Zero(3)}, {y[0]}), DimensionError);

    const std::vector<CMatrix> feats{0.5 * CMatrix::Identity(2, 2), 0.5 * CMatrix::Identity(2, 2)};
    const auto ops = basis_measurements(2, 1).operators;
    const LossConfig plain;
    CHECK(loss(zeros, y, feats, ops, plain).total == 0.5);

    const LossConfig both{LossVariant::regularized_rho_o, 0.1, 0.2, false};
    const auto b = loss(zeros, y, feats, ops, both);
    CHECK_THAT(b.rho_penalty, WithinAbs(0.5 * 0.1 * 2 * 0.5, 1e-15));
    CHECK_THAT(b.o_penalty, WithinAbs(0.5 * 0.2 * 2 * 1.0, 1e-15));
    CHECK_THAT(b.total, WithinAbs(b.risk + b.rho_penalty + b.o_penalty, 1e-15));

    const LossConfig fixed{LossVariant::regularized_rho_fixed_o, 0.1, 0.2, false};
    CHECK(loss(zeros, y, feats, ops, fixed).o_penalty == 0.0);
}

TEST_CASE("losses are non-negative", "[classifier][loss][property]") {
    std::mt19937_64 rng(12);
    std::normal_distribution<double> g;
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<RVector> p;
        std::vector<RVector> y;
        std::vector<CMatrix> f;
        for (int i = 0; i < 5; ++i) {
            p.push_back(RVector::NullaryExpr(3, [&] { return g(rng); }));
            y.push_back(label_target(i % 3, 3, rep % 2 == 0));
            const CVector psi = oracle::random_state(4, rng);
            f.push_back(psi * psi.adjoint());
        }
        for (auto v : {LossVariant::plain_mse, LossVariant::regularized_rho_o, LossVariant::regularized_rho_fixed_o}) {
            CHECK(loss(p, y, f, pauli_measurements().operators, {v, 0.01, 0.01, false}).total >= 0.0);
        }
    }
}

TEST_CASE("loss configuration constraints", "[classifier][loss]") {
    LossConfig cfg{LossVariant::regularized_rho_o, 0.01, 0.01, false};
    CHECK_THAT(cfg.c1(2, 24), WithinAbs(2.0 * std::sqrt(24.0 * 1e-4), 1e-15));
    CHECK_NOTHROW(cfg.validate(2, 24));
    cfg = {LossVariant::regularized_rho_o, 1e-4, 0.01, false};
    CHECK_THROWS_AS(cfg.validate(2, 24), DomainError); // lambda_o > n_c lambda_rho, C1 small
    cfg = {LossVariant::regularized_rho_o, 0.1, 0.1, false};
    CHECK_NOTHROW(cfg.validate(2, 24)); // C1 = 0.98
    cfg = {LossVariant::regularized_rho_o, 0.2, 0.2, false};
    CHECK_THROWS_AS(cfg.validate(2, 24), DomainError); // C1 = 1.96
    cfg.variant = LossVariant::plain_mse;
    CHECK_NOTHROW(cfg.validate(2, 24));
    cfg.lambda_rho = -1.0;
    CHECK_THROWS_AS(cfg.validate(2, 24), DomainError);
    CHECK(loss_variant_from_string("regularized_rho_fixed_o") == LossVariant::regularized_rho_fixed_o);
    CHECK_THROWS_AS(loss_variant_from_string("hinge"), DomainError);
}

TEST_CASE("ETF label vectors", "[classifier][loss]") {
    for (std::size_t k = 2; k <= 6; ++k) {
        RVector sum = RVector::Zero(static_cast<Eigen::Index>(k));
        for (std::size_t c = 0; c < k; ++c) {
            const RVector y = label_target(static_cast<int>(c), k, true);
            CHECK_THAT(y.norm(), WithinAbs(1.0, 1e-12));
            CHECK(argmax(y) == static_cast<int>(c));
            sum += y;
            for (std::size_t c2 = 0; c2 < c; ++c2) {
                CHECK_THAT(y.dot(label_target(static_cast<int>(c2), k, true)), WithinAbs(-1.0 / static_cast<double>(k - 1), 1e-12));
            }
        }
        CHECK(sum.cwiseAbs().maxCoeff() < 1e-12);
    }
    CHECK_THROWS_AS(label_target(2, 2, false), DomainError);
}

TEST_CASE("collapsed optimum of the regularized objective", "[classifier][loss]") {
    const std::size_t k = 2;
    const std::size_t n_c = 24;
    const double lr = 1e-3;
    const double lo = 2e-3;
    const auto opt = collapsed_optimum(k, 1, n_c, lr, lo);
    CHECK_THAT(opt.a * opt.b, WithinAbs(1.0 - opt.c1, 1e-14));

    std::vector<RVector> preds;
    std::vector<RVector> ys;
    std::vector<CMatrix> feats;
    for (std::size_t c = 0; c < k; ++c) {
        for (std::size_t i = 0; i < n_c; ++i) {
            feats.push_back(opt.means[c]);
            preds.push_back(predict_from_feature(opt.means[c], opt.ops));
            ys.push_back(label_target(static_cast<int>(c), k, false));
        }
    }
    const LossConfig cfg{LossVariant::regularized_rho_o, lr, lo, false};
    CHECK_THAT(loss(preds, ys, feats, opt.ops, cfg).risk, WithinAbs(opt.c1 * opt.c1 / 2.0, 1e-12));

    // stationary in the collapsed family's (a, b)
    const double n = static_cast<double>(k * n_c);
    const auto objective = [&](double a, double b) {
        return 0.5 * (a * b - 1.0) * (a * b - 1.0) + 0.5 * lr * n * a * a + 0.5 * lo * static_cast<double>(k) * b * b;
    };
    const double h = 1e-6;
    CHECK(std::abs(objective(opt.a + h, opt.b) - objective(opt.a - h, opt.b)) / (2 * h) < 1e-8);
    CHECK(std::abs(objective(opt.a, opt.b + h) - objective(opt.a, opt.b - h)) / (2 * h) < 1e-8);
    CHECK(objective(opt.a, opt.b) <= objective(opt.a * 1.01, opt.b));
    CHECK(objective(opt.a, opt.b) <= objective(opt.a, opt.b * 0.99));

    CHECK_THROWS_AS(collapsed_optimum(3, 1, 10, lr, lo), DomainError);
    CHECK_THROWS_AS(collapsed_optimum(2, 1, 10, 0.0, lo), DomainError);
}

TEST_CASE("parameter-shift gradient matches finite differences", "[classifier][gradient][oracle]") {
    std::mt19937_64 rng(2718);
    const LossConfig variants[] = {{LossVariant::plain_mse, 0.0, 0.0, false},
                                   {LossVariant::regularized_rho_o, 0.01, 0.002, false},
                                   {LossVariant::regularized_rho_fixed_o, 0.05, 0.0, true}};
    double worst = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
        const std::size_t n = 1 + static_cast<std::size_t>(rep) % 4;
        const std::size_t layers = 1 + static_cast<std::size_t>(rep) % 3;
        const auto ms = n >= 2 && rep % 2 == 0 ? pauli_measurements() : basis_measurements(2, 1);
        const std::size_t k = ms.size();
        const auto &cfg = variants[rep % 3];
        std::vector<StateVector> xs;
        std::vector<RVector> ys;
        for (int i = 0; i < 3; ++i) {
            xs.push_back(encode_basis(random_bits(n, rng)));
            ys.push_back(label_target(static_cast<int>(rng() % k), k, cfg.etf_label_mode));
        }
        const RVector theta = as_vector(oracle::random_angles(3 * n * layers, rng));
        const RVector exact = gradient(xs, ys, layers, theta, ms, cfg);
        const RVector numeric = numeric_gradient(xs, ys, layers, theta, ms, cfg);
        worst = std::max(worst, (exact - numeric).cwiseAbs().maxCoeff());
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("gradient vanishes at an exact minimum", "[classifier][gradient]") {
    // |0> -> RZ RY RZ at zero angles stays |0>; label 0 is predicted perfectly
    const std::vector<StateVector> xs{encode_basis({0})};
    const std::vector<RVector> ys{label_target(0, 2, false)};
    const RVector g = gradient(xs, ys, 1, RVector::Zero(3), basis_measurements(2, 1), {});
    CHECK(g.cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("duplicating the batch leaves the mean gradient unchanged", "[classifier][gradient]") {
    std::mt19937_64 rng(17);
    std::vector<StateVector> xs;
    std::vector<RVector> ys;
    for (int i = 0; i < 4; ++i) {
        xs.push_back(encode_basis(random_bits(3, rng)));
        ys.push_back(label_target(i % 2, 2, false));
    }
    const RVector theta = as_vector(oracle::random_angles(18, rng));
    const auto ms = basis_measurements(2, 1);
    const RVector g1 = gradient(xs, ys, 2, theta, ms, {});
    auto xs2 = xs;
    auto ys2 = ys;
    xs2.insert(xs2.end(), xs.begin(), xs.end());
    ys2.insert(ys2.end(), ys.begin(), ys.end());
    CHECK((gradient(xs2, ys2, 2, theta, ms, {}) - g1).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("AdaGrad steps", "[classifier][optimizer]") {
    RVector p(3);
    p << 1.0, -2.0, 0.5;
    const RVector p0 = p;
    AdaGradState st;
    adagrad_step(p, RVector::Zero(3), st, 0.5);
    CHECK(p == p0);
    CHECK(st.accumulator == RVector::Zero(3));

    RVector g(3);
    g << 0.3, -4.0, 1e-3;
    adagrad_step(p, g, st, 0.5);
    const RVector first = p0 - p;
    for (Eigen::Index i = 0; i < 3; ++i) {
        CHECK_THAT(std::abs(first(i)), WithinAbs(0.5 * std::abs(g(i)) / (std::abs(g(i)) + 1e-10), 1e-15));
        CHECK_THAT(std::abs(first(i)), WithinAbs(0.5, 1e-6));
    }
    const RVector before = p;
    adagrad_step(p, g, st, 0.5);
    for (Eigen::Index i = 0; i < 3; ++i) {
        CHECK_THAT(std::abs(before(i) - p(i)), WithinAbs(0.5 / std::sqrt(2.0), 1e-6));
    }
    CHECK_THROWS_AS(adagrad_step(p, g, st, 0.0), DomainError);
    CHECK_THROWS_AS(adagrad_step(p, RVector::Zero(2), st, 0.1), DimensionError);
}

TEST_CASE("training edge cases", "[classifier][train]") {
    const auto data = parity_split(0);
    const auto rec = train_qc(data, parity_config(2, 0, 0));
    REQUIRE(rec.history.size() == 1);
    CHECK(rec.history[0].epoch == 0);
    CHECK(rec.epochs == 0);

    Split empty = data;
    empty.train.examples.clear();
    CHECK_THROWS_AS(train_qc(empty, parity_config(2, 1, 0)), DomainError);

    auto bad = parity_config(2, 1, 0);
    bad.batch = 0;
    CHECK_THROWS_AS(train_qc(data, bad), DomainError);
}

TEST_CASE("training is deterministic given the seed", "[classifier][train]") {
    const auto data = parity_split(1);
    const auto a = train_qc(data, parity_config(2, 3, 5));
    const auto b = train_qc(data, parity_config(2, 3, 5));
    std::ostringstream sa;
    std::ostringstream sb;
    write_jsonl(a, sa);
    write_jsonl(b, sb);
    CHECK(sa.str() == sb.str());
    CHECK(a.params == b.params);
    const auto c = train_qc(data, parity_config(2, 3, 6));
    CHECK_FALSE(c.params == a.params);
}

TEST_CASE("parity training lowers the loss for every seed", "[classifier][train][slow]") {
    for (std::uint64_t seed : {0, 1, 2}) {
        const auto rec = train_qc(parity_split(seed), parity_config(3, 10, seed));
        CHECK(rec.final_metrics().train_loss < rec.history.front().train_loss);
        for (const auto &e : rec.history) {
            CHECK(e.train_acc >= 0.0);
            CHECK(e.train_acc <= 1.0);
            CHECK(e.test_acc >= 0.0);
            CHECK(e.test_acc <= 1.0);
            CHECK(e.bloch.size() == rec.n);
        }
    }
}

TEST_CASE("record writers", "[classifier][io]") {
    const auto rec = train_qc(parity_split(0), parity_config(1, 2, 0));
    std::ostringstream out;
    write_jsonl(rec, out);
    std::istringstream in(out.str());
    std::string line;
    std::size_t lines = 0;
    while (std::getline(in, line)) {
        const auto j = nlohmann::json::parse(line);
        CHECK(j.at("epoch").get<std::size_t>() == lines);
        CHECK(j.at("N_t").get<std::size_t>() == 18);
        CHECK(j.at("m2").size() == 2);
        ++lines;
    }
    CHECK(lines == 3);

    std::ostringstream csv;
    write_summary_row(rec, csv);
    CHECK(summary_csv_header() == "seed,n,N_t,T,final_train_loss,final_test_loss,final_train_acc,final_test_acc");
    CHECK(csv.str().rfind("0,48,18,2,", 0) == 0);

    QcModel model{EncoderSpec::basis(6), 1, basis_measurements(2, 1), rec.params};
    const nlohmann::json j = model;
    const auto back = j.get<QcModel>();
    CHECK(back.theta == model.theta);
    CHECK(back.n_layers == 1);
    const auto x = parity_split(0).test.examples.front().features;
    CHECK((back.predict(x) - model.predict(x)).cwiseAbs().maxCoeff() == 0.0);
}
