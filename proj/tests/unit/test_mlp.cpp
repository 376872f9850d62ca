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

#include "qcrisk/mlp.hpp"

using namespace qcrisk;
using Catch::Matchers::WithinAbs;

TEST_CASE("MLP shape", "[mlp]") {
    CHECK(MlpSpec::parameter_count(6, 4, 2) == 6 * 4 + 4 + 4 * 2 + 2);
    const MlpSpec net(6, 4, 2);
    CHECK(static_cast<std::size_t>(net.params.size()) == net.parameter_count());
    CHECK_THROWS_AS(MlpSpec(0, 4, 2), DomainError);
    CHECK(mlp_hidden_for_params(54, 6, 2) == 6);  // 6*6 + 6 + 12 + 2 = 56
    CHECK(mlp_hidden_for_params(3, 6, 2) == 1);
    CHECK_THROWS_AS(mlp_forward(net, RVector::Zero(5)), DimensionError);
}

TEST_CASE("MLP forward pass", "[mlp]") {
    MlpSpec net(2, 2, 2);
    std::mt19937_64 rng(1);
    net.initialise(rng);
    RVector x(2);
    x << 0.3, -1.2;
    const auto f = mlp_forward(net, x);
    CHECK_THAT(f.p.sum(), WithinAbs(1.0, 1e-15));
    CHECK(f.p.minCoeff() > 0.0);
    CHECK(f.a1.minCoeff() >= 0.0);
    const RVector z1 = net.w1() * x + net.b1();
    CHECK((z1 - f.z1).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("MLP backward matches finite differences", "[mlp][gradient][oracle]") {
    std::mt19937_64 rng(314);
    std::normal_distribution<double> g;
    double worst = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
        const std::size_t d = 2 + static_cast<std::size_t>(rep) % 5;
        const std::size_t h = 1 + static_cast<std::size_t>(rep) % 7;
        const std::size_t k = 2 + static_cast<std::size_t>(rep) % 3;
        MlpSpec net(d, h, k);
        net.initialise(rng);
        std::vector<RVector> xs;
        std::vector<RVector> ys;
        for (int i = 0; i < 4; ++i) {
            xs.push_back(RVector::NullaryExpr(static_cast<Eigen::Index>(d), [&] { return g(rng); }));
            RVector y = RVector::Zero(static_cast<Eigen::Index>(k));
            y(static_cast<Eigen::Index>(rng() % k)) = 1.0;
            ys.push_back(y);
        }
        const RVector exact = mlp_gradient(net, xs, ys);
        const double step = 1e-6;
        for (Eigen::Index j = 0; j < net.params.size(); ++j) {
            MlpSpec p = net;
            MlpSpec m = net;
            p.params(j) += step;
            m.params(j) -= step;
            const double numeric = (mlp_loss(p, xs, ys) - mlp_loss(m, xs, ys)) / (2.0 * step);
            worst = std::max(worst, std::abs(numeric - exact(j)));
        }
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("MLP fits a separable two-point set", "[mlp][train]") {
    Dataset ds;
    ds.num_classes = 2;
    ds.kind = DataKind::amplitude;
    RVector a(2);
    a << 1.0, 0.0;
    RVector b(2);
    b << 0.0, 1.0;
    ds.examples = {{a, 0}, {b, 1}};
    Split data{ds, ds};
    MlpTrainConfig cfg;
    cfg.hidden = 4;
    cfg.epochs = 100;
    const auto rec = train_mlp(data, cfg);
    REQUIRE(rec.history.size() == 101);
    CHECK(rec.final_metrics().train_acc == 1.0);
    CHECK(rec.model == "mlp");
}

TEST_CASE("MLP does not learn parity at the reference budget", "[mlp][train]") {
    const auto full = gen_parity(6);
    for (std::size_t h : {2, 6, 12, 18}) {
        for (std::uint64_t seed : {0, 1, 2}) {
            MlpTrainConfig cfg;
            cfg.hidden = h;
            cfg.epochs = 50;
            cfg.seed = seed;
            const auto rec = train_mlp(split(full, 0.75, seed), cfg);
            CHECK(rec.final_metrics().test_acc <= 0.7);
        }
    }
}

TEST_CASE("MLP training is deterministic", "[mlp][train]") {
    const auto data = split(gen_parity(4), 0.75, 3);
    MlpTrainConfig cfg;
    cfg.epochs = 5;
    cfg.seed = 9;
    CHECK(train_mlp(data, cfg).params == train_mlp(data, cfg).params);
}
