#include "lnet/trainer.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace lnet;
using lnet::test::rel_err;
namespace fs = std::filesystem;

namespace {

std::vector<TrainingExample> small_set(std::size_t count, Index n, std::uint64_t seed)
{
    SynthConfig cfg;
    cfg.n = n;
    std::vector<TrainingExample> out;
    for (std::size_t i = 0; i < count; ++i) {
        Sample s = generate_sample(derive_seed(seed, i), cfg);
        out.push_back({std::move(s.image), std::move(s.gt_lines)});
    }
    return out;
}

std::vector<std::size_t> all_indices(std::size_t n)
{
    std::vector<std::size_t> v(n);
    for (std::size_t i = 0; i < n; ++i) {
        v[i] = i;
    }
    return v;
}

} // namespace

TEST_SUITE("trainer")
{
    TEST_CASE("learning rate schedule")
    {
        TrainConfig c;
        CHECK(learning_rate(c, 0) == 1e-3);
        CHECK(learning_rate(c, 9) == 1e-3);
        CHECK(learning_rate(c, 10) == 5e-4);
        CHECK(learning_rate(c, 29) == 2.5e-4);
        c.lr_halving_period = 1;
        CHECK(learning_rate(c, 3) == 1.25e-4);
    }

    TEST_CASE("config validation")
    {
        TrainConfig c;
        CHECK_NOTHROW(c.validate());
        c.batch_size = 0;
        CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("batch_size"), std::invalid_argument);
        c = TrainConfig{};
        c.variant = "slow";
        CHECK_THROWS_AS(c.validate(), std::invalid_argument);
        c = TrainConfig{};
        c.lr0 = -1.0;
        CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    }

    TEST_CASE("targets")
    {
        const DyadicLine cell{0, 10, 20, 64};
        const BoundaryLine line = line_from_cell(cell);
        REQUIRE(cell_from_line(line) == cell);
        const HoughMap<double> t = make_target({line}, 64);
        CHECK(t(0, 20, 10) == 1.0);
        CHECK(t.max_coeff() == 1.0);
        CHECK(t(0, 21, 10) == doctest::Approx(std::exp(-1.0 / (2 * 1.8 * 1.8))));
        CHECK(t(0, 20, 11) == doctest::Approx(0.857).epsilon(1e-3));
        CHECK(t(0, 21, 11) == doctest::Approx(std::exp(-2.0 / (2 * 1.8 * 1.8))));
        CHECK(t(0, 20, 17) == 0.0); // beyond the kernel radius
        for (int q = 1; q < 4; ++q) {
            CHECK(t.planes[q].isZero(0.0));
        }

        CHECK(make_target({}, 64).max_coeff() == 0.0);

        // Two nearby lines combine by maximum, so no cell exceeds 1.
        const BoundaryLine other = line_from_cell(DyadicLine{0, 12, 20, 64});
        const HoughMap<double> both = make_target({line, other}, 64);
        CHECK(both.max_coeff() == 1.0);
        CHECK(both(0, 20, 11) == doctest::Approx(std::max(t(0, 20, 11), t(0, 20, 13))));
        CHECK(both(0, 20, 12) == 1.0);
    }

    TEST_CASE("weighted loss")
    {
        const Index n = 8;
        const double cells = static_cast<double>(4 * n * (2 * n - 1));
        HoughMap<double> pred(n), target(n);
        target(1, 3, 2) = 1.0;
        LossResult r = weighted_mse(pred, target);
        CHECK(r.loss == doctest::Approx(1001.0 / cells));
        CHECK(r.grad(1, 3, 2) == doctest::Approx(-2.0 * 1001.0 / cells));
        CHECK(r.grad(0, 3, 2) == 0.0);

        // Zero target: plain mean squared error.
        HoughMap<double> c(n);
        for (auto& p : c.planes) {
            p.setConstant(0.5);
        }
        r = weighted_mse(c, HoughMap<double>(n));
        CHECK(r.loss == doctest::Approx(0.25));
        CHECK(r.grad(2, 0, 0) == doctest::Approx(1.0 / cells));

        CHECK(weighted_mse(target, target).loss == 0.0);
        CHECK_THROWS_AS(weighted_mse(pred, HoughMap<double>(4)), std::invalid_argument);
    }

    TEST_CASE("adam")
    {
        LNetModel m = init_weights(build(Variant::fast), std::uint64_t{1});
        const Eigen::VectorXd theta = m.flat();
        AdamState st(m.param_count());
        adam_step(m, Eigen::VectorXd::Zero(55), st, 1e-3, 0.0);
        CHECK(m.flat() == theta);
        CHECK(st.step == 1);

        Rng rng(71);
        Eigen::VectorXd g(55);
        for (Index i = 0; i < 55; ++i) {
            g[i] = rng.uniform(-5.0, 5.0);
        }
        AdamState fresh(55);
        LNetModel m2 = init_weights(build(Variant::fast), std::uint64_t{1});
        adam_step(m2, g, fresh, 1e-3, 0.0);
        const Eigen::VectorXd delta = m2.flat() - theta;
        CHECK(delta.cwiseAbs().maxCoeff() <= 1e-3 + 1e-12);
        for (Index i = 0; i < 55; ++i) {
            CHECK(delta[i] * g[i] < 0.0); // first step moves against the gradient
        }

        // Classic L2 decay: a zero gradient still pulls the weights toward zero.
        AdamState decay(55);
        LNetModel m3 = init_weights(build(Variant::fast), std::uint64_t{1});
        adam_step(m3, Eigen::VectorXd::Zero(55), decay, 1e-3, 1e-5);
        CHECK(m3.flat().norm() < theta.norm());

        g[7] = std::nan("");
        CHECK_THROWS_AS(adam_step(m2, g, fresh, 1e-3, 0.0), std::runtime_error);
        CHECK_THROWS_AS(adam_step(m2, Eigen::VectorXd::Zero(3), fresh, 1e-3, 0.0), std::invalid_argument);
    }

    TEST_CASE("batch gradient matches finite differences of the loss")
    {
        const auto data = small_set(3, 32, 72);
        LNetModel m = init_weights(build(Variant::fast), std::uint64_t{2}, 0.3);
        Rng rng(73);
        for (auto& b : m.biases) {
            for (Index i = 0; i < b.size(); ++i) {
                b[i] = rng.uniform(-0.05, 0.05);
            }
        }
        const TrainConfig cfg;
        const auto idx = all_indices(data.size());
        Eigen::VectorXd grad;
        const double loss = batch_gradient(m, data, idx, cfg, grad);
        CHECK(loss == doctest::Approx(dataset_loss(m, data, idx, cfg)).epsilon(1e-12));
        const Eigen::VectorXd theta = m.flat();
        const double h = 1e-6;
        for (Index i = 0; i < theta.size(); ++i) {
            LNetModel p = m, q = m;
            Eigen::VectorXd tp = theta, tq = theta;
            tp[i] += h;
            tq[i] -= h;
            p.set_flat(tp);
            q.set_flat(tq);
            const double fd = (dataset_loss(p, data, idx, cfg) - dataset_loss(q, data, idx, cfg)) / (2 * h);
            CAPTURE(i);
            CHECK(rel_err(fd, grad[i], 1e-8) <= 1e-4);
        }
    }

    TEST_CASE("one epoch of 32 samples is one step and lowers the loss")
    {
        const auto data = small_set(32, 64, 74);
        const auto idx = all_indices(data.size());
        int improved = 0;
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            TrainConfig cfg;
            cfg.epochs = 1;
            cfg.seed = seed;
            const LNetModel start = init_weights(build(cfg.variant), derive_seed(seed, 0), cfg.init_noise_scale);
            const TrainResult r = train(cfg, data);
            CHECK(r.steps == 1);
            REQUIRE(r.log.size() == 1);
            CHECK(r.log[0].lr == 1e-3);
            CHECK(r.log[0].train_loss == doctest::Approx(dataset_loss(start, data, idx, cfg)).epsilon(1e-12));
            if (dataset_loss(r.model, data, idx, cfg) < r.log[0].train_loss) {
                ++improved;
            }
        }
        CHECK(improved >= 4);
    }

    TEST_CASE("training is deterministic")
    {
        const auto data = small_set(10, 32, 75);
        TrainConfig cfg;
        cfg.epochs = 2;
        cfg.batch_size = 4;
        cfg.seed = 9;
        int hook_calls = 0;
        const TrainResult a = train(cfg, data, [&](const LNetModel&, int epoch) -> std::optional<double> {
            ++hook_calls;
            return 0.5 * epoch;
        });
        const TrainResult b = train(cfg, data);
        CHECK(hook_calls == 2);
        CHECK(a.steps == 6);
        CHECK(a.model.flat() == b.model.flat());
        CHECK(a.log[1].train_loss == b.log[1].train_loss);
        CHECK(a.log[1].test_ap == 0.5);
        CHECK_FALSE(b.log[1].test_ap.has_value());
        cfg.threads = 3;
        CHECK(train(cfg, data).model.flat() == a.model.flat());
        cfg.seed = 10;
        CHECK(train(cfg, data).model.flat() != a.model.flat());

        const fs::path csv = fs::temp_directory_path() / "lnet_metrics_test.csv";
        write_metrics_csv(a.log, csv);
        std::ifstream is(csv);
        std::string header, row0, row1;
        std::getline(is, header);
        std::getline(is, row0);
        std::getline(is, row1);
        CHECK(header == "epoch,lr,train_loss,test_AP");
        CHECK(row0.rfind("0,0.001,", 0) == 0);
        CHECK(row0.substr(row0.size() - 2) == ",0");
        CHECK(row1.substr(row1.size() - 4) == ",0.5");
        fs::remove(csv);

        CHECK_THROWS_AS(train(cfg, std::vector<TrainingExample>{}), std::invalid_argument);
    }
}
