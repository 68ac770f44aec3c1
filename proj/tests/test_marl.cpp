#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>
#include <vector>

#include "aoisim/common/rng.hpp"
#include "aoisim/marl/agent.hpp"
#include "aoisim/marl/dense_network.hpp"
#include "aoisim/marl/optimizer.hpp"
#include "aoisim/marl/replay_buffer.hpp"
#include "aoisim/marl/rewards.hpp"

using namespace aoisim;
using namespace aoisim::marl;

using Net = DenseNetwork<double>;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

namespace {

Net small_relu_net(Rng& rng, std::vector<int> widths) {
    std::vector<Activation> acts(widths.size() - 1, Activation::kRelu);
    acts.back() = Activation::kLinear;
    return Net::he_init(widths, acts, rng);
}

// 0.5 * ||f(x) - target||^2 summed over the batch
double sse_loss(const Net& net, const Mat& x, const Mat& target) {
    Mat y = net.forward(x);
    return 0.5 * (y - target).squaredNorm();
}

}  // namespace

TEST_CASE("dense network constructor validates its shape", "[marl][net]") {
    CHECK_THROWS_AS(Net({3}, {}), std::invalid_argument);
    CHECK_THROWS_AS(Net({3, 2}, {}), std::invalid_argument);
    CHECK_THROWS_AS(Net({3, 0}, {Activation::kLinear}), std::invalid_argument);
    Net net({3, 2}, {Activation::kLinear});
    CHECK(net.layer_count() == 1);
    CHECK(net.input_size() == 3);
    CHECK(net.output_size() == 2);
    CHECK(net.param_count() == 3 * 2 + 2);
    // zero-initialized parameters give a zero map
    Vec x(3);
    x << 1.0, -2.0, 3.0;
    CHECK(net.forward(x).norm() == 0.0);
}

TEST_CASE("dense network forward matches hand-computed values", "[marl][net]") {
    Net net({2, 3, 1}, {Activation::kRelu, Activation::kLinear});
    auto w0 = net.weight(0);
    w0 << 1.0, 0.0, 0.0, 1.0, 1.0, -1.0;
    net.bias(0) << 0.5, -0.5, 0.0;
    net.weight(1) << 1.0, 2.0, 3.0;
    net.bias(1) << 0.25;

    Vec x(2);
    x << 1.0, 2.0;
    // z0 = (1.5, 1.5, -1) -> relu -> (1.5, 1.5, 0); out = 1.5 + 3.0 + 0.25
    CHECK(net.forward(x)(0) == Catch::Approx(4.75).epsilon(1e-14));
    x << -1.0, -1.0;
    // all hidden units clamp to zero, only the bias survives
    CHECK(net.forward(x)(0) == Catch::Approx(0.25).epsilon(1e-14));

    // identity single layer
    Net id({2, 2}, {Activation::kLinear});
    id.weight(0) << 1.0, 0.0, 0.0, 1.0;
    id.bias(0) << 1.0, 2.0;
    Vec v(2);
    v << 3.0, 4.0;
    Vec out = id.forward(v);
    CHECK(out(0) == 4.0);
    CHECK(out(1) == 6.0);
}

TEST_CASE("batched forward equals per-column forward", "[marl][net]") {
    Rng rng(31);
    Net net = small_relu_net(rng, {4, 8, 3});
    Mat x(4, 7);
    for (int j = 0; j < x.cols(); ++j)
        for (int i = 0; i < x.rows(); ++i) x(i, j) = rng.normal();
    Mat batch = net.forward(x);
    for (int j = 0; j < x.cols(); ++j) {
        Vec single = net.forward(Vec(x.col(j)));
        CHECK((batch.col(j) - single).norm() == Catch::Approx(0.0).margin(1e-12));
    }
    typename Net::Cache cache;
    Mat cached = net.forward(x, cache);
    CHECK((cached - batch).norm() == Catch::Approx(0.0).margin(1e-12));
    Mat wrong(3, 2);
    CHECK_THROWS_AS(net.forward(wrong), std::invalid_argument);
}

TEST_CASE("backward gradient matches central differences on every parameter",
          "[marl][net][gradcheck]") {
    Rng rng(17);
    Net net = small_relu_net(rng, {3, 5, 2});
    Mat x(3, 6), target(2, 6);
    for (int j = 0; j < 6; ++j) {
        for (int i = 0; i < 3; ++i) x(i, j) = rng.normal();
        for (int i = 0; i < 2; ++i) target(i, j) = rng.normal();
    }

    typename Net::Cache cache;
    const Mat& y = net.forward(x, cache);
    Vec grad = Vec::Zero(net.param_count());
    net.backward(cache, Mat(y - target), grad);

    const double h = 1e-5;
    double worst = 0.0;
    for (Eigen::Index k = 0; k < net.param_count(); ++k) {
        double saved = net.params()(k);
        net.params()(k) = saved + h;
        double up = sse_loss(net, x, target);
        net.params()(k) = saved - h;
        double down = sse_loss(net, x, target);
        net.params()(k) = saved;
        double fd = (up - down) / (2.0 * h);
        double denom = std::max({std::abs(fd), std::abs(grad(k)), 1e-8});
        worst = std::max(worst, std::abs(fd - grad(k)) / denom);
    }
    CHECK(worst <= 1e-4);
}

TEST_CASE("backward_input matches central differences on the input",
          "[marl][net][gradcheck]") {
    Rng rng(19);
    Net net = small_relu_net(rng, {4, 6, 2});
    Mat x(4, 3), target(2, 3);
    for (int j = 0; j < 3; ++j) {
        for (int i = 0; i < 4; ++i) x(i, j) = rng.normal();
        for (int i = 0; i < 2; ++i) target(i, j) = rng.normal();
    }
    typename Net::Cache cache;
    const Mat& y = net.forward(x, cache);
    Mat dx = net.backward_input(cache, Mat(y - target));
    REQUIRE(dx.rows() == 4);
    REQUIRE(dx.cols() == 3);

    const double h = 1e-5;
    for (int j = 0; j < 3; ++j)
        for (int i = 0; i < 4; ++i) {
            Mat xp = x, xm = x;
            xp(i, j) += h;
            xm(i, j) -= h;
            double fd = (sse_loss(net, xp, target) - sse_loss(net, xm, target)) /
                        (2.0 * h);
            CHECK(dx(i, j) == Catch::Approx(fd).margin(1e-6));
        }
}

TEST_CASE("backward accumulates into the gradient buffer", "[marl][net]") {
    Rng rng(23);
    Net net = small_relu_net(rng, {3, 4, 1});
    Mat x(3, 2);
    x << 0.3, -1.2, 0.8, 0.1, -0.5, 0.9;
    typename Net::Cache cache;
    net.forward(x, cache);
    Mat dy = Mat::Ones(1, 2);

    Vec once = Vec::Zero(net.param_count());
    net.backward(cache, dy, once);
    Vec twice = Vec::Zero(net.param_count());
    net.backward(cache, dy, twice);
    net.backward(cache, dy, twice);
    CHECK((twice - 2.0 * once).norm() == Catch::Approx(0.0).margin(1e-12));

    Vec short_grad = Vec::Zero(3);
    CHECK_THROWS_AS(net.backward(cache, dy, short_grad), std::invalid_argument);
    Mat bad_dy = Mat::Ones(2, 2);
    CHECK_THROWS_AS(net.backward(cache, bad_dy, once), std::invalid_argument);
}

TEST_CASE("he initialization scales hidden layers and damps the head",
          "[marl][net]") {
    Rng rng(41);
    Net net = small_relu_net(rng, {64, 128, 10});
    auto w0 = net.weight(0);
    double mean = w0.mean();
    double sq = (w0.array() - mean).square().mean();
    CHECK(std::sqrt(sq) == Catch::Approx(std::sqrt(2.0 / 64.0)).epsilon(0.1));
    CHECK(net.bias(0).norm() == 0.0);
    CHECK(net.bias(1).norm() == 0.0);
    CHECK(net.weight(1).cwiseAbs().maxCoeff() <= 3e-3);
    CHECK(net.weight(1).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("soft update blends and contracts toward the main network",
          "[marl][net]") {
    Rng rng(52);
    Net main = small_relu_net(rng, {3, 4, 2});
    Net target = small_relu_net(rng, {3, 4, 2});

    Net t1 = target;
    soft_update(main, t1, 1.0);
    CHECK((t1.params() - main.params()).norm() == 0.0);

    Net t0 = target;
    soft_update(main, t0, 0.0);
    CHECK((t0.params() - target.params()).norm() == 0.0);

    const double tau = 0.0005;
    Net t = target;
    soft_update(main, t, tau);
    // contraction identity: target' - main = (1 - tau) * (target - main)
    Vec lhs = t.params() - main.params();
    Vec rhs = (1.0 - tau) * (target.params() - main.params());
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() == Catch::Approx(0.0).margin(1e-12));

    // repeated blending converges geometrically
    double before = (t.params() - main.params()).norm();
    for (int i = 0; i < 100; ++i) soft_update(main, t, tau);
    double after = (t.params() - main.params()).norm();
    CHECK(after == Catch::Approx(std::pow(1.0 - tau, 100) * before).epsilon(1e-6));

    Vec mismatched = Vec::Zero(3);
    Vec target_params = t.params();
    CHECK_THROWS_AS(soft_update(mismatched, target_params, 0.5),
                    std::invalid_argument);
}

TEST_CASE("sgd and adam optimizers step as documented", "[marl][optimizer]") {
    Optimizer<double> sgd(OptimizerKind::kSgd, 0.1, 4);
    Vec p = Vec::Ones(4);
    Vec g(4);
    g << 1.0, -2.0, 0.0, 4.0;
    sgd.step(p, g);
    CHECK(p(0) == Catch::Approx(0.9));
    CHECK(p(1) == Catch::Approx(1.2));
    CHECK(p(2) == 1.0);
    CHECK(p(3) == Catch::Approx(0.6));

    // Adam's first bias-corrected step is lr * sign(g) up to eps rounding
    Optimizer<double> adam(OptimizerKind::kAdam, 0.01, 4);
    Vec q = Vec::Zero(4);
    adam.step(q, g);
    CHECK(q(0) == Catch::Approx(-0.01).epsilon(1e-4));
    CHECK(q(1) == Catch::Approx(0.01).epsilon(1e-4));
    CHECK(q(2) == 0.0);
    CHECK(q(3) == Catch::Approx(-0.01).epsilon(1e-4));
    CHECK(adam.steps_taken() == 1);

    CHECK_THROWS_AS(Optimizer<double>(OptimizerKind::kAdam, 0.0, 4),
                    std::invalid_argument);
    Vec wrong = Vec::Zero(2);
    CHECK_THROWS_AS(adam.step(q, wrong), std::invalid_argument);
}

TEST_CASE("adam descends a quadratic bowl", "[marl][optimizer]") {
    Optimizer<double> adam(OptimizerKind::kAdam, 0.05, 2);
    Vec p(2);
    p << 3.0, -2.0;
    for (int i = 0; i < 500; ++i) {
        Vec g = 2.0 * p;  // d/dp ||p||^2
        adam.step(p, g);
    }
    CHECK(p.norm() < 1e-2);
}

TEST_CASE("replay buffer is a fifo ring with distinct sampling",
          "[marl][replay]") {
    CHECK_THROWS_AS(ReplayBuffer<double>(0), std::invalid_argument);

    ReplayBuffer<double> buf(3);
    CHECK(buf.capacity() == 3);
    auto make = [](double tag) {
        Transition<double> t;
        t.global_reward = tag;
        return t;
    };
    for (int i = 1; i <= 5; ++i) buf.push(make(i));
    REQUIRE(buf.size() == 3);
    // oldest first: 3, 4, 5 survive
    CHECK(buf.at(0).global_reward == 3.0);
    CHECK(buf.at(1).global_reward == 4.0);
    CHECK(buf.at(2).global_reward == 5.0);
    CHECK_THROWS_AS(buf.at(3), std::out_of_range);

    ReplayBuffer<double> big(64);
    for (int i = 0; i < 10; ++i) big.push(make(i));
    Rng rng(6);
    CHECK_THROWS_AS(big.sample_indices(11, rng), std::invalid_argument);
    std::set<std::size_t> seen;
    for (int trial = 0; trial < 500; ++trial) {
        auto idx = big.sample_indices(5, rng);
        REQUIRE(idx.size() == 5);
        std::set<std::size_t> uniq(idx.begin(), idx.end());
        REQUIRE(uniq.size() == 5);  // distinct
        for (auto i : idx) {
            REQUIRE(i < 10);
            seen.insert(i);
        }
    }
    CHECK(seen.size() == 10);  // every position reachable
}

TEST_CASE("local reward balances staleness against the delivery bonus",
          "[marl][reward]") {
    // fully stale but delivering: the two terms cancel at V = 20
    CHECK(local_reward(100.0, 600e3, 500e3, 20) == Catch::Approx(0.0).margin(1e-15));
    CHECK(local_reward(100.0, 0.0, 500e3, 20) == Catch::Approx(-0.05));
    CHECK(local_reward(0.0, 600e3, 500e3, 20) == Catch::Approx(0.05));
    // exactly at the floor counts as delivered
    CHECK(local_reward(50.0, 500e3, 500e3, 20) ==
          Catch::Approx(-50.0 / 2000.0 + 0.05));
    CHECK(local_reward(50.0, 499.999e3, 500e3, 20) == Catch::Approx(-50.0 / 2000.0));
    CHECK(step_indicator(0.0) == 1.0);
    CHECK(step_indicator(-1e-12) == 0.0);
    CHECK_THROWS_AS(local_reward(1.0, 1.0, 1.0, 0), std::invalid_argument);
    CHECK_THROWS_AS(local_reward(1.0, 1.0, 1.0, 5, 0.0), std::invalid_argument);
}

TEST_CASE("global reward is the exact mean of the local rewards",
          "[marl][reward]") {
    Rng rng(61);
    for (int trial = 0; trial < 200; ++trial) {
        int n = 1 + static_cast<int>(rng.uniform_int(40));
        std::vector<double> locals(n);
        long double acc = 0.0L;
        for (auto& r : locals) {
            r = rng.uniform(-1.0, 1.0);
            acc += r;
        }
        double expected = static_cast<double>(acc / n);
        CHECK(global_reward(locals) == Catch::Approx(expected).margin(1e-14));
    }
    CHECK_THROWS_AS(global_reward({}), std::invalid_argument);
}

TEST_CASE("action helpers map logits onto the decision space", "[marl][agent]") {
    CHECK(sigmoid(0.0) == 0.5);
    CHECK(sigmoid(40.0) == Catch::Approx(1.0).margin(1e-12));
    CHECK(sigmoid(-40.0) == Catch::Approx(0.0).margin(1e-12));

    radio::AllocationDecision d;
    d.subchannel = 1;
    d.power_mw = 500.0;
    Vec a = to_action_vector<double>(d, 3, 1000.0);
    REQUIRE(a.size() == 4);
    CHECK(a(0) == 0.0);
    CHECK(a(1) == 1.0);
    CHECK(a(2) == 0.0);
    CHECK(a(3) == 0.5);
    d.subchannel = -1;  // silent: no one-hot bit set
    a = to_action_vector<double>(d, 3, 1000.0);
    CHECK(a.head(3).norm() == 0.0);

    Mat raw(4, 1);
    raw << 0.1, 2.0, -1.0, 0.3;
    Mat exec = executable_action_columns(raw);
    CHECK(exec(0, 0) == 0.0);
    CHECK(exec(1, 0) == 1.0);
    CHECK(exec(2, 0) == 0.0);
    CHECK(exec(3, 0) == Catch::Approx(sigmoid(0.3)));
}

TEST_CASE("relaxed actions form a tempered softmax over subchannels",
          "[marl][agent]") {
    Mat raw(4, 1);
    raw << 1.0, 2.0, 0.5, -0.7;
    Mat soft = relaxed_action_columns(raw, 1.0);
    double z = std::exp(1.0 - 2.0) + std::exp(0.0) + std::exp(0.5 - 2.0);
    CHECK(soft(0, 0) == Catch::Approx(std::exp(-1.0) / z));
    CHECK(soft(1, 0) == Catch::Approx(1.0 / z));
    CHECK(soft(2, 0) == Catch::Approx(std::exp(-1.5) / z));
    CHECK(soft.col(0).head(3).sum() == Catch::Approx(1.0).epsilon(1e-12));
    CHECK(soft(3, 0) == Catch::Approx(sigmoid(-0.7)));

    // lower temperature sharpens toward the argmax vertex
    Mat sharp = relaxed_action_columns(raw, 0.25);
    CHECK(sharp(1, 0) > soft(1, 0));
    CHECK(sharp(0, 0) < soft(0, 0));
    CHECK(sharp.col(0).head(3).sum() == Catch::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("relaxed action backward matches finite differences",
          "[marl][agent][gradcheck]") {
    Rng rng(71);
    for (double temp : {1.0, 0.25}) {
        Mat raw(5, 3);
        for (int j = 0; j < raw.cols(); ++j)
            for (int i = 0; i < raw.rows(); ++i) raw(i, j) = rng.normal();
        Mat weight(5, 3);
        for (int j = 0; j < weight.cols(); ++j)
            for (int i = 0; i < weight.rows(); ++i) weight(i, j) = rng.normal();

        auto objective = [&](const Mat& r) {
            return (relaxed_action_columns(r, temp).array() * weight.array()).sum();
        };
        Mat act = relaxed_action_columns(raw, temp);
        Mat draw = relaxed_action_backward(act, weight, temp);

        const double h = 1e-6;
        for (int j = 0; j < raw.cols(); ++j)
            for (int i = 0; i < raw.rows(); ++i) {
                Mat rp = raw, rm = raw;
                rp(i, j) += h;
                rm(i, j) -= h;
                double fd = (objective(rp) - objective(rm)) / (2.0 * h);
                CHECK(draw(i, j) == Catch::Approx(fd).margin(1e-6));
            }
    }
}

TEST_CASE("select_action is deterministic without exploration and bounded with",
          "[marl][agent]") {
    Rng rng(81);
    Net actor = small_relu_net(rng, {7, 16, 4});
    Vec state(7);
    for (int i = 0; i < 7; ++i) state(i) = rng.normal();

    Rng noise_rng(9);
    auto d1 = select_action(actor, state, false, 0.3, 1000.0, noise_rng);
    auto d2 = select_action(actor, state, false, 0.3, 1000.0, noise_rng);
    CHECK(d1.subchannel == d2.subchannel);
    CHECK(d1.power_mw == d2.power_mw);

    Vec raw = actor.forward(state);
    int best = 0;
    for (int i = 1; i < 3; ++i)
        if (raw(i) > raw(best)) best = i;
    CHECK(d1.subchannel == best);
    CHECK(d1.power_mw == Catch::Approx(1000.0 * sigmoid(raw(3))));

    bool saw_other_channel = false;
    for (int i = 0; i < 3000; ++i) {
        auto d = select_action(actor, state, true, 0.5, 1000.0, noise_rng, 1.0);
        CHECK(d.subchannel >= 0);
        CHECK(d.subchannel < 3);
        CHECK(d.power_mw >= 0.0);
        CHECK(d.power_mw <= 1000.0);
        saw_other_channel |= (d.subchannel != best);
    }
    CHECK(saw_other_channel);
}

TEST_CASE("exploration noise still moves a saturated power head",
          "[marl][agent]") {
    // an actor stuck at "never transmit" (power logit -40) must remain
    // explorable: noise acts on the squashed fraction, not the dead logit
    Net actor({3, 4}, {Activation::kLinear});
    actor.bias(0) << 0.0, 0.0, 0.0, -40.0;
    Vec state = Vec::Zero(3);

    Rng rng(5);
    auto quiet = select_action(actor, state, false, 0.3, 1000.0, rng);
    CHECK(quiet.power_mw == Catch::Approx(0.0).margin(1e-9));

    int loud = 0;
    double max_power = 0.0;
    for (int i = 0; i < 2000; ++i) {
        auto d = select_action(actor, state, true, 0.3, 1000.0, rng);
        REQUIRE(d.power_mw >= 0.0);
        REQUIRE(d.power_mw <= 1000.0);
        if (d.power_mw > 1.0) ++loud;
        max_power = std::max(max_power, d.power_mw);
    }
    // roughly half the gaussian perturbations push the fraction above zero
    CHECK(loud > 600);
    CHECK(max_power > 300.0);
}
