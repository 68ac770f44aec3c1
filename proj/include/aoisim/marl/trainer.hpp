#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "aoisim/common/rng.hpp"
#include "aoisim/marl/agent.hpp"
#include "aoisim/marl/dense_network.hpp"
#include "aoisim/marl/optimizer.hpp"
#include "aoisim/marl/replay_buffer.hpp"

namespace aoisim::marl {

// TD3-style delayed policy updates: actors (and their targets) move only on
// gated episodes.
inline bool delayed_policy_gate(long episode_index, int period) {
    if (period < 1) throw std::invalid_argument("delayed_policy_gate: period >= 1");
    return episode_index % period == 0;
}

template <typename Scalar>
struct TrainerConfig {
    int num_agents = 20;
    int num_subchannels = 3;
    Scalar gamma = Scalar(0.99);
    Scalar tau = Scalar(0.0005);
    Scalar actor_lr = Scalar(1e-4);
    Scalar critic_lr = Scalar(1e-3);
    int policy_delay = 2;
    int batch_size = 64;
    // Inner iterations of the per-episode learning block, each on a fresh
    // minibatch. The loss-minimization step of the learning block is an
    // optimization loop, not a single descent step; with one iteration a
    // 100-slot episode contributes 100 transitions but only one critic step,
    // which leaves the bootstrapped targets frozen near their initialization
    // for any practical episode budget.
    int updates_per_episode = 1;
    // Transitions that must be buffered before any gradient step runs; the
    // early buffer then holds a diverse (exploration-dominated) action mix.
    int learning_starts = 64;
    // Softmax temperature of the actor's differentiable action surrogate.
    // Lower values evaluate the critics closer to the executable one-hot.
    Scalar surrogate_temperature = Scalar(1);
    // L2 penalty on the actor's pre-squash outputs. Keeps the logits and the
    // power head out of saturation so exploration noise and squash gradients
    // stay effective throughout training.
    Scalar actor_output_reg = Scalar(1e-3);
    std::vector<int> actor_hidden{1024, 512};
    std::vector<int> critic_hidden{1024, 512, 256};
    OptimizerKind optimizer = OptimizerKind::kAdam;

    int state_dim() const { return 2 * num_subchannels + 1; }
    int action_dim() const { return num_subchannels + 1; }
    int joint_state_dim() const { return num_agents * state_dim(); }
    int joint_action_dim() const { return num_agents * action_dim(); }

    void validate() const {
        if (num_agents < 1 || num_subchannels < 1)
            throw std::invalid_argument("trainer: need >= 1 agent and subchannel");
        if (!(gamma > Scalar(0) && gamma < Scalar(1)))
            throw std::invalid_argument("trainer: gamma must be in (0,1)");
        if (!(tau > Scalar(0) && tau <= Scalar(1)))
            throw std::invalid_argument("trainer: tau must be in (0,1]");
        if (actor_lr <= Scalar(0) || critic_lr <= Scalar(0))
            throw std::invalid_argument("trainer: learning rates must be > 0");
        if (policy_delay < 1)
            throw std::invalid_argument("trainer: policy_delay must be >= 1");
        if (batch_size < 1)
            throw std::invalid_argument("trainer: batch_size must be >= 1");
        if (updates_per_episode < 1)
            throw std::invalid_argument("trainer: updates_per_episode must be >= 1");
        if (learning_starts < batch_size)
            throw std::invalid_argument("trainer: learning_starts must be >= batch_size");
        if (!(surrogate_temperature > Scalar(0)))
            throw std::invalid_argument("trainer: surrogate_temperature must be > 0");
        if (actor_output_reg < Scalar(0))
            throw std::invalid_argument("trainer: actor_output_reg must be >= 0");
    }
};

template <typename Scalar>
struct Batch {
    using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    using Row = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;
    Mat joint_state;       // Ds x S
    Mat joint_action;      // Da x S
    Mat local_rewards;     // V x S
    Row global_reward;     // 1 x S
    Mat next_joint_state;  // Ds x S
    Row done;              // 1 x S

    Eigen::Index size() const { return joint_state.cols(); }
};

template <typename Scalar>
struct UpdateStats {
    bool updated = false;
    bool policy_updated = false;
    Scalar global_loss1 = 0, global_loss2 = 0;
    Scalar mean_local_loss = 0;
    Scalar mean_actor_grad_norm = 0;
};

// Owns the per-agent actors and local critics, the twin global critics, all
// targets and optimizer states, and runs the per-episode update block.
template <typename Scalar>
class Trainer {
  public:
    using Net = DenseNetwork<Scalar>;
    using Vec = typename Net::Vec;
    using Mat = typename Net::Mat;
    using Row = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

    Trainer(TrainerConfig<Scalar> cfg, Rng& rng) : cfg_(std::move(cfg)) {
        cfg_.validate();
        std::vector<int> actor_w{cfg_.state_dim()};
        actor_w.insert(actor_w.end(), cfg_.actor_hidden.begin(), cfg_.actor_hidden.end());
        actor_w.push_back(cfg_.action_dim());
        std::vector<int> local_w{cfg_.state_dim() + cfg_.action_dim()};
        local_w.insert(local_w.end(), cfg_.critic_hidden.begin(), cfg_.critic_hidden.end());
        local_w.push_back(1);
        std::vector<int> global_w{cfg_.joint_state_dim() + cfg_.joint_action_dim()};
        global_w.insert(global_w.end(), cfg_.critic_hidden.begin(),
                        cfg_.critic_hidden.end());
        global_w.push_back(1);

        auto acts = [](std::size_t layers) {
            std::vector<Activation> a(layers, Activation::kRelu);
            a.back() = Activation::kLinear;
            return a;
        };
        for (int v = 0; v < cfg_.num_agents; ++v) {
            actors_.push_back(Net::he_init(actor_w, acts(actor_w.size() - 1), rng));
            local_critics_.push_back(Net::he_init(local_w, acts(local_w.size() - 1), rng));
        }
        global1_ = Net::he_init(global_w, acts(global_w.size() - 1), rng);
        global2_ = Net::he_init(global_w, acts(global_w.size() - 1), rng);
        actor_targets_ = actors_;
        local_critic_targets_ = local_critics_;
        global1_target_ = global1_;
        global2_target_ = global2_;

        for (int v = 0; v < cfg_.num_agents; ++v) {
            actor_opts_.emplace_back(cfg_.optimizer, cfg_.actor_lr,
                                     actors_[static_cast<std::size_t>(v)].param_count());
            local_opts_.emplace_back(
                cfg_.optimizer, cfg_.critic_lr,
                local_critics_[static_cast<std::size_t>(v)].param_count());
        }
        global1_opt_ = Optimizer<Scalar>(cfg_.optimizer, cfg_.critic_lr,
                                         global1_.param_count());
        global2_opt_ = Optimizer<Scalar>(cfg_.optimizer, cfg_.critic_lr,
                                         global2_.param_count());
    }

    const TrainerConfig<Scalar>& config() const { return cfg_; }
    long episodes_trained() const { return episodes_trained_; }
    void set_episodes_trained(long n) { episodes_trained_ = n; }

    std::vector<Net>& actors() { return actors_; }
    std::vector<Net>& actor_targets() { return actor_targets_; }
    std::vector<Net>& local_critics() { return local_critics_; }
    std::vector<Net>& local_critic_targets() { return local_critic_targets_; }
    Net& global_critic(int i) { return i == 0 ? global1_ : global2_; }
    Net& global_critic_target(int i) { return i == 0 ? global1_target_ : global2_target_; }
    const std::vector<Net>& actors() const { return actors_; }
    const std::vector<Net>& actor_targets() const { return actor_targets_; }
    const std::vector<Net>& local_critics() const { return local_critics_; }
    const std::vector<Net>& local_critic_targets() const { return local_critic_targets_; }
    const Net& global_critic(int i) const { return i == 0 ? global1_ : global2_; }
    const Net& global_critic_target(int i) const {
        return i == 0 ? global1_target_ : global2_target_;
    }

    Batch<Scalar> assemble_batch(const ReplayBuffer<Scalar>& buffer,
                                 const std::vector<std::size_t>& idx) const {
        Batch<Scalar> b;
        auto s = static_cast<Eigen::Index>(idx.size());
        b.joint_state.resize(cfg_.joint_state_dim(), s);
        b.joint_action.resize(cfg_.joint_action_dim(), s);
        b.local_rewards.resize(cfg_.num_agents, s);
        b.global_reward.resize(s);
        b.next_joint_state.resize(cfg_.joint_state_dim(), s);
        b.done.resize(s);
        for (Eigen::Index j = 0; j < s; ++j) {
            const Transition<Scalar>& t = buffer.at(idx[static_cast<std::size_t>(j)]);
            b.joint_state.col(j) = t.joint_state;
            b.joint_action.col(j) = t.joint_action;
            b.local_rewards.col(j) = t.local_rewards;
            b.global_reward(j) = t.global_reward;
            b.next_joint_state.col(j) = t.next_joint_state;
            b.done(j) = t.done;
        }
        return b;
    }

    // Joint a' from the target actors, in executable (one-hot) form.
    Mat target_joint_actions(const Mat& next_joint_state) const {
        Mat out(cfg_.joint_action_dim(), next_joint_state.cols());
        for (int v = 0; v < cfg_.num_agents; ++v) {
            Mat raw = actor_targets_[static_cast<std::size_t>(v)].forward(
                agent_state_block(next_joint_state, v));
            out.middleRows(v * cfg_.action_dim(), cfg_.action_dim()) =
                executable_action_columns(raw);
        }
        return out;
    }

    // y_G = r_g + gamma * (1 - done) * min(Q1', Q2') at the target actions.
    Row twin_global_target(const Batch<Scalar>& b, const Mat& next_actions) const {
        Mat x = joined(b.next_joint_state, next_actions);
        Row q1 = global1_target_.forward(x).row(0);
        Row q2 = global2_target_.forward(x).row(0);
        Row ymin = q1.cwiseMin(q2);
        return (b.global_reward.array() +
                cfg_.gamma * (Scalar(1) - b.done.array()) * ymin.array())
            .matrix();
    }

    Scalar global_critic_loss(int which, const Batch<Scalar>& b, const Row& y) const {
        const Net& net = which == 0 ? global1_ : global2_;
        Row q = net.forward(joined(b.joint_state, b.joint_action)).row(0);
        return (q - y).squaredNorm() / static_cast<Scalar>(b.size());
    }

    Scalar global_critic_gradient(int which, const Batch<Scalar>& b, const Row& y,
                                  Vec& grad) {
        Net& net = which == 0 ? global1_ : global2_;
        typename Net::Cache cache;
        Row q = net.forward(joined(b.joint_state, b.joint_action), cache).row(0);
        Row dq = Scalar(2) * (q - y) / static_cast<Scalar>(b.size());
        grad.setZero();
        net.backward(cache, dq, grad);
        return (q - y).squaredNorm() / static_cast<Scalar>(b.size());
    }

    std::pair<Scalar, Scalar> update_global_critics(const Batch<Scalar>& b, const Row& y) {
        ensure_scratch();
        Scalar l1 = global_critic_gradient(0, b, y, global_grad_);
        global1_opt_.step(global1_.params(), global_grad_);
        Scalar l2 = global_critic_gradient(1, b, y, global_grad_);
        global2_opt_.step(global2_.params(), global_grad_);
        return {l1, l2};
    }

    // y_v = r_v + gamma * (1 - done) * Q'_v(s'_v, a'_v), a'_v from the target actor.
    Row local_target(int v, const Batch<Scalar>& b, const Mat& next_actions) const {
        Mat x = joined(agent_state_block(b.next_joint_state, v),
                       next_actions.middleRows(v * cfg_.action_dim(), cfg_.action_dim()));
        Row q = local_critic_targets_[static_cast<std::size_t>(v)].forward(x).row(0);
        return (b.local_rewards.row(v).array() +
                cfg_.gamma * (Scalar(1) - b.done.array()) * q.array())
            .matrix();
    }

    Scalar local_critic_loss(int v, const Batch<Scalar>& b, const Row& y) const {
        Mat x = joined(agent_state_block(b.joint_state, v),
                       b.joint_action.middleRows(v * cfg_.action_dim(), cfg_.action_dim()));
        Row q = local_critics_[static_cast<std::size_t>(v)].forward(x).row(0);
        return (q - y).squaredNorm() / static_cast<Scalar>(b.size());
    }

    Scalar local_critic_gradient(int v, const Batch<Scalar>& b, const Row& y, Vec& grad) {
        Net& net = local_critics_[static_cast<std::size_t>(v)];
        typename Net::Cache cache;
        Mat x = joined(agent_state_block(b.joint_state, v),
                       b.joint_action.middleRows(v * cfg_.action_dim(), cfg_.action_dim()));
        Row q = net.forward(x, cache).row(0);
        Row dq = Scalar(2) * (q - y) / static_cast<Scalar>(b.size());
        grad.setZero();
        net.backward(cache, dq, grad);
        return (q - y).squaredNorm() / static_cast<Scalar>(b.size());
    }

    Scalar update_local_critic(int v, const Batch<Scalar>& b, const Row& y) {
        ensure_scratch();
        Scalar loss = local_critic_gradient(v, b, y, local_grad_);
        local_opts_[static_cast<std::size_t>(v)].step(
            local_critics_[static_cast<std::size_t>(v)].params(), local_grad_);
        return loss;
    }

    // Deterministic-policy objective for agent v: the batch-mean of
    //   Q1_global(s, a with agent v's slot replaced by pi_v(s_v)) + Q_v(s_v, pi_v(s_v))
    // using the differentiable softmax/sigmoid surrogate of the action head,
    // plus the pre-squash output penalty. Returned as a LOSS (negated critics)
    // so gradient descent ascends them.
    Scalar actor_objective(int v, const Batch<Scalar>& b) const {
        Mat raw = actors_[static_cast<std::size_t>(v)].forward(
            agent_state_block(b.joint_state, v));
        Mat act = relaxed_action_columns(raw, cfg_.surrogate_temperature);
        Mat xg = joined(b.joint_state, b.joint_action);
        xg.middleRows(cfg_.joint_state_dim() + v * cfg_.action_dim(), cfg_.action_dim()) =
            act;
        Scalar qg = global1_.forward(xg).row(0).sum();
        Scalar ql = local_critics_[static_cast<std::size_t>(v)]
                        .forward(joined(agent_state_block(b.joint_state, v), act))
                        .row(0)
                        .sum();
        Scalar reg = cfg_.actor_output_reg * Scalar(0.5) * raw.squaredNorm();
        return (-(qg + ql) + reg) / static_cast<Scalar>(b.size());
    }

    Scalar actor_gradient(int v, const Batch<Scalar>& b, Vec& grad) {
        auto vi = static_cast<std::size_t>(v);
        typename Net::Cache actor_cache, global_cache, local_cache;
        const Mat& raw =
            actors_[vi].forward(agent_state_block(b.joint_state, v), actor_cache);
        Mat act = relaxed_action_columns(raw, cfg_.surrogate_temperature);

        Mat xg = joined(b.joint_state, b.joint_action);
        Eigen::Index slot = cfg_.joint_state_dim() + v * cfg_.action_dim();
        xg.middleRows(slot, cfg_.action_dim()) = act;
        Row qg = global1_.forward(xg, global_cache).row(0);

        Mat xl = joined(agent_state_block(b.joint_state, v), act);
        Row ql = local_critics_[vi].forward(xl, local_cache).row(0);

        Row dq = Row::Constant(b.size(), Scalar(-1) / static_cast<Scalar>(b.size()));
        Mat dxg = global1_.backward_input(global_cache, dq);
        Mat dxl = local_critics_[vi].backward_input(local_cache, dq);
        Mat dact = dxg.middleRows(slot, cfg_.action_dim()) +
                   dxl.middleRows(cfg_.state_dim(), cfg_.action_dim());

        Mat draw = relaxed_action_backward(act, dact, cfg_.surrogate_temperature);
        Scalar inv_s = Scalar(1) / static_cast<Scalar>(b.size());
        draw += (cfg_.actor_output_reg * inv_s) * raw;
        grad.setZero();
        actors_[vi].backward(actor_cache, draw, grad);
        Scalar reg = cfg_.actor_output_reg * Scalar(0.5) * raw.squaredNorm();
        return (-(qg.sum() + ql.sum()) + reg) * inv_s;
    }

    Scalar update_actor(int v, const Batch<Scalar>& b) {
        ensure_scratch();
        actor_gradient(v, b, actor_grad_);
        Scalar norm = actor_grad_.norm();
        actor_opts_[static_cast<std::size_t>(v)].step(
            actors_[static_cast<std::size_t>(v)].params(), actor_grad_);
        return norm;
    }

    void soft_update_global_targets() {
        soft_update(global1_.params(), global1_target_.params(), cfg_.tau);
        soft_update(global2_.params(), global2_target_.params(), cfg_.tau);
    }

    void soft_update_agent_targets(int v) {
        auto vi = static_cast<std::size_t>(v);
        soft_update(actors_[vi].params(), actor_targets_[vi].params(), cfg_.tau);
        soft_update(local_critics_[vi].params(), local_critic_targets_[vi].params(),
                    cfg_.tau);
    }

    // The per-episode learning block. Loss minimization is
    // run as updates_per_episode inner iterations, each on a fresh minibatch:
    // one gradient step for each global critic with its target blend, and on
    // gated episodes one step for every local critic and actor followed by
    // their target blends. Reported stats come from the last iteration.
    UpdateStats<Scalar> end_of_episode_update(const ReplayBuffer<Scalar>& buffer,
                                              Rng& rng) {
        UpdateStats<Scalar> stats;
        long episode = episodes_trained_++;
        if (buffer.size() < static_cast<std::size_t>(
                                std::max(cfg_.batch_size, cfg_.learning_starts)))
            return stats;
        stats.updated = true;

        for (int it = 0; it < cfg_.updates_per_episode; ++it) {
            Batch<Scalar> b = assemble_batch(
                buffer,
                buffer.sample_indices(static_cast<std::size_t>(cfg_.batch_size), rng));
            Mat next_actions = target_joint_actions(b.next_joint_state);
            Row yg = twin_global_target(b, next_actions);
            auto [l1, l2] = update_global_critics(b, yg);
            stats.global_loss1 = l1;
            stats.global_loss2 = l2;
            soft_update_global_targets();

            if (delayed_policy_gate(episode, cfg_.policy_delay)) {
                stats.policy_updated = true;
                stats.mean_local_loss = 0;
                stats.mean_actor_grad_norm = 0;
                for (int v = 0; v < cfg_.num_agents; ++v) {
                    Row yv = local_target(v, b, next_actions);
                    stats.mean_local_loss += update_local_critic(v, b, yv);
                    stats.mean_actor_grad_norm += update_actor(v, b);
                    soft_update_agent_targets(v);
                }
                stats.mean_local_loss /= static_cast<Scalar>(cfg_.num_agents);
                stats.mean_actor_grad_norm /= static_cast<Scalar>(cfg_.num_agents);
            }
        }
        return stats;
    }

  private:
    Mat agent_state_block(const Mat& joint, int v) const {
        return joint.middleRows(v * cfg_.state_dim(), cfg_.state_dim());
    }

    static Mat joined(const Mat& top, const Mat& bottom) {
        Mat x(top.rows() + bottom.rows(), top.cols());
        x.topRows(top.rows()) = top;
        x.bottomRows(bottom.rows()) = bottom;
        return x;
    }

    void ensure_scratch() {
        if (global_grad_.size() != global1_.param_count())
            global_grad_.resize(global1_.param_count());
        if (!actors_.empty() && actor_grad_.size() != actors_[0].param_count())
            actor_grad_.resize(actors_[0].param_count());
        if (!local_critics_.empty() &&
            local_grad_.size() != local_critics_[0].param_count())
            local_grad_.resize(local_critics_[0].param_count());
    }

    TrainerConfig<Scalar> cfg_;
    std::vector<Net> actors_, actor_targets_, local_critics_, local_critic_targets_;
    Net global1_, global2_, global1_target_, global2_target_;
    std::vector<Optimizer<Scalar>> actor_opts_, local_opts_;
    Optimizer<Scalar> global1_opt_, global2_opt_;
    Vec global_grad_, actor_grad_, local_grad_;
    long episodes_trained_ = 0;
};

}  // namespace aoisim::marl
