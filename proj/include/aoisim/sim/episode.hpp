#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "aoisim/common/rng.hpp"
#include "aoisim/marl/agent.hpp"
#include "aoisim/marl/replay_buffer.hpp"
#include "aoisim/marl/trainer.hpp"
#include "aoisim/sim/environment.hpp"

namespace aoisim::sim {

// Everything observable about one episode: per-slot AoI, rewards, the
// executed allocations and achieved rates. Aggregates are recomputable from
// the per-slot data (and the tests do recompute them).
struct EpisodeLog {
    int slots = 0;
    int vehicles = 0;
    Eigen::MatrixXd aoi_ms;         // T x V, post-slot values
    Eigen::MatrixXd local_rewards;  // T x V
    Eigen::VectorXd global_rewards; // T
    Eigen::MatrixXi subchannel;     // T x V, -1 = silent
    Eigen::MatrixXd power_mw;       // T x V
    Eigen::MatrixXd rate_bps;       // T x V
    Eigen::MatrixXd gain_linear;    // T x V, h on the chosen subchannel

    EpisodeLog() = default;
    EpisodeLog(int t, int v)
        : slots(t),
          vehicles(v),
          aoi_ms(t, v),
          local_rewards(t, v),
          global_rewards(t),
          subchannel(Eigen::MatrixXi::Constant(t, v, -1)),
          power_mw(t, v),
          rate_bps(t, v),
          gain_linear(t, v) {}

    void record(int t, const std::vector<radio::AllocationDecision>& actions,
                const SlotResult& r) {
        for (int v = 0; v < vehicles; ++v) {
            subchannel(t, v) = actions[static_cast<std::size_t>(v)].subchannel;
            power_mw(t, v) = actions[static_cast<std::size_t>(v)].power_mw;
        }
        aoi_ms.row(t) = r.aoi_ms.transpose();
        local_rewards.row(t) = r.local_rewards.transpose();
        rate_bps.row(t) = r.rate_bps.transpose();
        gain_linear.row(t) = r.gain_linear.transpose();
        global_rewards(t) = r.global_reward;
    }

    double mean_aoi_ms() const { return aoi_ms.mean(); }
    double mean_global_reward() const { return global_rewards.mean(); }
};

// Replays the AoI recurrence from the logged allocations and rates and checks
// the logged AoI trajectory slot by slot.
inline bool aoi_accounting_consistent(const EpisodeLog& log,
                                      const radio::ChannelParams& p,
                                      double tol = 1e-9) {
    for (int v = 0; v < log.vehicles; ++v) {
        double aoi = 0.0;
        for (int t = 0; t < log.slots; ++t) {
            aoi = radio::update_aoi(aoi, log.rate_bps(t, v), log.subchannel(t, v) >= 0,
                                    p.rate_floor_bps, p);
            if (std::abs(aoi - log.aoi_ms(t, v)) > tol) return false;
        }
    }
    return true;
}

// Scripted-policy rollout: the callback sees (vehicle, observation) and
// returns the decision. No learning, no replay storage.
using PolicyFn =
    std::function<radio::AllocationDecision(int, const Eigen::VectorXd&)>;

inline EpisodeLog run_episode(RadioEnvironment& env, const PolicyFn& policy) {
    const auto& p = env.params();
    int slots = p.slots_per_episode();
    int n_vehicles = env.num_vehicles();
    EpisodeLog log(slots, n_vehicles);
    env.begin_episode();
    std::vector<radio::AllocationDecision> actions(
        static_cast<std::size_t>(n_vehicles));
    for (int t = 0; t < slots; ++t) {
        env.advance_fading();
        for (int v = 0; v < n_vehicles; ++v)
            actions[static_cast<std::size_t>(v)] = policy(v, env.observation(v));
        log.record(t, actions, env.apply_actions(actions));
    }
    return log;
}

// One training episode: actor rollout (exploring when learning), replay
// storage with the terminal flag on the last slot, then the end-of-episode
// update block. `rng` drives exploration noise and minibatch sampling only;
// the channel keeps its own substreams.
template <typename Scalar>
EpisodeLog run_episode(RadioEnvironment& env, marl::Trainer<Scalar>& trainer,
                       marl::ReplayBuffer<Scalar>& buffer, bool learn,
                       double noise_scale, Rng& rng,
                       marl::UpdateStats<Scalar>* stats_out = nullptr,
                       double noise_clip = marl::kNoiseClip) {
    using Vec = typename marl::DenseNetwork<Scalar>::Vec;
    const auto& cfg = trainer.config();
    if (cfg.num_agents != env.num_vehicles() ||
        cfg.num_subchannels != env.params().num_subchannels)
        throw std::invalid_argument("run_episode: trainer/environment shape mismatch");

    const auto& p = env.params();
    int slots = p.slots_per_episode();
    int n_vehicles = env.num_vehicles();
    int sd = cfg.state_dim();
    int ad = cfg.action_dim();
    double p_max = p.max_power_mw();

    EpisodeLog log(slots, n_vehicles);
    env.begin_episode();
    env.advance_fading();
    Vec obs = env.joint_observation().template cast<Scalar>();
    std::vector<radio::AllocationDecision> actions(
        static_cast<std::size_t>(n_vehicles));
    for (int t = 0; t < slots; ++t) {
        marl::Transition<Scalar> tr;
        tr.joint_state = obs;
        tr.joint_action.resize(n_vehicles * ad);
        for (int v = 0; v < n_vehicles; ++v) {
            Vec sv = obs.segment(v * sd, sd);
            actions[static_cast<std::size_t>(v)] = marl::select_action(
                trainer.actors()[static_cast<std::size_t>(v)], sv, learn,
                noise_scale, p_max, rng, noise_clip);
            tr.joint_action.segment(v * ad, ad) = marl::to_action_vector<Scalar>(
                actions[static_cast<std::size_t>(v)], cfg.num_subchannels, p_max);
        }
        SlotResult r = env.apply_actions(actions);
        log.record(t, actions, r);

        env.advance_fading();
        Vec next_obs = env.joint_observation().template cast<Scalar>();
        tr.local_rewards = r.local_rewards.template cast<Scalar>();
        tr.global_reward = static_cast<Scalar>(r.global_reward);
        tr.next_joint_state = next_obs;
        tr.done = t + 1 == slots ? Scalar(1) : Scalar(0);
        buffer.push(std::move(tr));
        obs = std::move(next_obs);
    }
    if (learn) {
        auto stats = trainer.end_of_episode_update(buffer, rng);
        if (stats_out) *stats_out = stats;
    } else if (stats_out) {
        *stats_out = {};
    }
    return log;
}

}  // namespace aoisim::sim
