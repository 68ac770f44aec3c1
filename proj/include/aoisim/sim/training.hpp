#pragma once

#include <cmath>
#include <functional>
#include <ostream>
#include <utility>
#include <vector>

#include "aoisim/common/config.hpp"
#include "aoisim/common/rng.hpp"
#include "aoisim/marl/replay_buffer.hpp"
#include "aoisim/marl/trainer.hpp"
#include "aoisim/sim/episode.hpp"
#include "aoisim/sim/environment.hpp"

namespace aoisim::sim {

struct TrainingRow {
    long episode = 0;
    double avg_reward = 0.0;
    double avg_aoi_ms = 0.0;
    double exploration_scale = 0.0;
};

template <typename Scalar>
struct TrainOutput {
    marl::Trainer<Scalar> trainer;
    std::vector<TrainingRow> rows;
    double final_noise_scale = 0.0;
};

// Full training run. The master seed fans out into separate
// substreams for network initialization, exploration/minibatch draws and the
// channel world, so the run is bit-reproducible.
template <typename Scalar = float>
TrainOutput<Scalar> train(
    const ScenarioConfig& cfg,
    const std::function<void(const TrainingRow&)>& on_episode = {}) {
    cfg.validate();
    Rng master(cfg.seed);
    Rng init_rng = master.substream(101);
    Rng train_rng = master.substream(202);
    RadioEnvironment env(cfg.env, master.substream(303).next_u64());

    TrainOutput<Scalar> out{
        marl::Trainer<Scalar>(cfg.trainer_config<Scalar>(), init_rng),
        {},
        cfg.learning.noise_at_episode(0)};
    marl::ReplayBuffer<Scalar> buffer(cfg.learning.replay_capacity);
    out.rows.reserve(static_cast<std::size_t>(cfg.learning.episodes));
    for (long ep = 0; ep < cfg.learning.episodes; ++ep) {
        double noise = cfg.learning.noise_at_episode(ep);
        EpisodeLog log = run_episode(env, out.trainer, buffer, true, noise, train_rng,
                                     static_cast<marl::UpdateStats<Scalar>*>(nullptr),
                                     cfg.learning.noise_clip);
        TrainingRow row{ep, log.mean_global_reward(), log.mean_aoi_ms(), noise};
        out.rows.push_back(row);
        out.final_noise_scale = noise;
        if (on_episode) on_episode(row);
    }
    return out;
}

inline void write_training_csv(std::ostream& out,
                               const std::vector<TrainingRow>& rows) {
    out << "episode,avg_reward,avg_aoi_ms,exploration_scale\n";
    for (const auto& r : rows)
        out << r.episode << ',' << r.avg_reward << ',' << r.avg_aoi_ms << ','
            << r.exploration_scale << '\n';
}

struct EvalResult {
    double avg_aoi_ms = 0.0;
    double ci_half_width_ms = 0.0;  // 95%, normal approximation over episodes
    int episodes = 0;
    std::vector<double> per_episode_aoi_ms;
};

// Noise-free rollouts of the trained policy; nothing is learned and the
// transitions are discarded.
template <typename Scalar>
EvalResult evaluate(RadioEnvironment& env, marl::Trainer<Scalar>& trainer,
                    int episodes, Rng& rng) {
    if (episodes < 1)
        throw std::invalid_argument("evaluate: episodes must be >= 1");
    int slots = env.params().slots_per_episode();
    marl::ReplayBuffer<Scalar> scratch(
        static_cast<std::size_t>(episodes) * static_cast<std::size_t>(slots));
    EvalResult res;
    res.episodes = episodes;
    res.per_episode_aoi_ms.reserve(static_cast<std::size_t>(episodes));
    for (int e = 0; e < episodes; ++e) {
        EpisodeLog log = run_episode(env, trainer, scratch, false, 0.0, rng);
        res.per_episode_aoi_ms.push_back(log.mean_aoi_ms());
    }
    double sum = 0.0;
    for (double a : res.per_episode_aoi_ms) sum += a;
    res.avg_aoi_ms = sum / episodes;
    if (episodes > 1) {
        double ss = 0.0;
        for (double a : res.per_episode_aoi_ms)
            ss += (a - res.avg_aoi_ms) * (a - res.avg_aoi_ms);
        double sd = std::sqrt(ss / (episodes - 1));
        res.ci_half_width_ms = 1.96 * sd / std::sqrt(static_cast<double>(episodes));
    }
    return res;
}

inline void write_eval_json(std::ostream& out, const EvalResult& r) {
    nlohmann::json j{{"avg_aoi_ms", r.avg_aoi_ms},
                     {"ci_half_width_ms", r.ci_half_width_ms},
                     {"episodes", r.episodes},
                     {"per_episode_aoi_ms", r.per_episode_aoi_ms}};
    out << j.dump(2) << "\n";
}

}  // namespace aoisim::sim
