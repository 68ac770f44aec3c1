#pragma once

#include <stdexcept>
#include <vector>

namespace aoisim::marl {

inline constexpr double kRateBonus = 0.05;

// Rate-constraint indicator: 1 when the constraint is met, else 0.
inline double step_indicator(double x) { return x >= 0.0 ? 1.0 : 0.0; }

// r_l = -A/(V*A_max) + 0.05*G(C - C_min). The AoI term is normalized so both
// terms are O(1); the bonus is positive when the slot's delivery succeeded.
inline double local_reward(double aoi_ms, double rate_bps, double rate_floor_bps,
                           int num_agents, double aoi_max_ms = 100.0) {
    if (num_agents <= 0)
        throw std::invalid_argument("local_reward: num_agents must be > 0");
    if (aoi_max_ms <= 0.0)
        throw std::invalid_argument("local_reward: aoi_max must be > 0");
    return -aoi_ms / (num_agents * aoi_max_ms) +
           kRateBonus * step_indicator(rate_bps - rate_floor_bps);
}

// r_g = (1/V) * sum of local rewards.
inline double global_reward(const std::vector<double>& local_rewards) {
    if (local_rewards.empty())
        throw std::invalid_argument("global_reward: empty reward list");
    double sum = 0.0;
    for (double r : local_rewards) sum += r;
    return sum / static_cast<double>(local_rewards.size());
}

}  // namespace aoisim::marl
