#pragma once

#include <cmath>
#include <stdexcept>

namespace aoisim::traffic {

inline constexpr double kDefaultBprAlpha = 0.15;
inline constexpr double kDefaultBprBeta = 4.0;

// Degraded capacities are floored here so the BPR term stays finite even
// when the staleness error swallows the whole capacity.
inline constexpr double kCapacityFloorVph = 0.1;

// Volume-delay function: T(F) = T0 * (1 + alpha * (F/Ca)^beta).
inline double bpr_travel_time(double free_flow_time_s, double flow_vph,
                              double capacity_vph, double alpha = kDefaultBprAlpha,
                              double beta = kDefaultBprBeta) {
    if (free_flow_time_s <= 0.0)
        throw std::invalid_argument("bpr_travel_time: free_flow_time must be > 0");
    if (capacity_vph <= 0.0)
        throw std::invalid_argument("bpr_travel_time: capacity must be > 0");
    if (flow_vph < 0.0)
        throw std::invalid_argument("bpr_travel_time: flow must be >= 0");
    return free_flow_time_s * (1.0 + alpha * std::pow(flow_vph / capacity_vph, beta));
}

// Effective road capacity implied by stale information: incidents the
// planner has not heard about yet leave the real capacity below the mapped
// (normal-conditions) value by a deviation that scales linearly from 0
// (fresh data) to delta_m (aoi at aoi_max). Returns
// mapped_capacity - (aoi/aoi_max) * delta_m, floored to keep the BPR term
// finite.
inline double estimate_capacity(double mapped_capacity_vph, double aoi_ms,
                                double aoi_max_ms, double delta_m_vph,
                                double floor_vph = kCapacityFloorVph) {
    if (aoi_max_ms <= 0.0)
        throw std::invalid_argument("estimate_capacity: aoi_max must be > 0");
    if (aoi_ms < 0.0 || aoi_ms > aoi_max_ms)
        throw std::invalid_argument("estimate_capacity: aoi must be in [0, aoi_max]");
    if (delta_m_vph < 0.0)
        throw std::invalid_argument("estimate_capacity: delta_m must be >= 0");
    double deviation = (aoi_ms / aoi_max_ms) * delta_m_vph;
    double effective = mapped_capacity_vph - deviation;
    return effective < floor_vph ? floor_vph : effective;
}

}  // namespace aoisim::traffic
