#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "aoisim/common/rng.hpp"

namespace aoisim::radio {

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }
inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }

struct ChannelParams {
    double carrier_ghz = 2.0;
    int num_subchannels = 3;
    double subchannel_bandwidth_hz = 180e3;
    double noise_power_dbm = -114.0;
    double bs_height_m = 25.0;
    double cv_height_m = 1.5;
    double bs_antenna_gain_dbi = 8.0;
    double cv_antenna_gain_dbi = 3.0;
    double bs_noise_figure_db = 5.0;
    double cv_noise_figure_db = 9.0;  // downlink only; kept for completeness
    double shadowing_std_db = 8.0;
    double decorrelation_distance_m = 50.0;
    double max_power_dbm = 30.0;
    double rate_floor_bps = 500e3;  // C^min
    double slot_ms = 1.0;
    double budget_ms = 100.0;  // T, the V2I message deadline
    double aoi_max_ms = 100.0;

    double max_power_mw() const { return dbm_to_mw(max_power_dbm); }
    double noise_power_mw() const { return dbm_to_mw(noise_power_dbm); }
    int slots_per_episode() const {
        return static_cast<int>(std::lround(budget_ms / slot_ms));
    }

    void validate() const {
        if (num_subchannels < 1)
            throw std::invalid_argument("channel: num_subchannels must be >= 1");
        if (subchannel_bandwidth_hz <= 0.0)
            throw std::invalid_argument("channel: subchannel_bandwidth must be > 0");
        if (bs_height_m <= 0.0 || cv_height_m <= 0.0)
            throw std::invalid_argument("channel: antenna heights must be > 0");
        if (max_power_dbm <= 0.0 && dbm_to_mw(max_power_dbm) <= 0.0)
            throw std::invalid_argument("channel: max power must be positive");
        if (rate_floor_bps < 0.0)
            throw std::invalid_argument("channel: rate floor must be >= 0");
        if (slot_ms <= 0.0 || budget_ms < slot_ms)
            throw std::invalid_argument("channel: need slot > 0 and budget >= slot");
        if (aoi_max_ms <= 0.0)
            throw std::invalid_argument("channel: aoi_max must be > 0");
        if (shadowing_std_db < 0.0 || decorrelation_distance_m <= 0.0)
            throw std::invalid_argument("channel: bad shadowing parameters");
    }
};

// One subchannel at most, any power up to the budget. `subchannel` is the
// index with rho=1, or -1 when the vehicle stays silent.
struct AllocationDecision {
    int subchannel = -1;
    double power_mw = 0.0;
};

// Macro-cell urban model, distance in km.
inline double path_loss_db(double distance_3d_km) {
    if (distance_3d_km <= 0.0)
        throw std::invalid_argument("path_loss_db: distance must be > 0");
    return 128.1 + 37.6 * std::log10(distance_3d_km);
}

// Gudmundson spatially-correlated log-normal shadowing. The correlation
// weight decays with the displacement travelled since the last update, and
// the innovation keeps the stationary std at shadowing_std_db.
inline double update_shadowing(double prev_shadowing_db, double displacement_m,
                               double shadowing_std_db, double decorrelation_m,
                               Rng& rng) {
    if (displacement_m < 0.0)
        throw std::invalid_argument("update_shadowing: displacement must be >= 0");
    double rho = std::exp(-displacement_m / decorrelation_m);
    return rho * prev_shadowing_db +
           std::sqrt(1.0 - rho * rho) * rng.normal(0.0, shadowing_std_db);
}

// alpha_v in dB: path loss, shadowing, both antenna gains and the BS noise
// figure folded together (uplink budget; the CV noise figure never enters).
inline double large_scale_gain_db(double distance_3d_km, double shadowing_db,
                                  const ChannelParams& p) {
    return -path_loss_db(distance_3d_km) - shadowing_db + p.bs_antenna_gain_dbi +
           p.cv_antenna_gain_dbi - p.bs_noise_figure_db;
}

// h_v[n] = alpha_v * g_v[n], both linear power gains.
inline double channel_gain(double large_scale_gain_linear, double fast_fading) {
    if (large_scale_gain_linear < 0.0 || fast_fading < 0.0)
        throw std::invalid_argument("channel_gain: gains must be >= 0");
    return large_scale_gain_linear * fast_fading;
}

// Rayleigh amplitude fading = unit-mean exponential power gain.
inline double draw_fast_fading(Rng& rng) { return rng.exponential(); }

// Achievable uplink rate on the allocated subchannel, zero elsewhere.
inline double instantaneous_rate(bool allocated, double power_mw, double own_gain,
                                 double interference_mw, const ChannelParams& p) {
    if (own_gain < 0.0 || interference_mw < 0.0 || power_mw < 0.0)
        throw std::invalid_argument("instantaneous_rate: negative input");
    if (!allocated) return 0.0;
    double sinr = power_mw * own_gain / (interference_mw + p.noise_power_mw());
    return p.subchannel_bandwidth_hz * std::log2(1.0 + sinr);
}

// I_v[n]: sum of the other vehicles' received powers on subchannel n.
// gains[v][n] holds h_v[n]; the allocation list is indexed by vehicle.
inline double aggregate_interference(const std::vector<AllocationDecision>& allocs,
                                     const std::vector<std::vector<double>>& gains,
                                     int subchannel, std::size_t self) {
    if (allocs.size() != gains.size())
        throw std::invalid_argument("aggregate_interference: size mismatch");
    double sum = 0.0;
    for (std::size_t v = 0; v < allocs.size(); ++v) {
        if (v == self || allocs[v].subchannel != subchannel) continue;
        sum += allocs[v].power_mw * gains[v][static_cast<std::size_t>(subchannel)];
    }
    return sum;
}

// AoI recurrence: reset on a successful delivery, otherwise grow by one slot, capped
// at aoi_max to keep state inputs bounded.
inline double update_aoi(double current_aoi_ms, double achieved_rate_bps,
                         bool allocated, double rate_floor_bps,
                         const ChannelParams& p) {
    if (current_aoi_ms < 0.0)
        throw std::invalid_argument("update_aoi: aoi must be >= 0");
    if (allocated && achieved_rate_bps >= rate_floor_bps) return p.slot_ms;
    return std::min(current_aoi_ms + p.slot_ms, p.aoi_max_ms);
}

}  // namespace aoisim::radio
