#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "aoisim/common/rng.hpp"
#include "aoisim/marl/rewards.hpp"
#include "aoisim/radio/channel.hpp"
#include "aoisim/radio/mobility.hpp"

namespace aoisim::sim {

struct EnvironmentConfig {
    int num_vehicles = 20;
    radio::ChannelParams channel{};
    radio::GridGeometry grid{};
    radio::MobilityParams mobility{};
    // Locations are refreshed each episode; by default vehicles respawn
    // uniformly on the grid lanes, otherwise they keep driving and the
    // shadowing stays spatially correlated across episodes.
    bool respawn_each_episode = true;

    int state_dim() const { return 2 * channel.num_subchannels + 1; }

    void validate() const {
        if (num_vehicles < 1)
            throw std::invalid_argument("environment: num_vehicles must be >= 1");
        channel.validate();
        if (grid.cols < 1 || grid.rows < 1 || grid.col_spacing_m <= 0.0 ||
            grid.row_spacing_m <= 0.0)
            throw std::invalid_argument("environment: degenerate grid geometry");
        if (mobility.speed_min_mps <= 0.0 ||
            mobility.speed_max_mps < mobility.speed_min_mps)
            throw std::invalid_argument("environment: bad speed band");
        if (mobility.p_straight < 0.0 || mobility.p_left < 0.0 ||
            mobility.p_right < 0.0 ||
            std::abs(mobility.p_straight + mobility.p_left + mobility.p_right -
                     1.0) > 1e-9)
            throw std::invalid_argument(
                "environment: turn probabilities must sum to 1");
    }
};

// Result of resolving one slot's joint action.
struct SlotResult {
    Eigen::VectorXd local_rewards;   // V
    double global_reward = 0.0;
    Eigen::VectorXd rate_bps;        // V, zero when silent
    Eigen::VectorXd gain_linear;     // V, h on the chosen subchannel (0 if silent)
    Eigen::VectorXd aoi_ms;          // V, post-update
};

// Discrete-time uplink world shared by all CV agents: owns vehicle mobility,
// large-scale/fast fading, interference bookkeeping and per-vehicle AoI.
// One RNG substream per vehicle keeps runs bit-reproducible regardless of
// how callers interleave their own draws.
class RadioEnvironment {
  public:
    RadioEnvironment(EnvironmentConfig cfg, std::uint64_t seed)
        : cfg_(std::move(cfg)) {
        cfg_.validate();
        Rng master(seed);
        streams_.reserve(static_cast<std::size_t>(cfg_.num_vehicles));
        for (int v = 0; v < cfg_.num_vehicles; ++v)
            streams_.push_back(master.substream(static_cast<std::uint64_t>(v) + 1));
        vehicles_.resize(static_cast<std::size_t>(cfg_.num_vehicles));
        prev_interference_mw_ =
            Eigen::MatrixXd::Zero(cfg_.num_vehicles, cfg_.channel.num_subchannels);
    }

    const EnvironmentConfig& config() const { return cfg_; }
    const radio::ChannelParams& params() const { return cfg_.channel; }
    int num_vehicles() const { return cfg_.num_vehicles; }
    int state_dim() const { return cfg_.state_dim(); }
    int slot() const { return slot_; }
    int episodes_started() const { return episodes_; }

    const radio::CvRadioState& vehicle(int v) const {
        return vehicles_[static_cast<std::size_t>(v)];
    }
    // Tests occasionally pin positions or gains by hand.
    radio::CvRadioState& vehicle_mutable(int v) {
        return vehicles_[static_cast<std::size_t>(v)];
    }

    // Episode reset: refresh CV locations and the large-scale channel
    // (path loss + shadowing), zero the AoI clocks.
    void begin_episode() {
        double dt_s = cfg_.channel.budget_ms / 1000.0;
        for (int v = 0; v < cfg_.num_vehicles; ++v) {
            auto& s = vehicles_[static_cast<std::size_t>(v)];
            auto& rng = streams_[static_cast<std::size_t>(v)];
            if (cfg_.respawn_each_episode || episodes_ == 0) {
                s = radio::random_vehicle_state(cfg_.grid, cfg_.mobility, rng);
                s.shadowing_db = rng.normal(0.0, cfg_.channel.shadowing_std_db);
            } else {
                double displacement = s.speed_mps * dt_s;
                s = radio::mobility_step(s, dt_s, cfg_.grid, cfg_.mobility, rng);
                s.shadowing_db = radio::update_shadowing(
                    s.shadowing_db, displacement, cfg_.channel.shadowing_std_db,
                    cfg_.channel.decorrelation_distance_m, rng);
            }
            s.fast_fading.assign(
                static_cast<std::size_t>(cfg_.channel.num_subchannels), 0.0);
            s.aoi_ms = 0.0;
            refresh_large_scale(s);
        }
        prev_interference_mw_.setZero();
        slot_ = 0;
        ++episodes_;
    }

    // Fast fading is redrawn every slot (1 ms cadence).
    void advance_fading() {
        for (int v = 0; v < cfg_.num_vehicles; ++v) {
            auto& s = vehicles_[static_cast<std::size_t>(v)];
            for (int n = 0; n < cfg_.channel.num_subchannels; ++n)
                s.fast_fading[static_cast<std::size_t>(n)] =
                    radio::draw_fast_fading(streams_[static_cast<std::size_t>(v)]);
        }
    }

    // Agent observation: per-subchannel gains in dB, the previous slot's
    // interference per subchannel in dBm, and the own AoI — each scaled to
    // O(1). The scalings are fixed constants, so the raw quantities are
    // recoverable by multiplying them back.
    Eigen::VectorXd observation(int v) const {
        const auto& s = vehicles_[static_cast<std::size_t>(v)];
        int n_sub = cfg_.channel.num_subchannels;
        Eigen::VectorXd o(state_dim());
        for (int n = 0; n < n_sub; ++n) {
            double h = radio::channel_gain(s.large_scale_gain,
                                           s.fast_fading[static_cast<std::size_t>(n)]);
            o(n) = safe_db(h) / kGainDbScale;
        }
        for (int n = 0; n < n_sub; ++n)
            o(n_sub + n) = interference_dbm(v, n) / kInterferenceDbmScale;
        o(2 * n_sub) = s.aoi_ms / cfg_.channel.aoi_max_ms;
        return o;
    }

    Eigen::VectorXd joint_observation() const {
        Eigen::VectorXd joint(cfg_.num_vehicles * state_dim());
        for (int v = 0; v < cfg_.num_vehicles; ++v)
            joint.segment(v * state_dim(), state_dim()) = observation(v);
        return joint;
    }

    // Resolves one slot: received powers at the BS, mutual interference,
    // achievable rates, AoI recurrences and both reward layers. The
    // interference map measured here becomes the next observation's
    // "previous slot" component.
    SlotResult apply_actions(const std::vector<radio::AllocationDecision>& actions) {
        int n_sub = cfg_.channel.num_subchannels;
        if (static_cast<int>(actions.size()) != cfg_.num_vehicles)
            throw std::invalid_argument("apply_actions: one decision per vehicle");
        for (const auto& a : actions) {
            if (a.subchannel < -1 || a.subchannel >= n_sub)
                throw std::invalid_argument("apply_actions: subchannel out of range");
            if (a.power_mw < 0.0 ||
                a.power_mw > cfg_.channel.max_power_mw() * (1.0 + 1e-12))
                throw std::invalid_argument("apply_actions: power outside [0, p_max]");
        }

        // Received power each vehicle would contribute on its chosen subchannel.
        Eigen::VectorXd received(cfg_.num_vehicles);
        Eigen::VectorXd own_gain(cfg_.num_vehicles);
        Eigen::VectorXd per_sub_total = Eigen::VectorXd::Zero(n_sub);
        for (int v = 0; v < cfg_.num_vehicles; ++v) {
            const auto& s = vehicles_[static_cast<std::size_t>(v)];
            int n = actions[static_cast<std::size_t>(v)].subchannel;
            if (n >= 0) {
                own_gain(v) = radio::channel_gain(
                    s.large_scale_gain, s.fast_fading[static_cast<std::size_t>(n)]);
                received(v) =
                    actions[static_cast<std::size_t>(v)].power_mw * own_gain(v);
                per_sub_total(n) += received(v);
            } else {
                own_gain(v) = 0.0;
                received(v) = 0.0;
            }
        }

        SlotResult r;
        r.local_rewards.resize(cfg_.num_vehicles);
        r.rate_bps.resize(cfg_.num_vehicles);
        r.gain_linear = own_gain;
        r.aoi_ms.resize(cfg_.num_vehicles);
        for (int v = 0; v < cfg_.num_vehicles; ++v) {
            auto& s = vehicles_[static_cast<std::size_t>(v)];
            int chosen = actions[static_cast<std::size_t>(v)].subchannel;
            for (int n = 0; n < n_sub; ++n)
                prev_interference_mw_(v, n) =
                    per_sub_total(n) - (n == chosen ? received(v) : 0.0);
            bool allocated = chosen >= 0;
            double rate = radio::instantaneous_rate(
                allocated, actions[static_cast<std::size_t>(v)].power_mw,
                own_gain(v), allocated ? prev_interference_mw_(v, chosen) : 0.0,
                cfg_.channel);
            s.aoi_ms = radio::update_aoi(s.aoi_ms, rate, allocated,
                                         cfg_.channel.rate_floor_bps, cfg_.channel);
            r.rate_bps(v) = rate;
            r.aoi_ms(v) = s.aoi_ms;
            r.local_rewards(v) = marl::local_reward(
                s.aoi_ms, rate, cfg_.channel.rate_floor_bps, cfg_.num_vehicles,
                cfg_.channel.aoi_max_ms);
        }
        r.global_reward = r.local_rewards.mean();
        ++slot_;
        return r;
    }

    static constexpr double kGainDbScale = 120.0;
    static constexpr double kInterferenceDbmScale = 114.0;

  private:
    void refresh_large_scale(radio::CvRadioState& s) const {
        double d_km = radio::distance_to_bs_km(s, cfg_.grid, cfg_.channel.bs_height_m,
                                               cfg_.channel.cv_height_m);
        s.large_scale_gain =
            radio::db_to_linear(radio::large_scale_gain_db(d_km, s.shadowing_db,
                                                           cfg_.channel));
    }

    // Deep fades can hit exactly zero; floor the dB conversion so states
    // stay finite.
    static double safe_db(double linear) {
        return radio::linear_to_db(std::max(linear, 1e-24));
    }

    // Empty or below-noise interference clamps to the noise floor, which is
    // the natural "nothing to hear" reading.
    double interference_dbm(int v, int n) const {
        double mw = prev_interference_mw_(v, n);
        double floor_dbm = cfg_.channel.noise_power_dbm;
        if (mw <= 0.0) return floor_dbm;
        return std::max(radio::linear_to_db(mw), floor_dbm);
    }

    EnvironmentConfig cfg_;
    std::vector<Rng> streams_;
    std::vector<radio::CvRadioState> vehicles_;
    Eigen::MatrixXd prev_interference_mw_;  // V x N, measured last slot
    int slot_ = 0;
    int episodes_ = 0;
};

}  // namespace aoisim::sim
