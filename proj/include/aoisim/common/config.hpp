#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "aoisim/marl/optimizer.hpp"
#include "aoisim/marl/trainer.hpp"
#include "aoisim/sim/environment.hpp"
#include "aoisim/sim/sweep.hpp"
#include "aoisim/traffic/network.hpp"

namespace aoisim {

struct LearningConfig {
    double gamma = 0.99;
    double tau = 0.0005;
    double actor_lr = 1e-4;
    double critic_lr = 1e-3;
    int policy_delay = 2;
    int batch_size = 64;
    int updates_per_episode = 1;
    int learning_starts = 64;
    double surrogate_temperature = 1.0;
    double actor_output_reg = 1e-3;
    std::size_t replay_capacity = 100000;
    std::vector<int> actor_hidden{1024, 512};
    std::vector<int> critic_hidden{1024, 512, 256};
    int episodes = 2000;
    double noise_scale = 0.3;
    double noise_decay = 0.995;
    double noise_floor = 0.01;
    double noise_clip = marl::kNoiseClip;
    marl::OptimizerKind optimizer = marl::OptimizerKind::kAdam;

    void validate() const {
        if (gamma <= 0.0 || gamma >= 1.0)
            throw std::invalid_argument("learning.gamma must be in (0, 1)");
        if (tau <= 0.0 || tau > 1.0)
            throw std::invalid_argument("learning.tau must be in (0, 1]");
        if (actor_lr <= 0.0)
            throw std::invalid_argument("learning.actor_lr must be > 0");
        if (critic_lr <= 0.0)
            throw std::invalid_argument("learning.critic_lr must be > 0");
        if (policy_delay < 1)
            throw std::invalid_argument("learning.policy_delay must be >= 1");
        if (batch_size < 1)
            throw std::invalid_argument("learning.batch_size must be >= 1");
        if (replay_capacity < static_cast<std::size_t>(batch_size))
            throw std::invalid_argument(
                "learning.replay_capacity must be >= learning.batch_size");
        if (actor_hidden.empty() || critic_hidden.empty())
            throw std::invalid_argument("learning hidden layer lists must be non-empty");
        for (int w : actor_hidden)
            if (w < 1) throw std::invalid_argument("learning.actor_hidden widths must be >= 1");
        for (int w : critic_hidden)
            if (w < 1) throw std::invalid_argument("learning.critic_hidden widths must be >= 1");
        if (episodes < 0)
            throw std::invalid_argument("learning.episodes must be >= 0");
        if (noise_scale < 0.0)
            throw std::invalid_argument("learning.noise_scale must be >= 0");
        if (noise_decay <= 0.0 || noise_decay > 1.0)
            throw std::invalid_argument("learning.noise_decay must be in (0, 1]");
        if (noise_floor < 0.0)
            throw std::invalid_argument("learning.noise_floor must be >= 0");
        if (noise_clip <= 0.0)
            throw std::invalid_argument("learning.noise_clip must be > 0");
        if (updates_per_episode < 1)
            throw std::invalid_argument("learning.updates_per_episode must be >= 1");
        if (learning_starts < batch_size)
            throw std::invalid_argument(
                "learning.learning_starts must be >= learning.batch_size");
        if (surrogate_temperature <= 0.0)
            throw std::invalid_argument("learning.surrogate_temperature must be > 0");
        if (actor_output_reg < 0.0)
            throw std::invalid_argument("learning.actor_output_reg must be >= 0");
    }

    // Exploration schedule: exponential decay with a floor.
    double noise_at_episode(long episode) const {
        return std::max(noise_floor,
                        noise_scale * std::pow(noise_decay,
                                               static_cast<double>(episode)));
    }

    template <typename Scalar>
    marl::TrainerConfig<Scalar> trainer_config(int num_agents,
                                               int num_subchannels) const {
        marl::TrainerConfig<Scalar> cfg;
        cfg.num_agents = num_agents;
        cfg.num_subchannels = num_subchannels;
        cfg.gamma = static_cast<Scalar>(gamma);
        cfg.tau = static_cast<Scalar>(tau);
        cfg.actor_lr = static_cast<Scalar>(actor_lr);
        cfg.critic_lr = static_cast<Scalar>(critic_lr);
        cfg.policy_delay = policy_delay;
        cfg.batch_size = batch_size;
        cfg.updates_per_episode = updates_per_episode;
        cfg.learning_starts = learning_starts;
        cfg.surrogate_temperature = static_cast<Scalar>(surrogate_temperature);
        cfg.actor_output_reg = static_cast<Scalar>(actor_output_reg);
        cfg.actor_hidden = actor_hidden;
        cfg.critic_hidden = critic_hidden;
        cfg.optimizer = optimizer;
        return cfg;
    }
};

struct TrafficConfig {
    traffic::GridSpec grid{};
    double bpr_alpha = traffic::kDefaultBprAlpha;
    double bpr_beta = traffic::kDefaultBprBeta;
    double fw_tolerance = 1e-4;
    int fw_max_iterations = 500;
    std::string network_file;  // optional override of the built-in grid
    std::vector<double> aoi_grid_ms = default_aoi_grid();
    std::vector<double> delta_m_vph{5.0, 10.0, 15.0, 20.0};

    static std::vector<double> default_aoi_grid() {
        std::vector<double> g;
        for (int a = 0; a <= 100; a += 10) g.push_back(a);
        return g;
    }

    void validate(double aoi_max_ms) const {
        if (network_file.empty()) {
            if (grid.rows < 2 || grid.cols < 2)
                throw std::invalid_argument("traffic.grid must be at least 2x2");
            if (grid.horizontal_length_m <= 0.0 || grid.vertical_length_m <= 0.0)
                throw std::invalid_argument("traffic link lengths must be > 0");
            if (grid.horizontal_fftime_s <= 0.0 || grid.vertical_fftime_s <= 0.0)
                throw std::invalid_argument("traffic free-flow times must be > 0");
            if (grid.capacity_vph <= 0.0)
                throw std::invalid_argument("traffic.capacity_vph must be > 0");
            if (grid.od_demand_vph < 0.0)
                throw std::invalid_argument("traffic.od_demand_vph must be >= 0");
        }
        if (bpr_alpha < 0.0)
            throw std::invalid_argument("traffic.bpr_alpha must be >= 0");
        if (bpr_beta <= 0.0)
            throw std::invalid_argument("traffic.bpr_beta must be > 0");
        if (fw_tolerance <= 0.0)
            throw std::invalid_argument("traffic.fw_tolerance must be > 0");
        if (fw_max_iterations < 1)
            throw std::invalid_argument("traffic.fw_max_iterations must be >= 1");
        if (aoi_grid_ms.empty())
            throw std::invalid_argument("traffic.aoi_grid_ms must be non-empty");
        for (double a : aoi_grid_ms)
            if (a < 0.0 || a > aoi_max_ms)
                throw std::invalid_argument(
                    "traffic.aoi_grid_ms values must lie in [0, radio.aoi_max_ms]");
        for (std::size_t i = 0; i < aoi_grid_ms.size(); ++i)
            for (std::size_t j = i + 1; j < aoi_grid_ms.size(); ++j)
                if (aoi_grid_ms[i] == aoi_grid_ms[j])
                    throw std::invalid_argument("traffic.aoi_grid_ms values must be distinct");
        if (delta_m_vph.empty())
            throw std::invalid_argument("traffic.delta_m_vph must be non-empty");
        for (double dm : delta_m_vph)
            if (dm < 0.0)
                throw std::invalid_argument("traffic.delta_m_vph values must be >= 0");
        for (std::size_t i = 0; i < delta_m_vph.size(); ++i)
            for (std::size_t j = i + 1; j < delta_m_vph.size(); ++j)
                if (delta_m_vph[i] == delta_m_vph[j])
                    throw std::invalid_argument("traffic.delta_m_vph values must be distinct");
    }

    traffic::RoadNetwork build_network() const {
        if (network_file.empty()) return traffic::make_grid_network(grid);
        std::ifstream in(network_file);
        if (!in)
            throw std::invalid_argument("traffic.network_file not readable: " +
                                        network_file);
        return traffic::load_network(in);
    }
};

namespace detail {

inline void check_keys(const nlohmann::json& j, const std::string& scope,
                       std::initializer_list<const char*> allowed) {
    if (!j.is_object())
        throw std::invalid_argument("config: '" + scope + "' must be an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : allowed)
            if (it.key() == k) {
                known = true;
                break;
            }
        if (!known)
            throw std::invalid_argument("config: unknown key '" + scope + "." +
                                        it.key() + "'");
    }
}

}  // namespace detail

// The whole scenario: radio world, learner hyperparameters and the urban
// sweep, plus seed and output location. Defaults reproduce the reference
// parameter table, so an empty config file is a valid full scenario.
struct ScenarioConfig {
    sim::EnvironmentConfig env{};
    LearningConfig learning{};
    TrafficConfig traffic{};
    std::uint64_t seed = 1;
    std::string out_dir = "out";

    void validate() const {
        env.validate();
        learning.validate();
        traffic.validate(env.channel.aoi_max_ms);
        if (out_dir.empty())
            throw std::invalid_argument("out_dir must be non-empty");
    }

    template <typename Scalar>
    marl::TrainerConfig<Scalar> trainer_config() const {
        return learning.trainer_config<Scalar>(env.num_vehicles,
                                               env.channel.num_subchannels);
    }

    sim::SweepOptions sweep_options() const {
        sim::SweepOptions opt;
        opt.aoi_max_ms = env.channel.aoi_max_ms;
        opt.fw.bpr_alpha = traffic.bpr_alpha;
        opt.fw.bpr_beta = traffic.bpr_beta;
        opt.fw.tolerance = traffic.fw_tolerance;
        opt.fw.max_iterations = traffic.fw_max_iterations;
        return opt;
    }

    static ScenarioConfig from_json(const nlohmann::json& j) {
        ScenarioConfig c;
        detail::check_keys(j, "", {"radio", "learning", "traffic", "seed", "out_dir"});
        if (j.contains("radio")) {
            const auto& r = j.at("radio");
            detail::check_keys(
                r, "radio",
                {"num_vehicles", "respawn_each_episode", "carrier_ghz",
                 "num_subchannels", "subchannel_bandwidth_hz", "noise_power_dbm",
                 "bs_height_m", "cv_height_m", "bs_antenna_gain_dbi",
                 "cv_antenna_gain_dbi", "bs_noise_figure_db", "cv_noise_figure_db",
                 "shadowing_std_db", "decorrelation_distance_m", "max_power_dbm",
                 "rate_floor_bps", "slot_ms", "budget_ms", "aoi_max_ms", "grid",
                 "mobility"});
            auto& e = c.env;
            auto& ch = e.channel;
            e.num_vehicles = r.value("num_vehicles", e.num_vehicles);
            e.respawn_each_episode =
                r.value("respawn_each_episode", e.respawn_each_episode);
            ch.carrier_ghz = r.value("carrier_ghz", ch.carrier_ghz);
            ch.num_subchannels = r.value("num_subchannels", ch.num_subchannels);
            ch.subchannel_bandwidth_hz =
                r.value("subchannel_bandwidth_hz", ch.subchannel_bandwidth_hz);
            ch.noise_power_dbm = r.value("noise_power_dbm", ch.noise_power_dbm);
            ch.bs_height_m = r.value("bs_height_m", ch.bs_height_m);
            ch.cv_height_m = r.value("cv_height_m", ch.cv_height_m);
            ch.bs_antenna_gain_dbi =
                r.value("bs_antenna_gain_dbi", ch.bs_antenna_gain_dbi);
            ch.cv_antenna_gain_dbi =
                r.value("cv_antenna_gain_dbi", ch.cv_antenna_gain_dbi);
            ch.bs_noise_figure_db =
                r.value("bs_noise_figure_db", ch.bs_noise_figure_db);
            ch.cv_noise_figure_db =
                r.value("cv_noise_figure_db", ch.cv_noise_figure_db);
            ch.shadowing_std_db = r.value("shadowing_std_db", ch.shadowing_std_db);
            ch.decorrelation_distance_m =
                r.value("decorrelation_distance_m", ch.decorrelation_distance_m);
            ch.max_power_dbm = r.value("max_power_dbm", ch.max_power_dbm);
            ch.rate_floor_bps = r.value("rate_floor_bps", ch.rate_floor_bps);
            ch.slot_ms = r.value("slot_ms", ch.slot_ms);
            ch.budget_ms = r.value("budget_ms", ch.budget_ms);
            ch.aoi_max_ms = r.value("aoi_max_ms", ch.aoi_max_ms);
            if (r.contains("grid")) {
                const auto& g = r.at("grid");
                detail::check_keys(g, "radio.grid",
                                   {"cols", "rows", "col_spacing_m", "row_spacing_m"});
                e.grid.cols = g.value("cols", e.grid.cols);
                e.grid.rows = g.value("rows", e.grid.rows);
                e.grid.col_spacing_m = g.value("col_spacing_m", e.grid.col_spacing_m);
                e.grid.row_spacing_m = g.value("row_spacing_m", e.grid.row_spacing_m);
            }
            if (r.contains("mobility")) {
                const auto& m = r.at("mobility");
                detail::check_keys(m, "radio.mobility",
                                   {"speed_min_mps", "speed_max_mps", "p_straight",
                                    "p_left", "p_right"});
                e.mobility.speed_min_mps =
                    m.value("speed_min_mps", e.mobility.speed_min_mps);
                e.mobility.speed_max_mps =
                    m.value("speed_max_mps", e.mobility.speed_max_mps);
                e.mobility.p_straight = m.value("p_straight", e.mobility.p_straight);
                e.mobility.p_left = m.value("p_left", e.mobility.p_left);
                e.mobility.p_right = m.value("p_right", e.mobility.p_right);
            }
        }
        if (j.contains("learning")) {
            const auto& l = j.at("learning");
            detail::check_keys(
                l, "learning",
                {"gamma", "tau", "actor_lr", "critic_lr", "policy_delay",
                 "batch_size", "updates_per_episode", "learning_starts",
                 "surrogate_temperature", "actor_output_reg", "replay_capacity",
                 "actor_hidden", "critic_hidden", "episodes", "noise_scale",
                 "noise_decay", "noise_floor", "noise_clip", "optimizer"});
            auto& lc = c.learning;
            lc.gamma = l.value("gamma", lc.gamma);
            lc.tau = l.value("tau", lc.tau);
            lc.actor_lr = l.value("actor_lr", lc.actor_lr);
            lc.critic_lr = l.value("critic_lr", lc.critic_lr);
            lc.policy_delay = l.value("policy_delay", lc.policy_delay);
            lc.batch_size = l.value("batch_size", lc.batch_size);
            lc.updates_per_episode =
                l.value("updates_per_episode", lc.updates_per_episode);
            lc.learning_starts = l.value("learning_starts", lc.learning_starts);
            lc.surrogate_temperature =
                l.value("surrogate_temperature", lc.surrogate_temperature);
            lc.actor_output_reg = l.value("actor_output_reg", lc.actor_output_reg);
            lc.replay_capacity = l.value("replay_capacity", lc.replay_capacity);
            lc.actor_hidden = l.value("actor_hidden", lc.actor_hidden);
            lc.critic_hidden = l.value("critic_hidden", lc.critic_hidden);
            lc.episodes = l.value("episodes", lc.episodes);
            lc.noise_scale = l.value("noise_scale", lc.noise_scale);
            lc.noise_decay = l.value("noise_decay", lc.noise_decay);
            lc.noise_floor = l.value("noise_floor", lc.noise_floor);
            lc.noise_clip = l.value("noise_clip", lc.noise_clip);
            if (l.contains("optimizer")) {
                std::string name = l.at("optimizer").get<std::string>();
                if (name == "adam")
                    lc.optimizer = marl::OptimizerKind::kAdam;
                else if (name == "sgd")
                    lc.optimizer = marl::OptimizerKind::kSgd;
                else
                    throw std::invalid_argument(
                        "learning.optimizer must be \"adam\" or \"sgd\"");
            }
        }
        if (j.contains("traffic")) {
            const auto& t = j.at("traffic");
            detail::check_keys(
                t, "traffic",
                {"grid_rows", "grid_cols", "horizontal_length_m",
                 "vertical_length_m", "horizontal_fftime_s", "vertical_fftime_s",
                 "capacity_vph", "od_demand_vph", "bpr_alpha", "bpr_beta",
                 "fw_tolerance", "fw_max_iterations", "network_file", "aoi_grid_ms",
                 "delta_m_vph"});
            auto& tc = c.traffic;
            tc.grid.rows = t.value("grid_rows", tc.grid.rows);
            tc.grid.cols = t.value("grid_cols", tc.grid.cols);
            tc.grid.horizontal_length_m =
                t.value("horizontal_length_m", tc.grid.horizontal_length_m);
            tc.grid.vertical_length_m =
                t.value("vertical_length_m", tc.grid.vertical_length_m);
            tc.grid.horizontal_fftime_s =
                t.value("horizontal_fftime_s", tc.grid.horizontal_fftime_s);
            tc.grid.vertical_fftime_s =
                t.value("vertical_fftime_s", tc.grid.vertical_fftime_s);
            tc.grid.capacity_vph = t.value("capacity_vph", tc.grid.capacity_vph);
            tc.grid.od_demand_vph = t.value("od_demand_vph", tc.grid.od_demand_vph);
            tc.bpr_alpha = t.value("bpr_alpha", tc.bpr_alpha);
            tc.bpr_beta = t.value("bpr_beta", tc.bpr_beta);
            tc.fw_tolerance = t.value("fw_tolerance", tc.fw_tolerance);
            tc.fw_max_iterations = t.value("fw_max_iterations", tc.fw_max_iterations);
            tc.network_file = t.value("network_file", tc.network_file);
            tc.aoi_grid_ms = t.value("aoi_grid_ms", tc.aoi_grid_ms);
            tc.delta_m_vph = t.value("delta_m_vph", tc.delta_m_vph);
        }
        c.seed = j.value("seed", c.seed);
        c.out_dir = j.value("out_dir", c.out_dir);
        return c;
    }

    nlohmann::json to_json() const {
        nlohmann::json r{
            {"num_vehicles", env.num_vehicles},
            {"respawn_each_episode", env.respawn_each_episode},
            {"carrier_ghz", env.channel.carrier_ghz},
            {"num_subchannels", env.channel.num_subchannels},
            {"subchannel_bandwidth_hz", env.channel.subchannel_bandwidth_hz},
            {"noise_power_dbm", env.channel.noise_power_dbm},
            {"bs_height_m", env.channel.bs_height_m},
            {"cv_height_m", env.channel.cv_height_m},
            {"bs_antenna_gain_dbi", env.channel.bs_antenna_gain_dbi},
            {"cv_antenna_gain_dbi", env.channel.cv_antenna_gain_dbi},
            {"bs_noise_figure_db", env.channel.bs_noise_figure_db},
            {"cv_noise_figure_db", env.channel.cv_noise_figure_db},
            {"shadowing_std_db", env.channel.shadowing_std_db},
            {"decorrelation_distance_m", env.channel.decorrelation_distance_m},
            {"max_power_dbm", env.channel.max_power_dbm},
            {"rate_floor_bps", env.channel.rate_floor_bps},
            {"slot_ms", env.channel.slot_ms},
            {"budget_ms", env.channel.budget_ms},
            {"aoi_max_ms", env.channel.aoi_max_ms},
            {"grid",
             {{"cols", env.grid.cols},
              {"rows", env.grid.rows},
              {"col_spacing_m", env.grid.col_spacing_m},
              {"row_spacing_m", env.grid.row_spacing_m}}},
            {"mobility",
             {{"speed_min_mps", env.mobility.speed_min_mps},
              {"speed_max_mps", env.mobility.speed_max_mps},
              {"p_straight", env.mobility.p_straight},
              {"p_left", env.mobility.p_left},
              {"p_right", env.mobility.p_right}}}};
        nlohmann::json l{
            {"gamma", learning.gamma},
            {"tau", learning.tau},
            {"actor_lr", learning.actor_lr},
            {"critic_lr", learning.critic_lr},
            {"policy_delay", learning.policy_delay},
            {"batch_size", learning.batch_size},
            {"updates_per_episode", learning.updates_per_episode},
            {"learning_starts", learning.learning_starts},
            {"surrogate_temperature", learning.surrogate_temperature},
            {"actor_output_reg", learning.actor_output_reg},
            {"replay_capacity", learning.replay_capacity},
            {"actor_hidden", learning.actor_hidden},
            {"critic_hidden", learning.critic_hidden},
            {"episodes", learning.episodes},
            {"noise_scale", learning.noise_scale},
            {"noise_decay", learning.noise_decay},
            {"noise_floor", learning.noise_floor},
            {"noise_clip", learning.noise_clip},
            {"optimizer",
             learning.optimizer == marl::OptimizerKind::kAdam ? "adam" : "sgd"}};
        nlohmann::json t{{"grid_rows", traffic.grid.rows},
                         {"grid_cols", traffic.grid.cols},
                         {"horizontal_length_m", traffic.grid.horizontal_length_m},
                         {"vertical_length_m", traffic.grid.vertical_length_m},
                         {"horizontal_fftime_s", traffic.grid.horizontal_fftime_s},
                         {"vertical_fftime_s", traffic.grid.vertical_fftime_s},
                         {"capacity_vph", traffic.grid.capacity_vph},
                         {"od_demand_vph", traffic.grid.od_demand_vph},
                         {"bpr_alpha", traffic.bpr_alpha},
                         {"bpr_beta", traffic.bpr_beta},
                         {"fw_tolerance", traffic.fw_tolerance},
                         {"fw_max_iterations", traffic.fw_max_iterations},
                         {"network_file", traffic.network_file},
                         {"aoi_grid_ms", traffic.aoi_grid_ms},
                         {"delta_m_vph", traffic.delta_m_vph}};
        return nlohmann::json{{"radio", r},
                              {"learning", l},
                              {"traffic", t},
                              {"seed", seed},
                              {"out_dir", out_dir}};
    }

    // Comments (// and /* */) are allowed in config files.
    static ScenarioConfig parse(std::istream& in) {
        nlohmann::json j = nlohmann::json::parse(in, nullptr, true, true);
        return from_json(j);
    }

    static ScenarioConfig load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::invalid_argument("config not found: " + path);
        try {
            return parse(in);
        } catch (const nlohmann::json::exception& e) {
            throw std::invalid_argument("config " + path + ": " + e.what());
        }
    }

    void save(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot write config: " + path);
        out << to_json().dump(2) << "\n";
    }
};

}  // namespace aoisim
