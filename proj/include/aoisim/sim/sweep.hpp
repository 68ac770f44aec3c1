#pragma once

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include "aoisim/traffic/assignment.hpp"
#include "aoisim/traffic/bpr.hpp"
#include "aoisim/traffic/network.hpp"

namespace aoisim::sim {

struct SweepOptions {
    double aoi_max_ms = 100.0;
    double capacity_floor_vph = traffic::kCapacityFloorVph;
    // Optional per-link AoI override: when non-empty (size = link count),
    // link i ages as aoi * per_link_aoi_scale[i] instead of uniformly.
    std::vector<double> per_link_aoi_scale;
    traffic::FrankWolfeOptions fw;
};

struct SweepRow {
    double aoi_ms = 0.0;
    double delta_m_vph = 0.0;
    double avg_tt_s = 0.0;
    double avg_voc = 0.0;
    bool assignment_converged = true;
    bool failed = false;  // no-path or other assignment failure
};

struct SweepResult {
    std::vector<SweepRow> rows;  // sorted by (delta_m, aoi)
};

// The planner routes on the capacities it knows (the network's normal-
// conditions values); unreported incidents leave the road's effective
// capacity below that by (aoi/aoi_max)*delta_m. Each cell therefore solves
// user equilibrium on the stored estimates and scores travel time and V/C
// against the effective capacities for that staleness level. The flows do
// not depend on the cell, so the assignment is solved once per sweep.
inline SweepResult aoi_capacity_sweep(const traffic::RoadNetwork& net,
                                      std::vector<double> aoi_values_ms,
                                      std::vector<double> delta_m_values_vph,
                                      const SweepOptions& opt = {}) {
    net.validate();
    for (double a : aoi_values_ms)
        if (a < 0.0 || a > opt.aoi_max_ms)
            throw std::invalid_argument("sweep: aoi values must be in [0, aoi_max]");
    for (double dm : delta_m_values_vph)
        if (dm < 0.0) throw std::invalid_argument("sweep: delta_m must be >= 0");
    if (!opt.per_link_aoi_scale.empty() &&
        opt.per_link_aoi_scale.size() != net.links.size())
        throw std::invalid_argument("sweep: per_link_aoi_scale size mismatch");
    std::sort(aoi_values_ms.begin(), aoi_values_ms.end());
    std::sort(delta_m_values_vph.begin(), delta_m_values_vph.end());

    std::vector<double> estimates(net.links.size());
    for (std::size_t i = 0; i < estimates.size(); ++i)
        estimates[i] = net.links[i].capacity_vph;

    bool solved = false;
    bool solve_failed = false;
    traffic::LinkFlows flows;
    SweepResult result;
    for (double dm : delta_m_values_vph) {
        for (double aoi : aoi_values_ms) {
            SweepRow row;
            row.aoi_ms = aoi;
            row.delta_m_vph = dm;
            if (!solved) {
                solved = true;
                try {
                    flows = traffic::frank_wolfe_ue(net, estimates, net.od_pairs, opt.fw);
                } catch (const traffic::NoPathError&) {
                    solve_failed = true;
                }
            }
            if (solve_failed) {
                row.failed = true;
                row.avg_tt_s = std::nan("");
                row.avg_voc = std::nan("");
                result.rows.push_back(row);
                continue;
            }
            std::vector<double> effective(net.links.size());
            for (std::size_t i = 0; i < effective.size(); ++i) {
                double link_aoi = opt.per_link_aoi_scale.empty()
                                      ? aoi
                                      : std::min(aoi * opt.per_link_aoi_scale[i],
                                                 opt.aoi_max_ms);
                effective[i] = traffic::estimate_capacity(
                    net.links[i].capacity_vph, link_aoi, opt.aoi_max_ms, dm,
                    opt.capacity_floor_vph);
            }
            traffic::NetworkMetrics m = traffic::network_metrics(
                flows, net, effective, opt.fw.bpr_alpha, opt.fw.bpr_beta);
            row.avg_tt_s = m.avg_travel_time_s;
            row.avg_voc = m.avg_v_over_c;
            row.assignment_converged = flows.converged;
            result.rows.push_back(row);
        }
    }
    return result;
}

inline void write_sweep_csv(const SweepResult& result, std::ostream& out) {
    out << "aoi_ms,delta_m,avg_tt_s,avg_voc\n";
    for (const SweepRow& r : result.rows)
        out << r.aoi_ms << "," << r.delta_m_vph << "," << r.avg_tt_s << ","
            << r.avg_voc << "\n";
}

inline std::vector<double> sweep_delta_m_values(const SweepResult& result) {
    std::vector<double> dms;
    for (const SweepRow& r : result.rows)
        if (dms.empty() || dms.back() != r.delta_m_vph) dms.push_back(r.delta_m_vph);
    return dms;
}

// One curve in whitespace-separated gnuplot form (`plot "..." using 1:2`).
inline void write_sweep_gnuplot_curve(const SweepResult& result, double delta_m,
                                      std::ostream& out) {
    out << "# delta_m = " << delta_m << " veh/h\n";
    out << "# aoi_ms avg_tt_s avg_voc\n";
    for (const SweepRow& r : result.rows)
        if (r.delta_m_vph == delta_m)
            out << r.aoi_ms << " " << r.avg_tt_s << " " << r.avg_voc << "\n";
}

}  // namespace aoisim::sim
