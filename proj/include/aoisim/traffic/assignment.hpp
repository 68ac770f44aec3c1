#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "aoisim/traffic/bpr.hpp"
#include "aoisim/traffic/network.hpp"
#include "aoisim/traffic/shortest_path.hpp"

namespace aoisim::traffic {

struct LinkFlows {
    std::vector<double> flow_vph;      // per link
    std::vector<double> gap_trace;     // relative gap per Frank-Wolfe iteration
    int iterations = 0;
    bool converged = true;             // false: stopped at max_iterations
};

// Loads each OD demand entirely onto its current shortest path. One Dijkstra
// tree per distinct origin.
inline std::vector<double> all_or_nothing_flows(
    const RoadNetwork& net, const std::vector<double>& link_costs,
    const std::vector<OdPair>& od_pairs,
    const std::vector<std::vector<int>>& out) {
    std::vector<double> flow(net.links.size(), 0.0);
    std::vector<int> order(od_pairs.size());
    for (std::size_t i = 0; i < od_pairs.size(); ++i) order[i] = static_cast<int>(i);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return od_pairs[a].origin < od_pairs[b].origin;
    });

    ShortestPathTree tree;
    bool have_tree = false;
    for (int idx : order) {
        const OdPair& od = od_pairs[idx];
        if (od.demand_vph <= 0.0) continue;
        if (!have_tree || tree.origin != od.origin) {
            tree = dijkstra_tree(net, link_costs, od.origin, out);
            have_tree = true;
        }
        if (tree.pred_link[od.destination] < 0)
            throw NoPathError("all_or_nothing: destination " +
                              std::to_string(od.destination) + " unreachable from " +
                              std::to_string(od.origin));
        for (int node = od.destination; node != od.origin;) {
            int lid = tree.pred_link[node];
            flow[lid] += od.demand_vph;
            node = net.links[lid].from;
        }
    }
    return flow;
}

inline LinkFlows all_or_nothing(const RoadNetwork& net,
                                const std::vector<double>& link_costs,
                                const std::vector<OdPair>& od_pairs) {
    LinkFlows r;
    r.flow_vph = all_or_nothing_flows(net, link_costs, od_pairs, net.out_links());
    return r;
}

struct FrankWolfeOptions {
    double bpr_alpha = kDefaultBprAlpha;
    double bpr_beta = kDefaultBprBeta;
    double tolerance = 1e-4;
    int max_iterations = 500;
    int line_search_iterations = 40;
};

namespace detail {

// Beckmann objective: sum over links of the integral of the BPR curve.
inline double beckmann(const std::vector<Link>& links,
                       const std::vector<double>& capacity,
                       const std::vector<double>& flow, double alpha, double beta) {
    double z = 0.0;
    for (std::size_t i = 0; i < links.size(); ++i) {
        double t0 = links[i].free_flow_time_s;
        double c = capacity[i];
        double f = flow[i];
        z += t0 * f + t0 * alpha * c / (beta + 1.0) * std::pow(f / c, beta + 1.0);
    }
    return z;
}

}  // namespace detail

// Link-based Frank-Wolfe user-equilibrium assignment. Travel times come from
// the BPR curve over `capacities` (the planner's view; pass true capacities
// for a perfect-information assignment). Converges when the relative gap
// (current objective minus best linearized lower bound, over current
// objective) drops to `tolerance`.
inline LinkFlows frank_wolfe_ue(const RoadNetwork& net,
                                const std::vector<double>& capacities,
                                const std::vector<OdPair>& od_pairs,
                                const FrankWolfeOptions& opt = {}) {
    if (capacities.size() != net.links.size())
        throw std::invalid_argument("frank_wolfe_ue: capacity vector size mismatch");
    for (double c : capacities)
        if (c <= 0.0) throw std::invalid_argument("frank_wolfe_ue: capacity must be > 0");
    if (opt.tolerance <= 0.0)
        throw std::invalid_argument("frank_wolfe_ue: tolerance must be > 0");

    const auto out = net.out_links();
    const std::size_t L = net.links.size();

    auto costs_at = [&](const std::vector<double>& flow) {
        std::vector<double> c(L);
        for (std::size_t i = 0; i < L; ++i)
            c[i] = bpr_travel_time(net.links[i].free_flow_time_s, flow[i],
                                   capacities[i], opt.bpr_alpha, opt.bpr_beta);
        return c;
    };

    std::vector<double> free_flow(L);
    for (std::size_t i = 0; i < L; ++i) free_flow[i] = net.links[i].free_flow_time_s;

    LinkFlows result;
    std::vector<double> x = all_or_nothing_flows(net, free_flow, od_pairs, out);
    double lower_bound = -std::numeric_limits<double>::infinity();
    result.converged = false;

    for (int k = 0; k < opt.max_iterations; ++k) {
        std::vector<double> cost = costs_at(x);
        double z = detail::beckmann(net.links, capacities, x, opt.bpr_alpha, opt.bpr_beta);
        std::vector<double> y = all_or_nothing_flows(net, cost, od_pairs, out);

        double linearized = 0.0;  // <= 0 by optimality of the AON subproblem
        for (std::size_t i = 0; i < L; ++i) linearized += cost[i] * (y[i] - x[i]);
        lower_bound = std::max(lower_bound, z + linearized);

        double gap = z > 0.0 ? (z - lower_bound) / z : 0.0;
        if (gap < 0.0) gap = 0.0;
        result.gap_trace.push_back(gap);
        result.iterations = k + 1;
        if (gap <= opt.tolerance) {
            result.converged = true;
            break;
        }

        // Line search on theta in [0,1]: the directional derivative of the
        // Beckmann objective is monotone, so bisect on its sign.
        auto derivative = [&](double theta) {
            double d = 0.0;
            for (std::size_t i = 0; i < L; ++i) {
                double f = x[i] + theta * (y[i] - x[i]);
                d += bpr_travel_time(net.links[i].free_flow_time_s, f, capacities[i],
                                     opt.bpr_alpha, opt.bpr_beta) *
                     (y[i] - x[i]);
            }
            return d;
        };
        double theta = 1.0;
        if (derivative(1.0) > 0.0) {
            double lo = 0.0, hi = 1.0;
            for (int it = 0; it < opt.line_search_iterations; ++it) {
                double mid = 0.5 * (lo + hi);
                (derivative(mid) > 0.0 ? hi : lo) = mid;
            }
            theta = 0.5 * (lo + hi);
        }
        for (std::size_t i = 0; i < L; ++i) x[i] += theta * (y[i] - x[i]);
    }

    result.flow_vph = std::move(x);
    return result;
}

struct NetworkMetrics {
    double avg_travel_time_s = 0.0;
    double avg_v_over_c = 0.0;
};

// Scores an assignment against the capacities actually in effect (which may
// differ from the values the planner routed on): flow-weighted mean BPR
// travel time and flow-weighted mean volume-over-capacity. Weighting by flow
// makes the metrics track what an average vehicle experiences; with zero
// flow the travel time falls back to the simple mean of free-flow times and
// V/C is zero.
inline NetworkMetrics network_metrics(const LinkFlows& flows, const RoadNetwork& net,
                                      const std::vector<double>& capacities_vph,
                                      double bpr_alpha = kDefaultBprAlpha,
                                      double bpr_beta = kDefaultBprBeta) {
    if (flows.flow_vph.size() != net.links.size())
        throw std::invalid_argument("network_metrics: flow vector size mismatch");
    if (capacities_vph.size() != net.links.size())
        throw std::invalid_argument("network_metrics: capacity vector size mismatch");
    double total_flow = 0.0, tt_acc = 0.0, voc_acc = 0.0;
    for (std::size_t i = 0; i < net.links.size(); ++i) {
        double f = flows.flow_vph[i];
        double t = bpr_travel_time(net.links[i].free_flow_time_s, f,
                                   capacities_vph[i], bpr_alpha, bpr_beta);
        total_flow += f;
        tt_acc += f * t;
        voc_acc += f * (f / capacities_vph[i]);
    }
    NetworkMetrics m;
    if (total_flow > 0.0) {
        m.avg_travel_time_s = tt_acc / total_flow;
        m.avg_v_over_c = voc_acc / total_flow;
    } else {
        double sum_t0 = 0.0;
        for (const Link& l : net.links) sum_t0 += l.free_flow_time_s;
        m.avg_travel_time_s = net.links.empty() ? 0.0 : sum_t0 / net.links.size();
        m.avg_v_over_c = 0.0;
    }
    return m;
}

inline NetworkMetrics network_metrics(const LinkFlows& flows, const RoadNetwork& net,
                                      double bpr_alpha = kDefaultBprAlpha,
                                      double bpr_beta = kDefaultBprBeta) {
    std::vector<double> caps(net.links.size());
    for (std::size_t i = 0; i < caps.size(); ++i) caps[i] = net.links[i].capacity_vph;
    return network_metrics(flows, net, caps, bpr_alpha, bpr_beta);
}

}  // namespace aoisim::traffic
