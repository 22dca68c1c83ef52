#pragma once

// Bifurcation-diagram generation: sweep the coupling m over a grid, record
// the u-maxima column per grid point, and summarize branch structure.

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include "ujm/analysis.hpp"
#include "ujm/errors.hpp"
#include "ujm/integrate.hpp"
#include "ujm/model.hpp"
#include "ujm/parallel.hpp"

namespace ujm {

struct BifurcationPoint {
    double m = 0.0;
    std::vector<double> maxima; // u local maxima recorded after the transient
    bool failed = false;
    std::string diagnostic;
};

struct BifurcationDiagram {
    std::vector<double> m_values;
    std::vector<BifurcationPoint> points; // one per m, in grid order
    std::size_t coordinate = 3;           // u
    IntegratorConfig settings;
    ModelParams base_params;
    bool continuation = false;
};

// The grid must be strictly monotone; sweeps may run in either direction.
inline void check_sweep_grid(const std::vector<double>& m_grid) {
    if (m_grid.empty()) throw config_error("bifurcation_sweep: empty m grid");
    if (m_grid.size() >= 2) {
        const bool up = m_grid[1] > m_grid[0];
        for (std::size_t i = 1; i < m_grid.size(); ++i) {
            const bool step_up = m_grid[i] > m_grid[i - 1];
            if (m_grid[i] == m_grid[i - 1] || step_up != up)
                throw config_error("bifurcation_sweep: m grid must be strictly monotone (index " +
                                   std::to_string(i) + ")");
        }
    }
}

inline BifurcationDiagram bifurcation_sweep(const std::vector<double>& m_grid,
                                            const ModelParams& p_base, const GCoeffs& g,
                                            const IntegratorConfig& cfg, bool continuation = false,
                                            unsigned workers = 0) {
    check_sweep_grid(m_grid);
    cfg.validate();
    g.validate();

    BifurcationDiagram diagram;
    diagram.m_values = m_grid;
    diagram.points.resize(m_grid.size());
    diagram.settings = cfg;
    diagram.base_params = p_base;
    diagram.continuation = continuation;

    auto run_column = [&](std::size_t idx, const State& s0) -> State {
        ModelParams p = p_base;
        p.m = m_grid[idx];
        BifurcationPoint& pt = diagram.points[idx];
        pt.m = p.m;
        const Trajectory traj = integrate_trajectory(s0, p, g, cfg);
        const MaximaSeries ms = extract_maxima(traj, diagram.coordinate);
        pt.maxima = ms.values;
        return traj.states.back();
    };
    auto guard_column = [&](std::size_t idx, auto&& body) {
        BifurcationPoint& pt = diagram.points[idx];
        pt.m = m_grid[idx];
        try {
            body();
        } catch (const domain_error& e) {
            pt.failed = true;
            pt.maxima.clear();
            pt.diagnostic = e.what();
        }
    };

    if (continuation) {
        // strictly sequential: each column starts from the previous attractor state
        State carry;
        bool have_carry = false;
        for (std::size_t i = 0; i < m_grid.size(); ++i)
            guard_column(i, [&] {
                ModelParams p = p_base;
                p.m = m_grid[i];
                const State s0 = have_carry ? carry : default_initial_state(p, g);
                carry = run_column(i, s0);
                have_carry = true;
            });
    } else {
        parallel_for(
            m_grid.size(),
            [&](std::size_t i) {
                guard_column(i, [&] {
                    ModelParams p = p_base;
                    p.m = m_grid[i];
                    run_column(i, default_initial_state(p, g));
                });
            },
            workers);
    }
    return diagram;
}

struct ColumnSummary {
    double m = 0.0;
    std::size_t count = 0;
    double min = 0.0;
    double max = 0.0;
    double spread = 0.0;
    std::size_t branch_count = 0;
    bool failed = false;
    std::string diagnostic;
};

struct DiagramSummary {
    std::vector<ColumnSummary> columns;
    std::size_t failed_count = 0;
};

// Branches are clusters of the sorted column, split where consecutive values
// gap by more than max(gap_fraction * spread, min_branch_gap); the absolute
// floor keeps integration noise in a tight single-branch column from
// splitting it.
inline DiagramSummary diagram_summary(const BifurcationDiagram& d, double gap_fraction = 0.1,
                                      double min_branch_gap = 1e-3) {
    if (d.points.empty()) throw config_error("diagram_summary: empty diagram");
    DiagramSummary s;
    s.columns.reserve(d.points.size());
    for (const auto& pt : d.points) {
        ColumnSummary col;
        col.m = pt.m;
        col.failed = pt.failed || pt.maxima.empty();
        if (pt.failed)
            col.diagnostic = pt.diagnostic;
        else if (pt.maxima.empty())
            col.diagnostic = "no maxima recorded";
        if (!col.failed) {
            std::vector<double> v = pt.maxima;
            std::sort(v.begin(), v.end());
            col.count = v.size();
            col.min = v.front();
            col.max = v.back();
            col.spread = v.back() - v.front();
            const double gap_thr = std::max(gap_fraction * col.spread, min_branch_gap);
            col.branch_count = 1;
            for (std::size_t i = 1; i < v.size(); ++i)
                if (v[i] - v[i - 1] > gap_thr) ++col.branch_count;
        } else {
            ++s.failed_count;
        }
        s.columns.push_back(std::move(col));
    }
    return s;
}

} // namespace ujm
