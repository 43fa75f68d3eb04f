#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "carnot/error.hpp"

namespace carnot {

/// Every numerical knob used by the integrators. Defaults are the desk-scale
/// settings used by the acceptance suite; `scaled()` trades time for accuracy.
struct QuadratureBudget {
    // lambda integral of the kernel formula
    double lambda_tol = 1e-11;
    int nodes_per_unit = 8;
    std::size_t max_lambda_nodes = 4'000'000;

    // tabulated heat measure at t = 1
    double table_z_half = 10.0;
    double table_sigma_half = 20.0;
    int table_order = 6;
    double table_prune = 1e-18;

    // generic tensor / sampling budgets
    int panel_order = 6;
    std::size_t max_tensor_nodes = 20'000'000;
    std::size_t mc_samples = 40'000;
    int mc_blocks = 16;

    // deficit curves
    double t_min = 1e-4;
    double t_max = 10.0;
    double t_ratio = 1.3;
    double collar_c = 6.0;

    std::uint64_t seed = 20240611;
    int workers = 1;

    /// Budget with every node/sample count multiplied by `factor`.
    QuadratureBudget scaled(double factor) const {
        require(factor > 0.0 && std::isfinite(factor), Errc::InvalidArgument, "budget scale must be positive");
        QuadratureBudget b = *this;
        b.nodes_per_unit = std::max(4, static_cast<int>(std::lround(nodes_per_unit * factor)));
        b.mc_samples = std::max<std::size_t>(64, static_cast<std::size_t>(mc_samples * factor));
        b.max_tensor_nodes = static_cast<std::size_t>(max_tensor_nodes * std::max(1.0, factor));
        b.max_lambda_nodes = static_cast<std::size_t>(max_lambda_nodes * std::max(1.0, factor));
        if (factor > 1.0) b.table_order = std::min(12, table_order + static_cast<int>(std::floor(std::log2(factor))));
        return b;
    }

    void validate() const {
        require(lambda_tol > 0.0, Errc::ConfigError, "lambda_tol must be positive");
        require(nodes_per_unit >= 4, Errc::ConfigError, "nodes_per_unit must be at least 4");
        require(table_order >= 2 && table_order <= 16, Errc::ConfigError, "table_order out of range");
        require(panel_order >= 2 && panel_order <= 32, Errc::ConfigError, "panel_order out of range");
        require(mc_samples > 0 && mc_blocks > 1, Errc::ConfigError, "sample budget must be positive");
        require(t_min > 0.0 && t_max > t_min && t_ratio > 1.0, Errc::ConfigError, "bad t-grid");
        require(collar_c > 0.0, Errc::ConfigError, "collar constant must be positive");
        require(workers >= 1, Errc::ConfigError, "workers must be >= 1");
    }
};

} // namespace carnot
