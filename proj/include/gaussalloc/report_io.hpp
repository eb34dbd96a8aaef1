#pragma once

// JSON documents for solve reports and allocations.

#include <optional>
#include <string>
#include <string_view>

#include "gaussalloc/instances.hpp"
#include "gaussalloc/solvers.hpp"

namespace gaussalloc {

/// Serializes a report with a fixed key order: algorithm, eps, grid_step,
/// seed, config, objective, support_size, nodes_evaluated, allocation,
/// instance and, when `include_timing`, elapsed_seconds. Output ends in "\n".
std::string serialize_report(const SolveReport& report, const Instance& inst,
                             bool include_timing = false);

/// {"stddevs": [...]} or {"covariance": [[...]], "means": [...]}.
std::string serialize_allocation(const Allocation& alloc);

struct AllocationDocument {
    Allocation allocation;
    std::optional<Instance> instance;   // present in solve reports
    std::optional<Estimate> objective;  // present in solve reports
    std::optional<std::uint64_t> objective_seed;
    std::optional<EstimatorConfig> config;
};

/// Accepts a solve report or a bare allocation document. Allocation fields
/// are read from "allocation" when present, else from the top level.
/// A covariance without "means" takes the instance means, or zeros.
AllocationDocument parse_allocation_document(std::string_view text);

}  // namespace gaussalloc
