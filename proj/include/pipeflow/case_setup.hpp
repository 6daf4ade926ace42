#pragma once

#include "pipeflow/config.hpp"

#include <optional>
#include <string>
#include <vector>

namespace pipeflow {

struct CaseSetup {
    DomainSpec spec;
    ProblemData data;
    std::optional<ExactSolution> exact;
    std::vector<std::string> warnings;
};

/// Throws GeometryError.
DomainSpec case_domain(const CaseConfig& config);
MeshOptions case_mesh_options(const CaseConfig& config, int extra_refinements = 0);

/// Exact velocity, gradient and pressure from the [exact] expressions.
ExactSolution exact_solution(const ExactConfig& exact);

/// Domain, data and exact solution. With `auto`, the body force is
/// -eta Lap u + (u . grad) u + grad p, the traction eta d(u . nu)/d nu - p on
/// the outlet and the inflow the exact velocity. Throws GeometryError.
CaseSetup build_case(const CaseConfig& config);

}  // namespace pipeflow
