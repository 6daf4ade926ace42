#pragma once

#include "pipeflow/expression.hpp"
#include "pipeflow/nse_solver.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pipeflow {

/// INI text: `[section]` headers, `key = value` lines, `#` or `;` comments.
struct IniEntry {
    std::string key;
    std::string value;
    int line = 0;
    int key_column = 1;
    int value_column = 1;
};
struct IniSection {
    std::string name;
    int line = 0;
    std::vector<IniEntry> entries;
};
struct IniDocument {
    std::vector<IniSection> sections;

    /// Throws ConfigError with the offending line and column.
    static IniDocument parse(std::string_view text);
};

enum class DomainShape : std::uint8_t { Straight, Sections };

struct DomainConfig {
    DomainShape shape = DomainShape::Straight;
    double length = 1.0;
    double half_height = 0.5;
    // Sections: angles in degrees, origins at the middle of the section's
    // upstream end.
    double inlet_length = 1.0;
    double inlet_half_height = 0.5;
    double inlet_origin_x = 0.0;
    double inlet_origin_y = 0.0;
    double inlet_angle = 0.0;
    double outlet_length = 1.0;
    double outlet_half_height = 0.5;
    double outlet_origin_x = 2.0;
    double outlet_origin_y = 0.0;
    double outlet_angle = 0.0;
    double tangent_scale = 1.0;
    bool operator==(const DomainConfig&) const = default;
};

struct MeshConfig {
    double target_h = 0.1;
    int refinements = 0;
    double min_angle = 15.0;
    bool operator==(const MeshConfig&) const = default;
};

enum class InflowKind : std::uint8_t { None, Poiseuille, Expression, Exact };

struct PhysicsConfig {
    double eta = 1.0;
    // `auto` (derived from [exact]) is recorded by the flags; an absent key is zero.
    bool force_auto = false;
    std::optional<Expression> force_x;
    std::optional<Expression> force_y;
    InflowKind inflow = InflowKind::None;
    double inflow_flux = 0.0;
    Expression inflow_x;
    Expression inflow_y;
    bool traction_auto = false;
    std::optional<Expression> traction;
    bool operator==(const PhysicsConfig&) const = default;
};

struct ExactConfig {
    bool present = false;
    Expression u_x;
    Expression u_y;
    Expression p;
    bool operator==(const ExactConfig&) const = default;
};

struct OutputConfig {
    std::string directory = ".";
    bool vtk = true;
    bool energy = true;
    bool mesh = true;
    bool operator==(const OutputConfig&) const = default;
};

struct CaseConfig {
    DomainConfig domain;
    MeshConfig mesh;
    PhysicsConfig physics;
    SolverConfig solver;
    ExactConfig exact;
    OutputConfig outputs;

    /// Throws ConfigError.
    static CaseConfig parse(std::string_view text);
    /// Canonical INI text; parse(serialize()) == *this.
    std::string serialize() const;
    bool operator==(const CaseConfig&) const = default;
};

/// Reads and parses a case file; an unreadable file is a ConfigError at line 0.
CaseConfig read_case_file(const std::string& path, std::string* raw_text = nullptr);

}  // namespace pipeflow
