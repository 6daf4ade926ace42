#pragma once

#include "pipeflow/fem.hpp"

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace pipeflow {

/// 17 significant digits; NaN is written as NA.
std::string format_double(double v);

/// RFC 4180 table with a mandatory header row.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    CsvTable& row(std::vector<std::string> cells);
    std::size_t rows() const { return rows_.size(); }
    std::string str() const;

    static std::string cell(double v) { return format_double(v); }
    static std::string cell(long long v) { return std::to_string(v); }
    static std::string cell(int v) { return std::to_string(v); }
    static std::string cell(bool v) { return v ? "true" : "false"; }
    static std::string cell(std::string v) { return v; }
    static std::string cell(const char* v) { return v; }

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

/// Legacy ASCII VTK unstructured grid with vertex velocity and pressure.
void write_vtk(std::ostream& out, const FESpace& space, const VectorX& velocity, const VectorX& pressure);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes);

/// Writes to a temporary file in the same directory and renames it.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace pipeflow
