#include "pipeflow/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <regex>
#include <sstream>

namespace pipeflow {

namespace {

std::string_view trim(std::string_view s, std::size_t* lead = nullptr)
{
    std::size_t a = 0;
    while (a < s.size() && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    std::size_t b = s.size();
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    if (lead) *lead = a;
    return s.substr(a, b - a);
}

std::string upper(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return s;
}

std::string format_number(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double to_double(const IniEntry& e)
{
    const char* begin = e.value.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0' || !std::isfinite(v))
        throw ConfigError(e.line, e.value_column, "expected a number for '" + e.key + "'");
    return v;
}

double to_positive(const IniEntry& e)
{
    const double v = to_double(e);
    if (!(v > 0.0)) throw ConfigError(e.line, e.value_column, "'" + e.key + "' must be positive");
    return v;
}

int to_int(const IniEntry& e, int minimum)
{
    const char* begin = e.value.c_str();
    char* end = nullptr;
    const long v = std::strtol(begin, &end, 10);
    if (end == begin || *end != '\0') throw ConfigError(e.line, e.value_column, "expected an integer for '" + e.key + "'");
    if (v < minimum || v > 1000000)
        throw ConfigError(e.line, e.value_column, "'" + e.key + "' must be at least " + std::to_string(minimum));
    return static_cast<int>(v);
}

bool to_bool(const IniEntry& e)
{
    const std::string v = upper(e.value);
    if (v == "TRUE" || v == "YES" || v == "ON" || v == "1") return true;
    if (v == "FALSE" || v == "NO" || v == "OFF" || v == "0") return false;
    throw ConfigError(e.line, e.value_column, "expected true or false for '" + e.key + "'");
}

Expression to_expression(const IniEntry& e) { return Expression::parse(e.value, e.line, e.value_column); }

bool is_auto(const IniEntry& e) { return upper(e.value) == "AUTO"; }

template <typename Enum>
Enum to_enum(const IniEntry& e, std::initializer_list<std::pair<const char*, Enum>> names)
{
    const std::string v = upper(e.value);
    std::string allowed;
    for (const auto& [name, value] : names) {
        if (v == name) return value;
        allowed += allowed.empty() ? name : std::string(", ") + name;
    }
    throw ConfigError(e.line, e.value_column, "'" + e.key + "' must be one of " + allowed);
}

using Setter = std::function<void(CaseConfig&, const IniEntry&)>;

const std::map<std::string, std::map<std::string, Setter>>& schema()
{
    static const std::map<std::string, std::map<std::string, Setter>> table = {
        {"domain",
         {
             {"shape", [](CaseConfig& c, const IniEntry& e) {
                  c.domain.shape = to_enum<DomainShape>(e, {{"STRAIGHT", DomainShape::Straight}, {"SECTIONS", DomainShape::Sections}});
              }},
             {"length", [](CaseConfig& c, const IniEntry& e) { c.domain.length = to_positive(e); }},
             {"half_height", [](CaseConfig& c, const IniEntry& e) { c.domain.half_height = to_positive(e); }},
             {"inlet_length", [](CaseConfig& c, const IniEntry& e) { c.domain.inlet_length = to_positive(e); }},
             {"inlet_half_height", [](CaseConfig& c, const IniEntry& e) { c.domain.inlet_half_height = to_positive(e); }},
             {"inlet_origin_x", [](CaseConfig& c, const IniEntry& e) { c.domain.inlet_origin_x = to_double(e); }},
             {"inlet_origin_y", [](CaseConfig& c, const IniEntry& e) { c.domain.inlet_origin_y = to_double(e); }},
             {"inlet_angle", [](CaseConfig& c, const IniEntry& e) { c.domain.inlet_angle = to_double(e); }},
             {"outlet_length", [](CaseConfig& c, const IniEntry& e) { c.domain.outlet_length = to_positive(e); }},
             {"outlet_half_height", [](CaseConfig& c, const IniEntry& e) { c.domain.outlet_half_height = to_positive(e); }},
             {"outlet_origin_x", [](CaseConfig& c, const IniEntry& e) { c.domain.outlet_origin_x = to_double(e); }},
             {"outlet_origin_y", [](CaseConfig& c, const IniEntry& e) { c.domain.outlet_origin_y = to_double(e); }},
             {"outlet_angle", [](CaseConfig& c, const IniEntry& e) { c.domain.outlet_angle = to_double(e); }},
             {"tangent_scale", [](CaseConfig& c, const IniEntry& e) { c.domain.tangent_scale = to_positive(e); }},
         }},
        {"mesh",
         {
             {"target_h", [](CaseConfig& c, const IniEntry& e) { c.mesh.target_h = to_positive(e); }},
             {"refinements", [](CaseConfig& c, const IniEntry& e) { c.mesh.refinements = to_int(e, 0); }},
             {"min_angle", [](CaseConfig& c, const IniEntry& e) { c.mesh.min_angle = to_double(e); }},
         }},
        {"physics",
         {
             {"eta", [](CaseConfig& c, const IniEntry& e) { c.physics.eta = to_positive(e); }},
             {"force", [](CaseConfig& c, const IniEntry& e) {
                  if (!is_auto(e)) throw ConfigError(e.line, e.value_column, "'force' only accepts auto; use force_x and force_y");
                  c.physics.force_auto = true;
              }},
             {"force_x", [](CaseConfig& c, const IniEntry& e) {
                  if (is_auto(e)) c.physics.force_auto = true;
                  else c.physics.force_x = to_expression(e);
              }},
             {"force_y", [](CaseConfig& c, const IniEntry& e) {
                  if (is_auto(e)) c.physics.force_auto = true;
                  else c.physics.force_y = to_expression(e);
              }},
             {"inflow", [](CaseConfig& c, const IniEntry& e) {
                  static const std::regex pois(R"(^POISEUILLE\s*\(\s*([^()]*?)\s*\)$)", std::regex::icase);
                  std::smatch m;
                  if (is_auto(e)) {
                      c.physics.inflow = InflowKind::Exact;
                  } else if (upper(e.value) == "NONE") {
                      c.physics.inflow = InflowKind::None;
                  } else if (std::regex_match(e.value, m, pois)) {
                      IniEntry flux = e;
                      flux.value = m[1].str();
                      flux.value_column = e.value_column + static_cast<int>(m.position(1));
                      c.physics.inflow = InflowKind::Poiseuille;
                      c.physics.inflow_flux = to_double(flux);
                      if (c.physics.inflow_flux < 0.0)
                          throw ConfigError(e.line, flux.value_column, "Poiseuille flux must be non-negative");
                  } else {
                      throw ConfigError(e.line, e.value_column, "'inflow' must be POISEUILLE(flux), auto or none");
                  }
              }},
             {"inflow_x", [](CaseConfig& c, const IniEntry& e) {
                  c.physics.inflow = InflowKind::Expression;
                  c.physics.inflow_x = to_expression(e);
              }},
             {"inflow_y", [](CaseConfig& c, const IniEntry& e) {
                  c.physics.inflow = InflowKind::Expression;
                  c.physics.inflow_y = to_expression(e);
              }},
             {"traction", [](CaseConfig& c, const IniEntry& e) {
                  if (is_auto(e)) c.physics.traction_auto = true;
                  else c.physics.traction = to_expression(e);
              }},
         }},
        {"solver",
         {
             {"linearization", [](CaseConfig& c, const IniEntry& e) {
                  c.solver.linearization = to_enum<Linearization>(
                      e, {{"PICARD", Linearization::Picard}, {"NEWTON", Linearization::Newton},
                          {"PICARD_THEN_NEWTON", Linearization::PicardThenNewton}});
              }},
             {"outlet", [](CaseConfig& c, const IniEntry& e) {
                  c.solver.outlet = to_enum<OutletCondition>(e, {{"DDN", OutletCondition::Ddn}, {"DO_NOTHING", OutletCondition::DoNothing}});
              }},
             {"convection", [](CaseConfig& c, const IniEntry& e) {
                  c.solver.convection = to_enum<ConvectionForm>(e, {{"SKEW", ConvectionForm::Skew}, {"CONVECTIVE", ConvectionForm::Convective}});
              }},
             {"tolerance", [](CaseConfig& c, const IniEntry& e) { c.solver.relative_tolerance = to_positive(e); }},
             {"absolute_tolerance", [](CaseConfig& c, const IniEntry& e) { c.solver.absolute_tolerance = to_positive(e); }},
             {"max_iterations", [](CaseConfig& c, const IniEntry& e) { c.solver.max_iterations = to_int(e, 1); }},
             {"picard_iterations", [](CaseConfig& c, const IniEntry& e) { c.solver.picard_iterations = to_int(e, 0); }},
             {"picard_switch", [](CaseConfig& c, const IniEntry& e) { c.solver.picard_switch = to_double(e); }},
             {"divergence_window", [](CaseConfig& c, const IniEntry& e) { c.solver.divergence_window = to_int(e, 0); }},
             {"max_backtracks", [](CaseConfig& c, const IniEntry& e) { c.solver.max_backtracks = to_int(e, 0); }},
             {"continuation", [](CaseConfig& c, const IniEntry& e) { c.solver.continuation = to_bool(e); }},
             {"lambda_initial_step", [](CaseConfig& c, const IniEntry& e) { c.solver.lambda_initial_step = to_positive(e); }},
             {"lambda_min_step", [](CaseConfig& c, const IniEntry& e) { c.solver.lambda_min_step = to_positive(e); }},
             {"lambda_growth", [](CaseConfig& c, const IniEntry& e) { c.solver.lambda_growth = to_positive(e); }},
         }},
        {"exact",
         {
             {"u_x", [](CaseConfig& c, const IniEntry& e) { c.exact.u_x = to_expression(e); }},
             {"u_y", [](CaseConfig& c, const IniEntry& e) { c.exact.u_y = to_expression(e); }},
             {"p", [](CaseConfig& c, const IniEntry& e) { c.exact.p = to_expression(e); }},
         }},
        {"outputs",
         {
             {"directory", [](CaseConfig& c, const IniEntry& e) { c.outputs.directory = e.value; }},
             {"vtk", [](CaseConfig& c, const IniEntry& e) { c.outputs.vtk = to_bool(e); }},
             {"energy", [](CaseConfig& c, const IniEntry& e) { c.outputs.energy = to_bool(e); }},
             {"mesh", [](CaseConfig& c, const IniEntry& e) { c.outputs.mesh = to_bool(e); }},
         }},
    };
    return table;
}

}  // namespace

IniDocument IniDocument::parse(std::string_view text)
{
    IniDocument doc;
    int line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view raw = text.substr(start, end - start);
        ++line_no;
        if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
        // Strip comments; '#' and ';' have no other meaning in the grammar.
        const std::size_t hash = raw.find_first_of("#;");
        const std::string_view content = hash == std::string_view::npos ? raw : raw.substr(0, hash);
        std::size_t lead = 0;
        const std::string_view line = trim(content, &lead);
        const int col0 = static_cast<int>(lead) + 1;

        if (line.empty()) {
        } else if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(line_no, col0 + static_cast<int>(line.size()), "expected ']'");
            const std::string_view name = trim(line.substr(1, line.size() - 2));
            if (name.empty()) throw ConfigError(line_no, col0 + 1, "empty section name");
            for (const IniSection& s : doc.sections)
                if (s.name == name) throw ConfigError(line_no, col0 + 1, "duplicate section [" + std::string(name) + "]");
            doc.sections.push_back({std::string(name), line_no, {}});
        } else {
            const std::size_t eq = line.find('=');
            if (eq == std::string_view::npos) throw ConfigError(line_no, col0, "expected 'key = value'");
            if (doc.sections.empty()) throw ConfigError(line_no, col0, "key outside of any section");
            const std::string_view key = trim(line.substr(0, eq));
            std::size_t vlead = 0;
            const std::string_view value = trim(line.substr(eq + 1), &vlead);
            if (key.empty()) throw ConfigError(line_no, col0, "missing key");
            for (char c : key)
                if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_'))
                    throw ConfigError(line_no, col0, "malformed key '" + std::string(key) + "'");
            const int value_col = col0 + static_cast<int>(eq + 1 + vlead);
            if (value.empty()) throw ConfigError(line_no, value_col, "missing value for '" + std::string(key) + "'");
            IniSection& sec = doc.sections.back();
            for (const IniEntry& e : sec.entries)
                if (e.key == key) throw ConfigError(line_no, col0, "duplicate key '" + std::string(key) + "'");
            sec.entries.push_back({std::string(key), std::string(value), line_no, col0, value_col});
        }
        if (end == text.size()) break;
        start = end + 1;
    }
    return doc;
}

CaseConfig CaseConfig::parse(std::string_view text)
{
    const IniDocument doc = IniDocument::parse(text);
    CaseConfig c;
    const auto& table = schema();
    const IniEntry* auto_key = nullptr;
    int solver_line = 0;
    for (const IniSection& sec : doc.sections) {
        const auto it = table.find(sec.name);
        if (it == table.end()) throw ConfigError(sec.line, 2, "unknown section [" + sec.name + "]");
        if (sec.name == "exact") c.exact.present = true;
        if (sec.name == "solver") solver_line = sec.line;
        for (const IniEntry& e : sec.entries) {
            const auto setter = it->second.find(e.key);
            if (setter == it->second.end())
                throw ConfigError(e.line, e.key_column, "unknown key '" + e.key + "' in [" + sec.name + "]");
            setter->second(c, e);
            if (sec.name == "physics" && is_auto(e) && !auto_key) auto_key = &e;
        }
    }
    if (auto_key && !c.exact.present)
        throw ConfigError(auto_key->line, auto_key->value_column, "'auto' requires an [exact] section");
    if (c.physics.force_auto && (c.physics.force_x || c.physics.force_y))
        throw ConfigError(auto_key->line, auto_key->key_column, "force is both auto and explicit");
    try {
        c.solver.validate();
    } catch (const ArgumentError& e) {
        throw ConfigError(solver_line, 1, e.what());
    }
    return c;
}

std::string CaseConfig::serialize() const
{
    std::ostringstream o;
    const auto num = format_number;
    const auto flag = [](bool b) { return b ? "true" : "false"; };
    o << "[domain]\n";
    if (domain.shape == DomainShape::Straight) {
        o << "shape = straight\nlength = " << num(domain.length) << "\nhalf_height = " << num(domain.half_height) << "\n";
    } else {
        o << "shape = sections\n"
          << "inlet_length = " << num(domain.inlet_length) << "\ninlet_half_height = " << num(domain.inlet_half_height)
          << "\ninlet_origin_x = " << num(domain.inlet_origin_x) << "\ninlet_origin_y = " << num(domain.inlet_origin_y)
          << "\ninlet_angle = " << num(domain.inlet_angle) << "\noutlet_length = " << num(domain.outlet_length)
          << "\noutlet_half_height = " << num(domain.outlet_half_height)
          << "\noutlet_origin_x = " << num(domain.outlet_origin_x) << "\noutlet_origin_y = " << num(domain.outlet_origin_y)
          << "\noutlet_angle = " << num(domain.outlet_angle) << "\ntangent_scale = " << num(domain.tangent_scale) << "\n";
    }
    o << "\n[mesh]\ntarget_h = " << num(mesh.target_h) << "\nrefinements = " << mesh.refinements
      << "\nmin_angle = " << num(mesh.min_angle) << "\n";

    o << "\n[physics]\neta = " << num(physics.eta) << "\n";
    if (physics.force_auto) o << "force = auto\n";
    if (physics.force_x) o << "force_x = " << physics.force_x->text() << "\n";
    if (physics.force_y) o << "force_y = " << physics.force_y->text() << "\n";
    switch (physics.inflow) {
    case InflowKind::None: o << "inflow = none\n"; break;
    case InflowKind::Poiseuille: o << "inflow = POISEUILLE(" << num(physics.inflow_flux) << ")\n"; break;
    case InflowKind::Exact: o << "inflow = auto\n"; break;
    case InflowKind::Expression:
        o << "inflow_x = " << physics.inflow_x.text() << "\ninflow_y = " << physics.inflow_y.text() << "\n";
        break;
    }
    if (physics.traction_auto) o << "traction = auto\n";
    if (physics.traction) o << "traction = " << physics.traction->text() << "\n";

    const SolverConfig& s = solver;
    o << "\n[solver]\nlinearization = " << linearization_name(s.linearization) << "\noutlet = " << outlet_name(s.outlet)
      << "\nconvection = " << convection_name(s.convection) << "\ntolerance = " << num(s.relative_tolerance)
      << "\nabsolute_tolerance = " << num(s.absolute_tolerance) << "\nmax_iterations = " << s.max_iterations
      << "\npicard_iterations = " << s.picard_iterations << "\npicard_switch = " << num(s.picard_switch)
      << "\ndivergence_window = " << s.divergence_window << "\nmax_backtracks = " << s.max_backtracks
      << "\ncontinuation = " << flag(s.continuation) << "\nlambda_initial_step = " << num(s.lambda_initial_step)
      << "\nlambda_min_step = " << num(s.lambda_min_step) << "\nlambda_growth = " << num(s.lambda_growth) << "\n";

    if (exact.present)
        o << "\n[exact]\nu_x = " << exact.u_x.text() << "\nu_y = " << exact.u_y.text() << "\np = " << exact.p.text() << "\n";
    o << "\n[outputs]\ndirectory = " << outputs.directory << "\nvtk = " << flag(outputs.vtk)
      << "\nenergy = " << flag(outputs.energy) << "\nmesh = " << flag(outputs.mesh) << "\n";
    return o.str();
}

CaseConfig read_case_file(const std::string& path, std::string* raw_text)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(0, 0, "cannot read case file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    if (raw_text) *raw_text = text;
    return CaseConfig::parse(text);
}

}  // namespace pipeflow
