#include "pipeflow/commands.hpp"

#include "pipeflow/case_setup.hpp"
#include "pipeflow/diagnostics.hpp"
#include "pipeflow/output.hpp"

#include "json.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <ostream>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;

namespace pipeflow {

namespace {

// One run directory: loaded case, emitted files and the manifest.
class Run {
public:
    Run(const CommandOptions& o, std::string verb) : verb_(std::move(verb)), start_(clock::now())
    {
        config_ = read_case_file(o.case_path, &raw_);
        dir_ = o.output_dir.empty() ? fs::path(config_.outputs.directory) : fs::path(o.output_dir);
        fs::create_directories(dir_);
        manifest_["version"] = PIPEFLOW_VERSION;
        manifest_["command"] = verb_;
        manifest_["case_file"] = o.case_path;
        char hash[17];
        std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a(raw_)));
        manifest_["config_hash"] = std::string("fnv1a64:") + hash;
        manifest_["files"] = json::array();
        manifest_["timings"] = json::object();
    }

    const CaseConfig& config() const { return config_; }
    json& manifest() { return manifest_; }

    void write(const std::string& name, const std::string& content)
    {
        write_file_atomic(dir_ / name, content);
        manifest_["files"].push_back(name);
    }

    template <typename F>
    auto timed(const std::string& what, F&& f)
    {
        const auto t0 = clock::now();
        if constexpr (std::is_void_v<decltype(f())>) {
            f();
            manifest_["timings"][what] = seconds(t0);
        } else {
            auto r = f();
            manifest_["timings"][what] = seconds(t0);
            return r;
        }
    }

    void mesh_stats(const FESpace& space)
    {
        const Mesh& m = space.mesh();
        manifest_["mesh"] = {{"vertices", m.vertices.size()},
                             {"triangles", m.triangles.size()},
                             {"boundary_edges", m.boundary_edges.size()},
                             {"max_edge_length", m.max_edge_length()},
                             {"min_angle_degrees", m.min_angle_degrees()},
                             {"velocity_dofs", space.velocity_size()},
                             {"pressure_dofs", space.pressure_size()}};
    }

    void finish(int code)
    {
        manifest_["exit_code"] = code;
        manifest_["timings"]["total"] = seconds(start_);
        write_file_atomic(dir_ / "manifest.json", manifest_.dump(2) + "\n");
    }

private:
    using clock = std::chrono::steady_clock;
    static double seconds(clock::time_point t0) { return std::chrono::duration<double>(clock::now() - t0).count(); }

    std::string verb_;
    std::string raw_;
    CaseConfig config_;
    fs::path dir_;
    json manifest_;
    clock::time_point start_;
};

std::string mesh_text(const Mesh& mesh)
{
    std::ostringstream o;
    write_mesh(o, mesh);
    return o.str();
}

json solver_summary(const SolutionFields& f)
{
    return {{"converged", f.converged},
            {"iterations", f.iterations},
            {"picard_iterations", f.picard_iterations},
            {"newton_iterations", f.newton_iterations},
            {"relative_residual", f.relative_residual},
            {"absolute_residual", f.absolute_residual},
            {"divergence_residual", f.divergence_residual}};
}

std::string trace_csv(const std::vector<double>& trace)
{
    CsvTable t({"iteration", "relative_residual"});
    for (std::size_t i = 0; i < trace.size(); ++i) t.row({CsvTable::cell(static_cast<int>(i)), CsvTable::cell(trace[i])});
    return t.str();
}

// Maps the error hierarchy to exit codes; the run manifest is written
// whenever the run directory exists.
int guarded(const CommandOptions& o, const std::string& verb, std::ostream& err,
            const std::function<int(Run&)>& body)
{
    std::unique_ptr<Run> run;
    try {
        run = std::make_unique<Run>(o, verb);
        const int code = body(*run);
        run->finish(code);
        return code;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return ExitConfig;
    } catch (const GeometryError& e) {
        err << "config error: invalid geometry: " << e.what() << '\n';
        if (run) run->finish(ExitConfig);
        return ExitConfig;
    } catch (const MeshError& e) {
        err << "config error: mesh generation failed: " << e.what() << '\n';
        if (run) run->finish(ExitConfig);
        return ExitConfig;
    } catch (const Diverged& e) {
        err << "diverged: " << e.what() << '\n';
        if (run) {
            run->write("trace.csv", trace_csv(e.trace()));
            run->manifest()["failure"] = e.what();
            run->finish(ExitDiverged);
        }
        return ExitDiverged;
    } catch (const ContinuationStalled& e) {
        err << "continuation stalled: " << e.what() << '\n';
        if (run) run->finish(ExitDiverged);
        return ExitDiverged;
    } catch (const LineSearchFailure& e) {
        err << "diverged: " << e.what() << '\n';
        if (run) run->finish(ExitDiverged);
        return ExitDiverged;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        if (run) {
            run->manifest()["failure"] = e.what();
            run->finish(ExitFailure);
        }
        return ExitFailure;
    }
}

void report_warnings(Run& run, const std::vector<std::string>& warnings, std::ostream& err)
{
    for (const std::string& w : warnings) err << "warning: " << w << '\n';
    if (!warnings.empty()) run.manifest()["warnings"] = warnings;
}

std::string energy_csv(const EnergyReport& e)
{
    CsvTable t({"lhs", "force_work", "traction_work", "viscous_coupling", "reference_convection",
                "perturbation_convection", "ddn_dissipation", "pressure_work", "retained", "identity_residual", "inequality_holds",
                "backflow_energy", "min_outlet_normal_velocity"});
    using C = CsvTable;
    t.row({C::cell(e.lhs), C::cell(e.force_work), C::cell(e.traction_work), C::cell(e.viscous_coupling),
           C::cell(e.reference_convection), C::cell(e.perturbation_convection), C::cell(e.ddn_dissipation),
           C::cell(e.pressure_work), C::cell(e.retained), C::cell(e.identity_residual), C::cell(e.inequality_holds), C::cell(e.backflow_energy),
           C::cell(e.min_outlet_normal_velocity)});
    return t.str();
}

}  // namespace

int command_solve(const CommandOptions& o, std::ostream& out, std::ostream& err)
{
    return guarded(o, "solve", err, [&](Run& run) {
        const CaseConfig& cfg = run.config();
        const CaseSetup setup = build_case(cfg);
        report_warnings(run, setup.warnings, err);
        const FESpace space = run.timed("mesh", [&] { return FESpace(generate_mesh(setup.spec, case_mesh_options(cfg))); });
        run.mesh_stats(space);
        if (cfg.outputs.mesh) run.write("mesh.txt", mesh_text(space.mesh()));

        const SolveResult r = run.timed("solve", [&] { return solve(space, setup.spec, setup.data, cfg.solver); });
        report_warnings(run, r.reference.report.warnings, err);
        json& m = run.manifest();
        m["solver"] = solver_summary(r.fields);
        m["solver"]["linearization"] = linearization_name(cfg.solver.linearization);
        m["solver"]["outlet"] = outlet_name(cfg.solver.outlet);
        m["solver"]["convection"] = convection_name(cfg.solver.convection);
        m["solver"]["residual_history"] = r.fields.residual_history;
        const ReferenceReport& rep = r.reference.report;
        m["reference_flow"] = {{"influx", r.reference.phi_star},
                               {"compatibility_defect", rep.compatibility_defect},
                               {"outlet_trace_error", rep.outlet_trace_error},
                               {"divergence_residual", rep.divergence_residual},
                               {"normal_derivative", rep.normal_derivative},
                               {"w_star_h1", rep.w_star_h1},
                               {"bound_ratio", rep.bound_ratio}};

        if (cfg.outputs.vtk) {
            std::ostringstream vtk;
            write_vtk(vtk, space, r.fields.velocity, r.fields.pressure);
            run.write("u_p.vtk", vtk.str());
        }
        const EnergyReport e = energy_report(space, setup.data, r.reference, r.fields, cfg.solver);
        if (cfg.outputs.energy) run.write("energy.csv", energy_csv(e));
        m["diagnostics"] = {{"identity_residual", e.identity_residual},
                            {"backflow_energy", e.backflow_energy},
                            {"inequality_holds", e.inequality_holds}};

        out << "converged in " << r.fields.iterations << " iterations, relative residual "
            << format_double(r.fields.relative_residual) << '\n';
        if (setup.exact) {
            const ErrorNorms n = error_norms(space, r.fields.velocity, r.fields.pressure, *setup.exact);
            out << "H1 velocity error " << format_double(n.h1_velocity) << '\n';
            out << "L2 velocity error " << format_double(n.l2_velocity) << '\n';
            out << "L2 pressure error " << format_double(n.l2_pressure) << '\n';
            m["errors"] = {{"l2_velocity", n.l2_velocity}, {"h1_velocity", n.h1_velocity}, {"l2_pressure", n.l2_pressure}};
        }
        return int(ExitOk);
    });
}

int command_converge(const CommandOptions& o, std::ostream& out, std::ostream& err)
{
    return guarded(o, "converge", err, [&](Run& run) {
        const CaseConfig& cfg = run.config();
        if (!cfg.exact.present) throw ConfigError(0, 0, "converge needs an [exact] section");
        if (o.levels < 1) throw ConfigError(0, 0, "--levels must be at least 1");
        const CaseSetup setup = build_case(cfg);
        report_warnings(run, setup.warnings, err);
        CsvTable t({"level", "h", "L2_vel", "H1_vel", "L2_pres", "rate_L2_vel", "rate_H1_vel", "rate_L2_pres"});
        std::vector<double> hs;
        std::vector<ErrorNorms> errs;
        // Errors at roundoff level carry no rate.
        const auto rate = [](double e0, double e1, double h0, double h1) {
            if (!(e0 > 1e-12) || !(e1 > 1e-12)) return std::nan("");
            return std::log(e0 / e1) / std::log(h0 / h1);
        };
        for (int level = 0; level < o.levels; ++level) {
            const FESpace space(generate_mesh(setup.spec, case_mesh_options(cfg, level)));
            const SolveResult r = run.timed("level_" + std::to_string(level),
                                            [&] { return solve(space, setup.spec, setup.data, cfg.solver); });
            hs.push_back(space.mesh().max_edge_length());
            errs.push_back(error_norms(space, r.fields.velocity, r.fields.pressure, *setup.exact));
            const ErrorNorms& e = errs.back();
            double rl2 = std::nan(""), rh1 = std::nan(""), rp = std::nan("");
            if (level > 0) {
                const ErrorNorms& p = errs[errs.size() - 2];
                const double h0 = hs[hs.size() - 2], h1 = hs.back();
                rl2 = rate(p.l2_velocity, e.l2_velocity, h0, h1);
                rh1 = rate(p.h1_velocity, e.h1_velocity, h0, h1);
                rp = rate(p.l2_pressure, e.l2_pressure, h0, h1);
            }
            using C = CsvTable;
            t.row({C::cell(level), C::cell(hs.back()), C::cell(e.l2_velocity), C::cell(e.h1_velocity),
                   C::cell(e.l2_pressure), C::cell(rl2), C::cell(rh1), C::cell(rp)});
            out << "level " << level << " h " << format_double(hs.back()) << " L2_vel " << format_double(e.l2_velocity)
                << " rate " << format_double(rl2) << '\n';
        }
        run.write("convergence.csv", t.str());
        return int(ExitOk);
    });
}

int command_continuation(const CommandOptions& o, std::ostream& out, std::ostream& err)
{
    return guarded(o, "continuation", err, [&](Run& run) {
        const CaseConfig& cfg = run.config();
        const CaseSetup setup = build_case(cfg);
        report_warnings(run, setup.warnings, err);
        const FESpace space(generate_mesh(setup.spec, case_mesh_options(cfg)));
        run.mesh_stats(space);
        SolverConfig sc = cfg.solver;
        sc.continuation = true;
        const SolveResult r = run.timed("solve", [&] { return solve(space, setup.spec, setup.data, sc); });
        const ContinuationState& st = r.continuation;
        CsvTable t({"lambda", "J", "iterations", "step"});
        for (std::size_t i = 0; i < st.lambdas.size(); ++i)
            t.row({CsvTable::cell(st.lambdas[i]), CsvTable::cell(st.gradient_norms[i]), CsvTable::cell(st.iterations[i]),
                   CsvTable::cell(st.steps[i])});
        run.write("lambda.csv", t.str());
        run.manifest()["continuation"] = {{"accepted_steps", st.lambdas.size() - 1}, {"log", st.log}};
        run.manifest()["solver"] = solver_summary(r.fields);
        out << "reached lambda = 1 in " << st.lambdas.size() - 1 << " steps, J(1) = " << format_double(st.gradient_norms.back())
            << '\n';
        return int(ExitOk);
    });
}

int command_compare_outlet(const CommandOptions& o, std::ostream& out, std::ostream& err)
{
    return guarded(o, "compare-outlet", err, [&](Run& run) {
        const CaseConfig& cfg = run.config();
        const CaseSetup setup = build_case(cfg);
        report_warnings(run, setup.warnings, err);
        const FESpace space(generate_mesh(setup.spec, case_mesh_options(cfg)));
        run.mesh_stats(space);
        const ReferenceFlow ref = build_reference_flow(space, setup.spec, setup.data);

        struct Branch {
            const char* name = "";
            SolverConfig config;
            bool converged = false;
            int iterations = 0;
            double final_residual = std::nan("");
            double min_residual = std::nan("");
            double backflow = std::nan("");
            VectorX velocity;
            std::string failure;
        };
        // DDN uses the configured iteration; DO_NOTHING is the classical Picard
        // iteration run for the full budget so stagnation is measured, not
        // cut short.
        Branch ddn;
        ddn.name = "DDN";
        ddn.config = cfg.solver;
        ddn.config.outlet = OutletCondition::Ddn;
        Branch dn;
        dn.name = "DO_NOTHING";
        dn.config = cfg.solver;
        dn.config.outlet = OutletCondition::DoNothing;
        dn.config.linearization = Linearization::Picard;
        dn.config.divergence_window = 0;

        json branches = json::array();
        for (Branch* b : {&ddn, &dn}) {
            const NavierStokesSystem system(space, setup.data, ref, b->config);
            std::vector<double> history;
            try {
                SolutionFields f;
                if (b->config.continuation) {
                    const ContinuationState st = continuation_solve(system);
                    f = system.package(st.solutions.back(), 1.0);
                    for (int it : st.iterations) f.iterations += it;
                } else {
                    f = system.run(VectorX::Zero(system.size()), 1.0);
                }
                history = f.residual_history;
                b->converged = true;
                b->iterations = f.iterations;
                b->final_residual = f.relative_residual;
                b->velocity = f.velocity;
                b->backflow = energy_report(space, setup.data, ref, f, b->config).backflow_energy;
            } catch (const Diverged& e) {
                history = e.trace();
                b->failure = e.what();
                b->iterations = static_cast<int>(history.size()) - 1;
                if (!history.empty()) b->final_residual = history.back();
            } catch (const Error& e) {
                b->failure = e.what();
            }
            if (!history.empty()) b->min_residual = *std::min_element(history.begin(), history.end());
            if (!b->failure.empty()) err << b->name << " branch failed: " << b->failure << '\n';
            branches.push_back({{"outlet", b->name}, {"converged", b->converged}, {"failure", b->failure}});
        }

        CsvTable t({"outlet", "converged", "iterations", "final_residual", "min_residual", "backflow_energy",
                    "h1_distance"});
        const double distance =
            ddn.converged && dn.converged ? h1_norm_velocity(space, ddn.velocity - dn.velocity) : std::nan("");
        for (const Branch* b : {&ddn, &dn}) {
            using C = CsvTable;
            t.row({C::cell(b->name), C::cell(b->converged), C::cell(b->iterations), C::cell(b->final_residual),
                   C::cell(b->min_residual), C::cell(b->backflow), C::cell(distance)});
            out << b->name << ": " << (b->converged ? "converged" : "failed") << ", min residual "
                << format_double(b->min_residual) << ", backflow energy " << format_double(b->backflow) << '\n';
        }
        run.write("outlet_compare.csv", t.str());
        run.manifest()["branches"] = branches;
        return ddn.converged || dn.converged ? int(ExitOk) : int(ExitDiverged);
    });
}

int command_constants(const CommandOptions& o, std::ostream& out, std::ostream& err)
{
    return guarded(o, "constants", err, [&](Run& run) {
        const CaseConfig& cfg = run.config();
        const CaseSetup setup = build_case(cfg);
        const FESpace space(generate_mesh(setup.spec, case_mesh_options(cfg)));
        run.mesh_stats(space);
        ConstantsOptions opt;
        opt.seed = o.seed;
        opt.inflow_samples = o.samples;
        const ConstantsEstimate c =
            run.timed("constants", [&] { return estimate_constants(space, setup.spec, setup.data.eta, opt); });
        CsvTable t({"h", "triangles", "eta", "seed", "S_star", "trace_constant", "infsup_constant", "M_star",
                    "omega_star"});
        using C = CsvTable;
        t.row({C::cell(space.mesh().max_edge_length()), C::cell(static_cast<long long>(space.num_triangles())),
               C::cell(c.eta), C::cell(std::to_string(o.seed)), C::cell(c.s_star), C::cell(c.trace_constant),
               C::cell(c.infsup_constant), C::cell(c.m_star), C::cell(c.omega_star)});
        run.write("constants.csv", t.str());
        out << "S* " << format_double(c.s_star) << "  trace " << format_double(c.trace_constant) << "  inf-sup "
            << format_double(c.infsup_constant) << "  M* " << format_double(c.m_star) << "  omega* "
            << format_double(c.omega_star) << '\n';
        return int(ExitOk);
    });
}

int command_uniqueness(const CommandOptions& o, std::ostream& out, std::ostream& err)
{
    return guarded(o, "uniqueness", err, [&](Run& run) {
        const CaseConfig& cfg = run.config();
        if (o.starts < 1) throw ConfigError(0, 0, "--starts must be at least 1");
        const CaseSetup setup = build_case(cfg);
        const FESpace space(generate_mesh(setup.spec, case_mesh_options(cfg)));
        run.mesh_stats(space);
        const UniquenessReport rep = run.timed(
            "probe", [&] { return uniqueness_probe(space, setup.spec, setup.data, cfg.solver, o.starts, o.seed); });
        CsvTable t({"start", "amplitude", "converged", "iterations"});
        for (int s = 0; s < rep.starts; ++s) {
            const auto i = static_cast<std::size_t>(s);
            t.row({CsvTable::cell(s), CsvTable::cell(rep.start_amplitudes[i]), CsvTable::cell(bool(rep.start_converged[i])),
                   CsvTable::cell(rep.start_iterations[i])});
        }
        run.write("uniqueness.csv", t.str());
        CsvTable summary({"starts", "converged", "seed", "max_pairwise_h1", "data_magnitude"});
        summary.row({CsvTable::cell(rep.starts), CsvTable::cell(rep.converged), CsvTable::cell(std::to_string(o.seed)),
                     CsvTable::cell(rep.max_pairwise_h1), CsvTable::cell(rep.data_magnitude)});
        run.write("uniqueness_summary.csv", summary.str());
        for (const std::string& f : rep.failures) err << "start failed: " << f << '\n';
        out << rep.converged << " of " << rep.starts << " starts converged, max pairwise H1 distance "
            << format_double(rep.max_pairwise_h1) << '\n';
        return rep.converged > 0 ? int(ExitOk) : int(ExitDiverged);
    });
}

int command_mesh(const CommandOptions& o, std::ostream& out, std::ostream& err)
{
    return guarded(o, "mesh", err, [&](Run& run) {
        const CaseConfig& cfg = run.config();
        const DomainSpec spec = case_domain(cfg);
        const Mesh mesh = generate_mesh(spec, case_mesh_options(cfg));
        const FESpace space(mesh);
        run.mesh_stats(space);
        run.write("mesh.txt", mesh_text(mesh));
        out << mesh.vertices.size() << " vertices, " << mesh.triangles.size() << " triangles, min angle "
            << format_double(mesh.min_angle_degrees()) << '\n';
        return int(ExitOk);
    });
}

}  // namespace pipeflow
