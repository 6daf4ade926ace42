#include "pipeflow/commands.hpp"

#include "CLI11.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    CLI::App app{"Steady Navier-Stokes flow in distorted pipes"};
    app.set_version_flag("--version", PIPEFLOW_VERSION);
    app.require_subcommand(1);

    pipeflow::CommandOptions opt;
    const auto add = [&](const char* name, const char* help) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("case", opt.case_path, "case file (INI)")->required();
        sub->add_option("-o,--output", opt.output_dir, "output directory (overrides [outputs] directory)");
        return sub;
    };
    add("solve", "solve the case at lambda = 1");
    add("converge", "refinement study against the [exact] solution")
        ->add_option("--levels", opt.levels, "number of refinement levels")
        ->capture_default_str();
    add("continuation", "adaptive lambda sweep from 0 to 1");
    add("compare-outlet", "DDN against the do-nothing condition");
    CLI::App* constants = add("constants", "estimate S*, trace, inf-sup, M* and omega*");
    constants->add_option("--seed", opt.seed, "random seed")->capture_default_str();
    constants->add_option("--samples", opt.samples, "random inflows for M*")->capture_default_str();
    CLI::App* uniqueness = add("uniqueness", "solve from random initial iterates");
    uniqueness->add_option("--starts", opt.starts, "number of starts")->capture_default_str();
    uniqueness->add_option("--seed", opt.seed, "random seed")->capture_default_str();
    add("mesh", "generate and write the mesh only");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : pipeflow::ExitConfig;
    }

    const std::string verb = app.get_subcommands().front()->get_name();
    if (verb == "solve") return pipeflow::command_solve(opt, std::cout, std::cerr);
    if (verb == "converge") return pipeflow::command_converge(opt, std::cout, std::cerr);
    if (verb == "continuation") return pipeflow::command_continuation(opt, std::cout, std::cerr);
    if (verb == "compare-outlet") return pipeflow::command_compare_outlet(opt, std::cout, std::cerr);
    if (verb == "constants") return pipeflow::command_constants(opt, std::cout, std::cerr);
    if (verb == "uniqueness") return pipeflow::command_uniqueness(opt, std::cout, std::cerr);
    return pipeflow::command_mesh(opt, std::cout, std::cerr);
}
