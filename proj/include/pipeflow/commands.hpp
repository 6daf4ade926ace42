#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

namespace pipeflow {

enum ExitCode : int { ExitOk = 0, ExitFailure = 1, ExitDiverged = 2, ExitConfig = 3 };

struct CommandOptions {
    std::string case_path;
    std::string output_dir;  // overrides [outputs] directory when set
    int levels = 3;
    int starts = 5;
    std::uint64_t seed = 1;
    int samples = 6;
};

int command_solve(const CommandOptions& o, std::ostream& out, std::ostream& err);
int command_converge(const CommandOptions& o, std::ostream& out, std::ostream& err);
int command_continuation(const CommandOptions& o, std::ostream& out, std::ostream& err);
int command_compare_outlet(const CommandOptions& o, std::ostream& out, std::ostream& err);
int command_constants(const CommandOptions& o, std::ostream& out, std::ostream& err);
int command_uniqueness(const CommandOptions& o, std::ostream& out, std::ostream& err);
int command_mesh(const CommandOptions& o, std::ostream& out, std::ostream& err);

}  // namespace pipeflow
