#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "malab/io.hpp"
#include "malab/verify.hpp"

namespace malab {

/// Exit codes of the command-line front end.
inline constexpr int kExitSuccess = 0;
inline constexpr int kExitVerifyFailures = 1;
inline constexpr int kExitSchemaViolation = 2;

/// One file written by a run, with the statement it documents.
struct Artifact {
    std::string file;  ///< path relative to the output directory
    std::string citation;
};

struct RunOutcome {
    int exit_code = kExitSuccess;
    std::string out_dir;
    std::vector<Artifact> artifacts;
};

/// kExitVerifyFailures when any report failed, kExitSuccess otherwise.
int verify_exit_code(const std::vector<CheckReport>& reports);

/// Output directory of a run: MA_LAB_OUT when set, otherwise config.out.
std::string resolve_output_dir(const RunConfig& config);

/// Model named by the configuration.
KahlerModel model_for(const RunConfig& config);

/// Executes one command and writes its artifacts. Library errors propagate.
RunOutcome run(const RunConfig& config);

struct ExampleInfo {
    std::string id;
    std::string citation;
};
/// Worked examples reproduced by the `examples` command.
const std::vector<ExampleInfo>& example_registry();

/// Full front end: parses arguments (and an optional --config file), runs, prints
/// a JSON summary to `out` and returns the exit code. Errors print
/// {"error": {"kind", "message"}} and return kExitSchemaViolation.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace malab
