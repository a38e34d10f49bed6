#pragma once

#include "criticgate/datagen.hpp"
#include "criticgate/runner.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace criticgate {

// Operator-facing configuration for run/datagen. Backend specs:
//   actor:  "scripted" | "endpoint:<base_url>,<model>"
//   critic: "none" | "oracle" | "endpoint:<base_url>,<model>"
// gate "auto" resolves to state_mutating for retail and final_recommendation
// for travel. Endpoint credentials come from CRITIC_GATE_API_KEY.
struct RunConfig {
    std::string suite_path;
    std::string out_dir;
    std::string actor = "scripted";
    std::string critic = "none";
    std::string gate = "auto";
    int runs_per_task = 5;
    std::int64_t seed = 0;
    int concurrency = 1;
};

struct DatagenConfig {
    RunConfig run;
    int psi = 2;
    bool strict = false;
};

struct GenSuiteConfig {
    std::string env_kind;  // retail | travel
    int n_tasks = 0;
    int difficulty = 2;  // travel only
    std::uint64_t seed = 0;
    std::string out_path;
    double error_probability = 0.3;
    std::vector<std::string> error_modes = {"violate_constraint"};
    std::string compliance = "complies_with_guidance";
};

int cmd_run(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_datagen(const DatagenConfig& config, std::ostream& out, std::ostream& err);
int cmd_gen_suite(const GenSuiteConfig& config, std::ostream& out, std::ostream& err);
int cmd_eval(const std::vector<std::string>& log_paths, const std::string& report_path,
             std::ostream& out, std::ostream& err);
int cmd_inspect(const std::string& log_path, const std::string& task_filter,
                std::int64_t seed_filter, std::ostream& out, std::ostream& err);

}  // namespace criticgate
