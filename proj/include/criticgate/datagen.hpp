#pragma once

#include "criticgate/runner.hpp"

#include <map>
#include <string>
#include <vector>

namespace criticgate {

struct FilterConfig {
    int runs_per_task = 5;       // K
    int psi = 2;                 // hard-task threshold
    std::int64_t seed_base = 0;  // run k uses seed_base + k
    bool strict_all_runs = false;  // all-K-successful guard instead of per-trajectory
    int concurrency = 1;
};

void validate_filter_config(const FilterConfig& cfg);

// One row of the emitted dataset: the critic prompt exactly as the critic saw
// it, the critic completion, and the verdict-derived label (positive =
// rejection/revision, negative = approval). seed and env_kind are pipeline
// metadata, not emitted keys.
struct SupervisionSample {
    std::string prompt;
    std::string completion;
    std::string label;  // positive | negative
    std::string task_id;
    int turn_index = 0;
    std::int64_t seed = 0;
    std::string env_kind;
};

struct DomainStats {
    int n_trajectories = 0;
    int n_samples = 0;
    int n_positive = 0;
    int n_negative = 0;
};

struct DatasetStats {
    int n_trajectories = 0;
    int n_samples = 0;
    int n_positive = 0;
    int n_negative = 0;
    std::map<std::string, DomainStats> per_domain;
};

Json to_json(const DatasetStats& stats);

struct HardTaskFilterResult {
    std::vector<std::string> hard_task_ids;          // suite order
    std::vector<EpisodeOutcome> runs;                // all actor-only runs, K per task
    std::map<std::string, int> failures_per_task;
};

// K seeded actor-only runs per task; a task is hard when the number of failed
// runs (reward < 1, or an aborted episode) is >= psi.
HardTaskFilterResult filter_hard_tasks(const Suite& suite, const BackendFactory& actor_factory,
                                       const FilterConfig& cfg);

// K seeded actor-critic runs per hard task, rewards evaluated.
std::vector<EpisodeOutcome> collect_ac_trajectories(const Suite& suite,
                                                    const std::vector<std::string>& hard_task_ids,
                                                    const BackendFactory& actor_factory,
                                                    const BackendFactory& critic_factory,
                                                    GatePolicy gate_policy,
                                                    const FilterConfig& cfg);

// Retention rule: reward 1 and at least one revise verdict (a non-trivial
// intervention, not only passive approvals). Reward must be evaluated.
bool retain(const Trajectory& trajectory);

// One sample per turn the critic evaluated, prompts re-rendered through the
// same template path the episode used. Precondition: retain(trajectory).
std::vector<SupervisionSample> extract_samples(const Trajectory& trajectory,
                                               const TaskDocument& task);

// Writes the JSONL dataset (keys prompt, completion, label, task_id,
// turn_index; fixed order, schema header line) sorted by (task_id, seed,
// turn_index). Duplicate (task_id, seed, turn_index) rows signal a pipeline
// bug and raise an error.
DatasetStats emit_dataset(std::vector<SupervisionSample> samples, const std::string& path);

// Full pipeline: filter -> collect -> retain -> extract -> emit. Persists the
// actor-only and actor-critic run logs next to the dataset for independent
// recounts.
struct DatagenResult {
    std::vector<std::string> hard_task_ids;
    DatasetStats stats;
    std::string dataset_path;
    std::string filter_log_path;
    std::string collect_log_path;
    std::vector<std::string> aborted_runs;  // "task seed: error", counted as failures
};

DatagenResult run_datagen_pipeline(const Suite& suite, const BackendFactory& actor_factory,
                                   const BackendFactory& critic_factory, GatePolicy gate_policy,
                                   const FilterConfig& cfg, const std::string& out_dir);

// Documented extraction prompt for task-spec inference from a raw dialogue.
extern const char* const kTaskInferencePrompt;

// Delegates latent-task inference to a backend: the reply must be a single
// task document (same JSON schema as suite rows, without environment payload
// validation context it is parsed as a TaskSpec). Unparseable output raises
// ParseError.
TaskSpec infer_task_spec(const std::string& raw_dialogue, ModelBackend& model);

}  // namespace criticgate
