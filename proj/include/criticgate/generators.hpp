#pragma once

#include "criticgate/backends.hpp"
#include "criticgate/suite.hpp"

#include <cstdint>

namespace criticgate {

struct GeneratorOptions {
    double error_probability = 0.3;
    std::set<ErrorMode> error_modes = {ErrorMode::violate_constraint};
    Compliance compliance = Compliance::complies_with_guidance;
};

// Seeded, fully deterministic task corpora. Every generated task passes
// validate_task_document.
Suite generate_retail_suite(int n_tasks, std::uint64_t seed, const GeneratorOptions& opts = {});

// difficulty = preferences per aspect, in {2, 3, 4}.
Suite generate_travel_suite(int n_tasks, int difficulty, std::uint64_t seed,
                            const GeneratorOptions& opts = {});

// Generator post-conditions, re-checkable on any loaded fixture: the scripted
// intended path reaches reward 1, every intended mutating call is policy-clean
// at its state (retail), and every intended recommendation is optimal
// (travel). Throws InvariantViolation on failure.
void validate_task_document(const TaskDocument& doc);

}  // namespace criticgate
