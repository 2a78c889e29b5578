#pragma once

#include <optional>
#include <string>
#include <vector>

#include "moonshot/sim.hpp"

namespace moonshot {

// A seed sweep: the same configuration run once per seed in [seed_begin,
// seed_end), traceless, across `jobs` worker threads.
struct CampaignConfig {
    SimConfig base;  // base.seed is ignored; the range below supplies seeds
    uint64_t seed_begin = 0;
    uint64_t seed_end = 1;  // exclusive
    uint32_t jobs = 1;
    bool stop_on_violation = true;
    uint64_t liveness_target = 0;  // count seeds whose every replica commits this much
};

struct CampaignResult {
    uint64_t seeds_run = 0;
    uint64_t total_steps = 0;
    uint64_t violations = 0;
    // Smallest violating seed among those inspected before the early stop;
    // with stop_on_violation and jobs > 1, later workers may skip seeds, so
    // this is a witness, not a guaranteed minimum over the whole range.
    std::optional<uint64_t> violation_seed;
    std::optional<Violation> violation;
    uint64_t liveness_ok = 0;
    uint64_t min_commits_floor = 0;  // worst min-commits over all seeds run

    std::string render() const;
};

CampaignResult run_campaign(const CampaignConfig& cfg);

// One campaign per protocol mutation, each expected to end in a violation.
struct MutantOutcome {
    Mutation mutation;
    bool killed = false;
    uint64_t seeds_tried = 0;
    std::optional<uint64_t> killing_seed;
    std::optional<Violation> violation;
};

std::vector<MutantOutcome> run_mutants(const SimConfig& base, uint64_t max_seeds, uint32_t jobs);

}  // namespace moonshot
