#include "moonshot/campaign.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <thread>

namespace moonshot {

CampaignResult run_campaign(const CampaignConfig& cfg) {
    cfg.base.validate();
    if (cfg.seed_end < cfg.seed_begin) throw SimError("empty seed range");
    uint32_t jobs = std::max(1u, cfg.jobs);

    CampaignResult result;
    result.min_commits_floor = ~uint64_t{0};
    std::atomic<uint64_t> next{cfg.seed_begin};
    std::atomic<bool> stop{false};
    std::mutex merge_mu;

    auto worker = [&]() {
        CampaignResult local;
        local.min_commits_floor = ~uint64_t{0};
        while (!stop.load(std::memory_order_relaxed)) {
            uint64_t seed = next.fetch_add(1, std::memory_order_relaxed);
            if (seed >= cfg.seed_end) break;
            SimConfig run = cfg.base;
            run.seed = seed;
            RunReport r = run_simulation(run, nullptr);
            ++local.seeds_run;
            local.total_steps += r.steps;
            local.min_commits_floor = std::min(local.min_commits_floor, r.min_commits());
            if (cfg.liveness_target > 0 && r.min_commits() >= cfg.liveness_target)
                ++local.liveness_ok;
            if (r.violation) {
                ++local.violations;
                if (!local.violation_seed || seed < *local.violation_seed) {
                    local.violation_seed = seed;
                    local.violation = r.violation;
                }
                if (cfg.stop_on_violation) stop.store(true, std::memory_order_relaxed);
            }
        }
        std::lock_guard<std::mutex> lock(merge_mu);
        result.seeds_run += local.seeds_run;
        result.total_steps += local.total_steps;
        result.violations += local.violations;
        result.liveness_ok += local.liveness_ok;
        result.min_commits_floor = std::min(result.min_commits_floor, local.min_commits_floor);
        if (local.violation_seed &&
            (!result.violation_seed || *local.violation_seed < *result.violation_seed)) {
            result.violation_seed = local.violation_seed;
            result.violation = local.violation;
        }
    };

    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        for (uint32_t i = 0; i < jobs; ++i) threads.emplace_back(worker);
        for (std::thread& t : threads) t.join();
    }
    if (result.seeds_run == 0) result.min_commits_floor = 0;
    return result;
}

std::string CampaignResult::render() const {
    std::string s = "seeds=" + std::to_string(seeds_run) +
                    " steps=" + std::to_string(total_steps) +
                    " violations=" + std::to_string(violations);
    s += " min_commits=" + std::to_string(min_commits_floor);
    s += " liveness_ok=" + std::to_string(liveness_ok);
    if (violation_seed) {
        s += " result=violation seed=" + std::to_string(*violation_seed) +
             " kind=" + violation->kind + " detail=" + violation->detail;
    } else {
        s += " result=safe";
    }
    return s;
}

std::vector<MutantOutcome> run_mutants(const SimConfig& base, uint64_t max_seeds, uint32_t jobs) {
    std::vector<MutantOutcome> outcomes;
    for (Mutation m : kAllMutations) {
        CampaignConfig cc;
        cc.base = base;
        cc.base.mutations = base.mutations | m;
        cc.seed_begin = 0;
        cc.seed_end = max_seeds;
        cc.jobs = jobs;
        cc.stop_on_violation = true;
        CampaignResult r = run_campaign(cc);
        MutantOutcome out;
        out.mutation = m;
        out.killed = r.violation_seed.has_value();
        out.seeds_tried = r.seeds_run;
        out.killing_seed = r.violation_seed;
        out.violation = r.violation;
        outcomes.push_back(std::move(out));
    }
    return outcomes;
}

}  // namespace moonshot
