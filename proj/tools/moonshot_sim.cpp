#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>

#include "CLI11.hpp"
#include "moonshot/campaign.hpp"
#include "moonshot/config_file.hpp"
#include "moonshot/encoding.hpp"
#include "moonshot/explore.hpp"
#include "moonshot/hash.hpp"
#include "moonshot/sim.hpp"
#include "moonshot/trace.hpp"

namespace {

using namespace moonshot;

constexpr int kExitSafe = 0;
constexpr int kExitUsage = 1;
constexpr int kExitViolation = 2;

struct Overrides {
    std::string config_path;
    std::optional<uint64_t> seed;
    std::optional<uint64_t> max_steps;
    std::optional<uint32_t> f;
    std::optional<std::string> byzantine;
    std::optional<std::string> adversary;
    std::optional<std::string> drop;
    std::optional<std::string> duplicate;
    std::optional<std::string> timer_policy;
    std::vector<std::string> mutate;
    std::string script_path;
};

void add_config_options(CLI::App* cmd, Overrides& ov) {
    cmd->add_option("--config", ov.config_path, "configuration file (key = value lines)");
    cmd->add_option("--seed", ov.seed, "RNG seed");
    cmd->add_option("--max-steps", ov.max_steps, "schedule length bound");
    cmd->add_option("--f", ov.f, "fault budget; the system has 3f+1 validators");
    cmd->add_option("--byzantine", ov.byzantine, "adversary-controlled ids, e.g. 3 or 2,3");
    cmd->add_option("--adversary", ov.adversary,
                    "strategy list: passive, random, equivocator, votesplitter (comma-separated)");
    cmd->add_option("--drop", ov.drop, "per-edge drop probability, e.g. 1/10 or 0.1");
    cmd->add_option("--duplicate", ov.duplicate, "per-edge duplication probability");
    cmd->add_option("--timer-policy", ov.timer_policy, "random or idle_only");
    cmd->add_option("--mutate", ov.mutate, "protocol mutation to enable (repeatable)")
        ->take_all();
    cmd->add_option("--script", ov.script_path,
                    "injection script: lines of step=N dst=K msg=<message>");
}

SimConfig build_config(const Overrides& ov) {
    SimConfig cfg;
    if (!ov.config_path.empty()) cfg = load_config_file(ov.config_path);
    if (ov.seed) cfg.seed = *ov.seed;
    if (ov.max_steps) cfg.max_steps = *ov.max_steps;
    if (ov.f) cfg.f = *ov.f;
    if (ov.byzantine) apply_config_kv(cfg, "byzantine", *ov.byzantine);
    if (ov.adversary) apply_config_kv(cfg, "adversary_strategy", *ov.adversary);
    if (ov.drop) cfg.drop = parse_rational(*ov.drop);
    if (ov.duplicate) cfg.duplicate = parse_rational(*ov.duplicate);
    if (ov.timer_policy) apply_config_kv(cfg, "timer_policy", *ov.timer_policy);
    for (const std::string& name : ov.mutate) {
        auto m = mutation_from_name(name);
        if (!m) throw SimError("unknown mutation \"" + name + "\"");
        cfg.mutations |= *m;
    }
    if (!ov.script_path.empty()) cfg.script = load_script_file(ov.script_path);
    cfg.validate();
    return cfg;
}

std::filesystem::path out_dir(const std::string& flag_value) {
    std::string dir = flag_value;
    if (dir.empty()) {
        if (const char* env = std::getenv("MOONSHOT_SIM_OUT")) dir = env;
    }
    if (dir.empty()) dir = ".";
    std::filesystem::create_directories(dir);
    return dir;
}

std::filesystem::path write_trace(const SimConfig& cfg, const std::filesystem::path& dir,
                                  RunReport& report) {
    std::filesystem::path path = dir / ("trace-" + std::to_string(cfg.seed) + ".txt");
    std::ofstream out(path);
    if (!out) throw SimError("cannot write trace file " + path.string());
    report = run_simulation(cfg, &out);
    return path;
}

uint64_t parse_seed_range(const std::string& s, uint64_t& begin) {
    size_t dots = s.find("..");
    if (dots == std::string::npos) {
        begin = 0;
        return std::stoull(s);
    }
    begin = std::stoull(s.substr(0, dots));
    return std::stoull(s.substr(dots + 2));
}

int cmd_run(const Overrides& ov, const std::string& out_flag) {
    SimConfig cfg = build_config(ov);
    RunReport report;
    std::filesystem::path path = write_trace(cfg, out_dir(out_flag), report);
    std::cout << "trace " << path.string() << "\n";
    std::cout << "report " << report.render() << std::endl;
    return report.violation ? kExitViolation : kExitSafe;
}

int cmd_campaign(const Overrides& ov, const std::string& out_flag, const std::string& seeds,
                 uint32_t jobs, uint64_t liveness, bool keep_going) {
    CampaignConfig cc;
    cc.base = build_config(ov);
    cc.seed_end = parse_seed_range(seeds, cc.seed_begin);
    cc.jobs = jobs;
    cc.liveness_target = liveness;
    cc.stop_on_violation = !keep_going;
    CampaignResult result = run_campaign(cc);
    std::cout << "campaign " << result.render() << std::endl;
    if (!result.violation_seed) return kExitSafe;
    SimConfig bad = cc.base;
    bad.seed = *result.violation_seed;
    RunReport report;
    std::filesystem::path path = write_trace(bad, out_dir(out_flag), report);
    std::cout << "trace " << path.string() << "\n";
    std::cout << "report " << report.render() << std::endl;
    return kExitViolation;
}

int cmd_replay(const std::string& trace_path) {
    ParsedTrace t = load_trace_file(trace_path);
    RunReport report = replay_trace(t);
    std::cout << "replay ok: " << t.events.size() << " events match\n";
    std::cout << "report " << report.render() << std::endl;
    return report.violation ? kExitViolation : kExitSafe;
}

int cmd_explore(const Overrides& ov, uint32_t depth) {
    ExploreConfig ec;
    ec.sim = build_config(ov);
    ec.depth = depth;
    std::set<std::pair<ValidatorId, std::pair<uint64_t, uint64_t>>> seen;
    for (auto& [step, inj] : ec.sim.script) {
        if (seen.emplace(inj.dst, message_fingerprint(inj.msg)).second)
            ec.vocabulary.push_back(inj);
    }
    ec.sim.script.clear();
    ExploreReport report = explore(ec);
    std::cout << "explore " << report.render() << std::endl;
    if (report.violation) {
        for (const std::string& ev : report.path) std::cout << "  " << ev << "\n";
        return kExitViolation;
    }
    return kExitSafe;
}

int cmd_mutants(const Overrides& ov, uint64_t seeds, uint32_t jobs) {
    SimConfig base = build_config(ov);
    std::vector<MutantOutcome> outcomes = run_mutants(base, seeds, jobs);
    bool all_killed = true;
    for (const MutantOutcome& out : outcomes) {
        std::cout << "mutation=" << mutation_name(out.mutation);
        if (out.killed) {
            std::cout << " killed=yes seed=" << *out.killing_seed
                      << " seeds_tried=" << out.seeds_tried << " kind=" << out.violation->kind
                      << "\n";
        } else {
            std::cout << " killed=no seeds_tried=" << out.seeds_tried << "\n";
            all_killed = false;
        }
    }
    std::cout.flush();
    return all_killed ? kExitSafe : kExitViolation;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"moonshot-sim: deterministic adversarial simulator for Moonshot consensus"};
    app.require_subcommand(1);

    Overrides ov;
    std::string out_flag, seeds = "1", trace_path;
    uint32_t jobs = 1, depth = 8;
    uint64_t liveness = 0, mutant_seeds = 10000;
    bool keep_going = false;

    CLI::App* run = app.add_subcommand("run", "one traced run under a random schedule");
    add_config_options(run, ov);
    run->add_option("--out", out_flag, "directory for the trace file (or $MOONSHOT_SIM_OUT)");

    CLI::App* campaign = app.add_subcommand("campaign", "sweep a seed range, traceless");
    add_config_options(campaign, ov);
    campaign->add_option("--seeds", seeds, "seed range A..B (end exclusive), or a count N");
    campaign->add_option("--jobs", jobs, "worker threads");
    campaign->add_option("--liveness", liveness, "count seeds where every replica commits this many blocks");
    campaign->add_flag("--keep-going", keep_going, "do not stop at the first violation");
    campaign->add_option("--out", out_flag, "directory for the violating trace, if any");

    CLI::App* replay = app.add_subcommand("replay", "re-execute a trace and verify every line");
    replay->add_option("trace", trace_path, "trace file written by run or campaign")->required();

    CLI::App* explore_cmd =
        app.add_subcommand("explore", "bounded exhaustive search over schedules");
    add_config_options(explore_cmd, ov);
    explore_cmd->add_option("--depth", depth, "events per schedule after bootstrap");

    CLI::App* mutants = app.add_subcommand("mutants", "verify the monitor kills each mutation");
    add_config_options(mutants, ov);
    mutants->add_option("--seeds", mutant_seeds, "seeds per mutation");
    mutants->add_option("--jobs", jobs, "worker threads");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kExitUsage;
    }

    try {
        if (run->parsed()) return cmd_run(ov, out_flag);
        if (campaign->parsed())
            return cmd_campaign(ov, out_flag, seeds, jobs, liveness, keep_going);
        if (replay->parsed()) return cmd_replay(trace_path);
        if (explore_cmd->parsed()) return cmd_explore(ov, depth);
        if (mutants->parsed()) return cmd_mutants(ov, mutant_seeds, jobs);
    } catch (const TraceMismatch& e) {
        std::cerr << "replay mismatch: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
