#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "moonshot/adversary.hpp"
#include "moonshot/monitor.hpp"
#include "moonshot/rng.hpp"
#include "moonshot/types.hpp"
#include "moonshot/validator.hpp"

namespace moonshot {

struct SimError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SimConfig {
    uint32_t f = 1;
    std::vector<ValidatorId> byzantine;  // ids under adversary control, ascending
    uint64_t seed = 0;
    uint64_t max_steps = 1000;
    Rational drop{0, 1};
    Rational duplicate{0, 1};
    std::vector<std::string> adversaries{"passive"};
    std::vector<std::pair<uint64_t, Injection>> script;  // extra scripted injections
    enum class TimerPolicy { Random, IdleOnly } timer_policy = TimerPolicy::Random;
    uint32_t mutations = 0;

    uint32_t n() const { return 3 * f + 1; }
    uint32_t effective_quorum() const { return mutations & kWeakQuorum ? f + 1 : 2 * f + 1; }
    std::vector<bool> byz_mask() const;
    void validate() const;  // throws SimError on nonsense
};

struct PendingMsg {
    ValidatorId dst;
    std::shared_ptr<const Message> msg;
};

// The copyable heart of a simulation: validator replicas, the safety monitor,
// the adversary's knowledge, and undelivered messages. Event execution lives
// here. Scheduling does not: the random run loop, the trace replayer and the
// exhaustive explorer each drive these primitives their own way.
class SimCore {
  public:
    explicit SimCore(const SimConfig& cfg);

    // Each returns the first monitor violation, filling `sent` with what the
    // acting validator sent. The caller decides how sends reach `pending`.
    std::optional<Violation> exec_start(ValidatorId id, std::vector<Outgoing>& sent);
    std::optional<Violation> exec_deliver(ValidatorId dst, const Message& m,
                                          std::vector<Outgoing>& sent);
    std::optional<Violation> exec_timer(ValidatorId id, std::vector<Outgoing>& sent);
    // Boundary-checks the injection (SimError if the adversary oversteps),
    // then delivers it.
    std::optional<Violation> exec_inject(const Injection& inj, std::vector<Outgoing>& sent);

    // Queue a send for delivery. With an RNG, each honest edge independently
    // drops with cfg.drop and then, if kept, duplicates with cfg.duplicate
    // (edges in ascending recipient order). Without an RNG every honest edge
    // delivers exactly once.
    void fan_out(ValidatorId src, const Outgoing& o, SplitMix64* rng);

    const SimConfig& cfg() const { return cfg_; }
    bool is_honest(ValidatorId id) const { return id < byz_.size() && !byz_[id]; }
    const std::vector<ValidatorId>& honest_ids() const { return honest_ids_; }
    const Validator& validator(ValidatorId id) const { return *vals_[id]; }
    const Monitor& monitor() const { return monitor_; }
    const Observed& observed() const { return observed_; }
    std::vector<PendingMsg>& pending() { return pending_; }
    const std::vector<PendingMsg>& pending() const { return pending_; }

    void fingerprint(Fnv& h) const;  // validators + pending multiset + monitor + observed

  private:
    std::optional<Violation> drain_and_observe(ValidatorId id, std::vector<Outgoing>& sent);

    SimConfig cfg_;
    std::vector<bool> byz_;
    std::vector<ValidatorId> honest_ids_;
    std::vector<std::optional<Validator>> vals_;  // index = id; byz slots empty
    Monitor monitor_;
    Observed observed_;
    std::vector<PendingMsg> pending_;
};

struct RunReport {
    uint64_t steps = 0;  // steps executed (excluding bootstrap)
    std::optional<Violation> violation;
    uint64_t violation_step = 0;
    std::vector<std::pair<ValidatorId, uint64_t>> commits;  // honest id -> committed length
    size_t warning_count = 0;

    uint64_t min_commits() const;
    std::string render() const;  // canonical one-line summary
};

// Random-schedule run. If `trace` is given, writes the replayable trace to it.
RunReport run_simulation(const SimConfig& cfg, std::ostream* trace);

// Canonical trace renderings, shared by the run loop and the replayer so a
// replay can reproduce a trace byte for byte.
std::string render_config_line(const SimConfig& cfg);
std::string render_trace_event(uint64_t step, const std::string& event,
                               const std::vector<Outgoing>& sent);

}  // namespace moonshot
