#include "moonshot/sim.hpp"

#include <algorithm>
#include <ostream>

#include "moonshot/encoding.hpp"
#include "moonshot/hash.hpp"

namespace moonshot {

std::vector<bool> SimConfig::byz_mask() const {
    std::vector<bool> mask(n(), false);
    for (ValidatorId id : byzantine) {
        if (id < mask.size()) mask[id] = true;
    }
    return mask;
}

void SimConfig::validate() const {
    if (f > 20) throw SimError("f too large (max 20)");
    if (byzantine.size() > f)
        throw SimError("more byzantine validators than f=" + std::to_string(f) + " allows");
    std::set<ValidatorId> seen;
    for (ValidatorId id : byzantine) {
        if (id >= n()) throw SimError("byzantine id " + std::to_string(id) + " out of range");
        if (!seen.insert(id).second)
            throw SimError("duplicate byzantine id " + std::to_string(id));
    }
    if (drop.den == 0 || duplicate.den == 0) throw SimError("probability with zero denominator");
    if (drop.num > drop.den) throw SimError("drop_probability above 1");
    if (duplicate.num > duplicate.den) throw SimError("duplicate_probability above 1");
    if (max_steps == 0) throw SimError("max_steps must be positive");
    for (const std::string& name : adversaries) {
        if (make_strategy(name) == nullptr) throw SimError("unknown adversary: " + name);
    }
    for (const auto& [step, inj] : script) {
        if (inj.dst >= n() || byz_mask()[inj.dst])
            throw SimError("scripted injection targets invalid validator " +
                           std::to_string(inj.dst));
    }
}

SimCore::SimCore(const SimConfig& cfg)
    : cfg_(cfg),
      byz_(cfg.byz_mask()),
      monitor_(cfg.f, cfg.effective_quorum(), cfg.byz_mask()),
      observed_(cfg.f, cfg.effective_quorum(), cfg.byz_mask()) {
    vals_.resize(cfg_.n());
    for (ValidatorId id = 0; id < cfg_.n(); ++id) {
        if (byz_[id]) continue;
        honest_ids_.push_back(id);
        vals_[id].emplace(ValidatorConfig{id, cfg_.f, cfg_.mutations});
    }
}

std::optional<Violation> SimCore::drain_and_observe(ValidatorId id, std::vector<Outgoing>& sent) {
    Validator& v = *vals_[id];
    std::vector<Outgoing> out = v.drain_outbox();
    for (Outgoing& o : out) sent.push_back(std::move(o));
    for (const Outgoing& o : sent) {
        if (auto viol = monitor_.observe_message(id, true, o.msg)) return viol;
        observed_.add(id, o.msg);
    }
    return monitor_.observe_state(v);
}

std::optional<Violation> SimCore::exec_start(ValidatorId id, std::vector<Outgoing>& sent) {
    if (!is_honest(id)) throw SimError("start on byzantine validator");
    vals_[id]->start();
    return drain_and_observe(id, sent);
}

std::optional<Violation> SimCore::exec_deliver(ValidatorId dst, const Message& m,
                                               std::vector<Outgoing>& sent) {
    if (!is_honest(dst)) throw SimError("delivery to byzantine validator");
    vals_[dst]->handle_message(m);
    return drain_and_observe(dst, sent);
}

std::optional<Violation> SimCore::exec_timer(ValidatorId id, std::vector<Outgoing>& sent) {
    if (!is_honest(id)) throw SimError("timer on byzantine validator");
    vals_[id]->on_timer();
    return drain_and_observe(id, sent);
}

std::optional<Violation> SimCore::exec_inject(const Injection& inj, std::vector<Outgoing>& sent) {
    if (!is_honest(inj.dst)) throw SimError("injection to byzantine validator");
    if (!observed_.injection_legal(inj.msg))
        throw SimError("adversary injected unauthorized message: " + encode(inj.msg));
    observed_.add_injected(inj.msg);
    if (auto viol = monitor_.observe_message(message_src(inj.msg), false, inj.msg)) return viol;
    vals_[inj.dst]->handle_message(inj.msg);
    return drain_and_observe(inj.dst, sent);
}

void SimCore::fan_out(ValidatorId src, const Outgoing& o, SplitMix64* rng) {
    (void)src;
    auto shared = std::make_shared<const Message>(o.msg);
    auto edge = [&](ValidatorId dst) {
        if (!is_honest(dst)) return;  // adversary already sees every send
        if (rng != nullptr) {
            if (chance(*rng, cfg_.drop)) return;
            pending_.push_back({dst, shared});
            if (chance(*rng, cfg_.duplicate)) pending_.push_back({dst, shared});
        } else {
            pending_.push_back({dst, shared});
        }
    };
    if (o.dst) {
        edge(*o.dst);
    } else {
        for (ValidatorId dst = 0; dst < cfg_.n(); ++dst) edge(dst);
    }
}

void SimCore::fingerprint(Fnv& h) const {
    for (ValidatorId id : honest_ids_) {
        h.u64(id);
        fingerprint_state(h, vals_[id]->state());
    }
    // Pending messages as a multiset: wrapping sums of per-entry digests are
    // order-independent but still distinguish duplicated entries.
    uint64_t acc_a = 0, acc_b = 0;
    for (const PendingMsg& p : pending_) {
        Fnv e;
        e.u64(p.dst);
        hash_message(e, *p.msg);
        auto [ea, eb] = e.pair();
        acc_a += ea;
        acc_b += eb;
    }
    h.u64(pending_.size());
    h.u64(acc_a);
    h.u64(acc_b);
    monitor_.fingerprint(h);
    observed_.fingerprint(h);
}

uint64_t RunReport::min_commits() const {
    uint64_t m = ~uint64_t{0};
    for (const auto& [id, c] : commits) m = std::min(m, c);
    return commits.empty() ? 0 : m;
}

std::string RunReport::render() const {
    std::string s = "steps=" + std::to_string(steps) + " commits=";
    for (size_t i = 0; i < commits.size(); ++i) {
        if (i > 0) s += ",";
        s += std::to_string(commits[i].first) + ":" + std::to_string(commits[i].second);
    }
    s += " warnings=" + std::to_string(warning_count);
    if (violation) {
        s += " result=violation kind=" + violation->kind +
             " step=" + std::to_string(violation_step) + " detail=" + violation->detail;
    } else {
        s += " result=safe";
    }
    return s;
}

std::string render_config_line(const SimConfig& cfg) {
    std::string s = "config f=" + std::to_string(cfg.f) + " seed=" + std::to_string(cfg.seed) +
                    " max_steps=" + std::to_string(cfg.max_steps);
    s += " drop_probability=" + std::to_string(cfg.drop.num) + "/" + std::to_string(cfg.drop.den);
    s += " duplicate_probability=" + std::to_string(cfg.duplicate.num) + "/" +
         std::to_string(cfg.duplicate.den);
    s += " byzantine=[";
    for (size_t i = 0; i < cfg.byzantine.size(); ++i)
        s += (i ? "," : "") + std::to_string(cfg.byzantine[i]);
    s += "] adversary_strategy=";
    for (size_t i = 0; i < cfg.adversaries.size(); ++i) s += (i ? "," : "") + cfg.adversaries[i];
    s += " timer_policy=";
    s += cfg.timer_policy == SimConfig::TimerPolicy::Random ? "random" : "idle_only";
    s += " mutations=[";
    bool first = true;
    for (Mutation m : kAllMutations) {
        if (cfg.mutations & m) {
            if (!first) s += ",";
            s += mutation_name(m);
            first = false;
        }
    }
    s += "]";
    return s;
}

std::string render_trace_event(uint64_t step, const std::string& event,
                               const std::vector<Outgoing>& sent) {
    std::string s = "step=" + std::to_string(step) + " | event=" + event + " | outbox=[";
    for (size_t i = 0; i < sent.size(); ++i) {
        if (i > 0) s += ",";
        encode_to(s, sent[i].msg);
    }
    s += "]";
    return s;
}

namespace {

void trace_line(std::ostream* trace, uint64_t step, const std::string& event,
                const std::vector<Outgoing>& sent) {
    if (trace == nullptr) return;
    *trace << render_trace_event(step, event, sent) << "\n";
}

}  // namespace

RunReport run_simulation(const SimConfig& cfg, std::ostream* trace) {
    cfg.validate();
    SimCore core(cfg);
    SplitMix64 rng(cfg.seed);

    std::vector<std::unique_ptr<Strategy>> strategies;
    for (const std::string& name : cfg.adversaries) strategies.push_back(make_strategy(name));
    if (!cfg.script.empty()) strategies.push_back(std::make_unique<ScriptedStrategy>(cfg.script));

    if (trace != nullptr) {
        *trace << "# moonshot-sim trace v1\n";
        *trace << render_config_line(cfg) << "\n";
    }

    RunReport report;
    std::optional<Violation> viol;
    uint64_t step = 0;

    auto finish = [&]() {
        report.steps = step;
        if (viol) {
            report.violation = viol;
            report.violation_step = step;
        }
        for (ValidatorId id : core.honest_ids())
            report.commits.emplace_back(id, core.validator(id).state().committed.size());
        report.warning_count = core.monitor().warnings().size();
        if (trace != nullptr) {
            if (viol)
                *trace << "VIOLATION kind=" << viol->kind << " step=" << step
                       << " detail=" << viol->detail << "\n";
            *trace << "report " << report.render() << "\n";
        }
        return report;
    };

    for (ValidatorId id : core.honest_ids()) {
        std::vector<Outgoing> sent;
        viol = core.exec_start(id, sent);
        trace_line(trace, 0, "start(dst=" + std::to_string(id) + ")", sent);
        if (viol) return finish();
        for (const Outgoing& o : sent) core.fan_out(id, o, &rng);
    }

    std::vector<Injection> queue;
    size_t qhead = 0;
    uint64_t idle_rr = 0;

    for (step = 1; step <= cfg.max_steps; ++step) {
        for (auto& s : strategies) s->react(core.observed(), step, queue);

        std::vector<Outgoing> sent;
        ValidatorId actor;
        std::string event;
        if (qhead < queue.size()) {
            Injection inj = std::move(queue[qhead++]);
            actor = inj.dst;
            viol = core.exec_inject(inj, sent);
            if (trace != nullptr)
                event = "inject(dst=" + std::to_string(inj.dst) + ",msg=" + encode(inj.msg) + ")";
        } else {
            auto& pending = core.pending();
            // Random policy: one timer slot against the whole pending pool, so
            // timer pressure rises exactly when traffic dries up. IdleOnly:
            // timers only on an empty pool, round-robin, burning no RNG draws.
            size_t slot;
            if (cfg.timer_policy == SimConfig::TimerPolicy::IdleOnly) {
                slot = pending.empty() ? 0 : rng.uniform(pending.size());
            } else {
                slot = rng.uniform(pending.size() + 1);
            }
            if (slot == pending.size()) {
                if (cfg.timer_policy == SimConfig::TimerPolicy::IdleOnly) {
                    actor = core.honest_ids()[idle_rr++ % core.honest_ids().size()];
                } else {
                    actor = core.honest_ids()[rng.uniform(core.honest_ids().size())];
                }
                viol = core.exec_timer(actor, sent);
                event = "timer(dst=" + std::to_string(actor) + ")";
            } else {
                PendingMsg pm = std::move(pending[slot]);
                pending[slot] = std::move(pending.back());
                pending.pop_back();
                actor = pm.dst;
                viol = core.exec_deliver(pm.dst, *pm.msg, sent);
                if (trace != nullptr)
                    event = "deliver(dst=" + std::to_string(pm.dst) +
                            ",msg=" + encode(*pm.msg) + ")";
            }
        }
        trace_line(trace, step, event, sent);
        if (viol) return finish();
        for (const Outgoing& o : sent) core.fan_out(actor, o, &rng);
    }
    step = cfg.max_steps;
    return finish();
}

}  // namespace moonshot
