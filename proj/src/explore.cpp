#include "moonshot/explore.hpp"

#include <set>
#include <unordered_map>

#include "moonshot/encoding.hpp"
#include "moonshot/hash.hpp"

namespace moonshot {

namespace {

using StateFp = std::pair<uint64_t, uint64_t>;

struct StateFpHash {
    size_t operator()(const StateFp& fp) const noexcept {
        return static_cast<size_t>(fp.first ^ (fp.second * 0x9e3779b97f4a7c15ULL));
    }
};

StateFp state_fp(const SimCore& core) {
    Fnv h;
    core.fingerprint(h);
    return h.pair();
}

struct Dfs {
    const ExploreConfig& cfg;
    ExploreReport& report;
    // State -> the largest remaining depth it has been explored with. A
    // revisit with no more depth left than before cannot reach anything new.
    std::unordered_map<StateFp, uint32_t, StateFpHash> best;

    // True aborts the search: a violation was found and report.path holds the
    // events from this state's successor down to it.
    bool walk(const SimCore& core, uint32_t remaining) {
        auto [it, fresh] = best.emplace(state_fp(core), remaining);
        if (!fresh) {
            if (it->second >= remaining) return false;
            it->second = remaining;
        }
        if (remaining == 0) return false;

        // Deliveries: one edge per distinct (recipient, message).
        std::set<std::pair<ValidatorId, StateFp>> tried;
        const auto& pending = core.pending();
        for (size_t i = 0; i < pending.size(); ++i) {
            auto fp = message_fingerprint(*pending[i].msg);
            if (!tried.emplace(pending[i].dst, fp).second) continue;
            SimCore next = core;
            auto& np = next.pending();
            PendingMsg pm = std::move(np[i]);
            np[i] = std::move(np.back());
            np.pop_back();
            std::vector<Outgoing> sent;
            auto viol = next.exec_deliver(pm.dst, *pm.msg, sent);
            std::string ev =
                "deliver(dst=" + std::to_string(pm.dst) + ",msg=" + encode(*pm.msg) + ")";
            if (step(next, pm.dst, std::move(sent), viol, ev, remaining)) return true;
        }

        // Injections: every vocabulary entry the adversary could legally send.
        for (const Injection& inj : cfg.vocabulary) {
            if (!core.is_honest(inj.dst)) continue;
            if (!core.observed().injection_legal(inj.msg)) continue;
            SimCore next = core;
            std::vector<Outgoing> sent;
            auto viol = next.exec_inject(inj, sent);
            std::string ev =
                "inject(dst=" + std::to_string(inj.dst) + ",msg=" + encode(inj.msg) + ")";
            if (step(next, inj.dst, std::move(sent), viol, ev, remaining)) return true;
        }

        // Timers, skipping ones that would change nothing.
        for (ValidatorId id : core.honest_ids()) {
            const auto& st = core.validator(id).state();
            if (st.t_r && st.t_l && *st.t_l >= st.r_c) continue;
            SimCore next = core;
            std::vector<Outgoing> sent;
            auto viol = next.exec_timer(id, sent);
            std::string ev = "timer(dst=" + std::to_string(id) + ")";
            if (step(next, id, std::move(sent), viol, ev, remaining)) return true;
        }
        return false;
    }

    bool step(SimCore& next, ValidatorId actor, std::vector<Outgoing> sent,
              const std::optional<Violation>& viol, const std::string& ev, uint32_t remaining) {
        ++report.edges;
        if (viol) {
            report.violation = viol;
            report.path.insert(report.path.begin(), ev);
            return true;
        }
        for (const Outgoing& o : sent) next.fan_out(actor, o, nullptr);
        if (walk(next, remaining - 1)) {
            report.path.insert(report.path.begin(), ev);
            return true;
        }
        return false;
    }
};

}  // namespace

ExploreReport explore(const ExploreConfig& cfg) {
    cfg.sim.validate();
    for (const Injection& inj : cfg.vocabulary) {
        if (inj.dst >= cfg.sim.n())
            throw SimError("vocabulary injection targets validator " + std::to_string(inj.dst) +
                           " outside the system");
    }

    ExploreReport report;
    SimCore root(cfg.sim);
    for (ValidatorId id : root.honest_ids()) {
        std::vector<Outgoing> sent;
        if (auto viol = root.exec_start(id, sent)) {
            report.violation = viol;
            report.path.push_back("start(dst=" + std::to_string(id) + ")");
            return report;
        }
        for (const Outgoing& o : sent) root.fan_out(id, o, nullptr);
    }

    Dfs dfs{cfg, report, {}};
    bool found = dfs.walk(root, cfg.depth);
    report.states = dfs.best.size();
    report.complete = !found;
    return report;
}

std::string ExploreReport::render() const {
    std::string s = "states=" + std::to_string(states) + " edges=" + std::to_string(edges);
    if (violation) {
        s += " result=violation kind=" + violation->kind + " detail=" + violation->detail;
    } else {
        s += complete ? " result=safe" : " result=incomplete";
    }
    return s;
}

}  // namespace moonshot
