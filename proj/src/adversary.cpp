#include "moonshot/adversary.hpp"

#include <algorithm>

#include "moonshot/hash.hpp"

namespace moonshot {

Observed::Observed(uint32_t f, uint32_t effective_quorum, std::vector<bool> byzantine)
    : f_(f), n_(3 * f + 1), quorum_(effective_quorum), byz_(std::move(byzantine)) {
    byz_.resize(n_, false);
    for (ValidatorId v = 0; v < n_; ++v) (byz_[v] ? byz_ids_ : honest_ids_).push_back(v);
    blocks_.emplace(kGenesisId, genesis_block());  // common knowledge, never proposed
}

void Observed::note_cert(const QuorumCert& qc) {
    if (cert_at_.emplace(qc.view, qc).second) cert_log_.push_back(qc);
}

void Observed::note_block(const Block& b) {
    if (blocks_.emplace(b.id, b).second) proposal_log_.push_back(b);
}

void Observed::add(ValidatorId src, const Message& m) {
    (void)src;
    sent_fps_.insert(message_fingerprint(m));
    if (const auto* p = std::get_if<NormalProposal>(&m)) {
        note_block(p->block);
        note_cert(p->qc);
    } else if (const auto* p = std::get_if<FallbackProposal>(&m)) {
        note_block(p->block);
        note_cert(p->qc);
        for (const Timeout& t : p->tc.timeouts) note_cert(t.high_qc);
    } else if (const auto* p = std::get_if<OptimisticProposal>(&m)) {
        note_block(p->block);
    } else if (const auto* p = std::get_if<MsgVote>(&m)) {
        const Vote& v = p->vote;
        if (votes_[std::make_tuple(v.view, static_cast<uint8_t>(v.kind), v.block)]
                .insert(v.author)
                .second)
            vote_log_.push_back(v);
    } else if (const auto* p = std::get_if<MsgTimeout>(&m)) {
        const Timeout& t = p->timeout;
        if (timeouts_[t.view].emplace(t.author, t).second) timeout_log_.push_back(t);
        note_cert(t.high_qc);
    } else if (const auto* p = std::get_if<MsgQc>(&m)) {
        note_cert(p->qc);
    } else if (const auto* p = std::get_if<MsgTc>(&m)) {
        for (const Timeout& t : p->tc.timeouts) note_cert(t.high_qc);
    } else if (const auto* p = std::get_if<MsgWeakTc>(&m)) {
        for (const Timeout& t : p->wtc.timeouts) note_cert(t.high_qc);
    }
}

void Observed::add_injected(const Message& m) {
    // Only bodies and certificates: injected votes/timeouts are byzantine
    // material and must never count as honest backing.
    if (const auto* p = std::get_if<NormalProposal>(&m)) {
        note_block(p->block);
        note_cert(p->qc);
    } else if (const auto* p = std::get_if<FallbackProposal>(&m)) {
        note_block(p->block);
        note_cert(p->qc);
    } else if (const auto* p = std::get_if<OptimisticProposal>(&m)) {
        note_block(p->block);
    } else if (const auto* p = std::get_if<MsgQc>(&m)) {
        note_cert(p->qc);
    }
}

const QuorumCert* Observed::cert_at(View view) const {
    auto it = cert_at_.find(view);
    return it == cert_at_.end() ? nullptr : &it->second;
}

const Block* Observed::body(BlockId id) const {
    auto it = blocks_.find(id);
    return it == blocks_.end() ? nullptr : &it->second;
}

bool Observed::vote_backed(const Vote& v) const {
    if (!honest(v.author)) return true;
    auto it = votes_.find(std::make_tuple(v.view, static_cast<uint8_t>(v.kind), v.block));
    return it != votes_.end() && it->second.count(v.author) != 0;
}

bool Observed::timeout_backed(const Timeout& t) const {
    if (!honest(t.author)) return cert_backed(t.high_qc);
    auto it = timeouts_.find(t.view);
    if (it == timeouts_.end()) return false;
    auto a = it->second.find(t.author);
    return a != it->second.end() && a->second == t;
}

bool Observed::cert_backed(const QuorumCert& qc) const {
    if (qc.view == 0 && qc.block == kGenesisId) return true;  // common knowledge
    for (ValidatorId s : qc.signers) {
        if (!honest(s)) continue;
        if (!vote_backed(Vote{qc.kind, qc.block, qc.view, s})) return false;
    }
    return true;
}

void Observed::fingerprint(Fnv& h) const {
    h.u64(votes_.size());
    for (const auto& [key, authors] : votes_) {
        h.u64(std::get<0>(key));
        h.u64(std::get<1>(key));
        h.u64(std::get<2>(key));
        h.u64(authors.size());
        for (ValidatorId a : authors) h.u64(a);
    }
    h.u64(timeouts_.size());
    for (const auto& [view, per_author] : timeouts_) {
        h.u64(view);
        h.u64(per_author.size());
        for (const auto& [author, t] : per_author) hash_timeout(h, t);
    }
    h.u64(sent_fps_.size());
    for (const auto& [a, b] : sent_fps_) {
        h.u64(a);
        h.u64(b);
    }
}

bool Observed::injection_legal(const Message& m) const {
    ValidatorId src = message_src(m);
    if (honest(src)) return sent_fps_.count(message_fingerprint(m)) != 0;  // replay only
    if (const auto* p = std::get_if<NormalProposal>(&m)) return cert_backed(p->qc);
    if (const auto* p = std::get_if<FallbackProposal>(&m)) {
        if (!cert_backed(p->qc)) return false;
        for (const Timeout& t : p->tc.timeouts)
            if (!timeout_backed(t)) return false;
        return true;
    }
    if (std::holds_alternative<OptimisticProposal>(m)) return true;
    if (const auto* p = std::get_if<MsgVote>(&m)) return vote_backed(p->vote);
    if (const auto* p = std::get_if<MsgTimeout>(&m)) return timeout_backed(p->timeout);
    if (const auto* p = std::get_if<MsgQc>(&m)) return cert_backed(p->qc);
    if (const auto* p = std::get_if<MsgTc>(&m)) {
        for (const Timeout& t : p->tc.timeouts)
            if (!timeout_backed(t)) return false;
        return true;
    }
    if (const auto* p = std::get_if<MsgWeakTc>(&m)) {
        for (const Timeout& t : p->wtc.timeouts)
            if (!timeout_backed(t)) return false;
        return true;
    }
    return false;
}

std::optional<QuorumCert> Observed::try_build_qc(View view, VoteKind kind, BlockId block) const {
    std::vector<ValidatorId> signers = byz_ids_;
    auto it = votes_.find(std::make_tuple(view, static_cast<uint8_t>(kind), block));
    if (it != votes_.end())
        for (ValidatorId v : it->second)
            if (honest(v)) signers.push_back(v);
    if (signers.size() < quorum_) return std::nullopt;
    std::sort(signers.begin(), signers.end());
    signers.resize(quorum_);
    return QuorumCert{view, block, kind, std::move(signers)};
}

std::optional<TimeoutCert> Observed::try_build_tc(View view, const QuorumCert& byz_lock) const {
    uint32_t need = 2 * f_ + 1;
    std::vector<Timeout> members;
    for (ValidatorId b : byz_ids_) members.push_back(Timeout{view, b, byz_lock});
    auto it = timeouts_.find(view);
    if (it != timeouts_.end())
        for (const auto& [author, t] : it->second)
            if (honest(author)) members.push_back(t);
    if (members.size() < need) return std::nullopt;
    std::sort(members.begin(), members.end(),
              [](const Timeout& a, const Timeout& b) { return a.author < b.author; });
    members.resize(need);
    return TimeoutCert{view, std::move(members)};
}

// ---------------------------------------------------------------------------
// Strategies

namespace {

class Passive : public Strategy {
  public:
    void react(const Observed&, uint64_t, std::vector<Injection>&) override {}
};

// Owns every byzantine-led view. The moment the certificate for the previous
// view becomes assemblable from observed votes, it synchronizes the honest
// validators into its view with that certificate, dangles an optimistic
// proposal in front of them — extending the certified block on even rounds
// (baiting a conflicting normal vote right after), the genesis block on odd
// rounds (baiting a vote below the committed chain) — and then equivocates
// two normal proposals across the two halves of the honest validators,
// voting for everything with every byzantine identity. Timed-out views get
// the same treatment through two conflicting fallback proposals.
class Equivocator : public Strategy {
  public:
    void react(const Observed& obs, uint64_t, std::vector<Injection>& out) override {
        while (vote_cursor_ < obs.vote_log().size()) {
            const Vote& v = obs.vote_log()[vote_cursor_++];
            if (auto qc = obs.try_build_qc(v.view, v.kind, v.block))
                attack_normal(obs, *qc, out);
        }
        while (cert_cursor_ < obs.cert_log().size())
            attack_normal(obs, obs.cert_log()[cert_cursor_++], out);
        while (timeout_cursor_ < obs.timeout_log().size())
            attack_fallback(obs, obs.timeout_log()[timeout_cursor_++].view, out);
    }

  private:
    void split_send(const Observed& obs, const Message& a, const Message& b,
                    std::vector<Injection>& out) {
        const auto& hs = obs.honest_ids();
        for (size_t i = 0; i < hs.size(); ++i) out.push_back({hs[i], i < (hs.size() + 1) / 2 ? a : b});
    }

    void send_all(const Observed& obs, const Message& m, std::vector<Injection>& out) {
        for (ValidatorId h : obs.honest_ids()) out.push_back({h, m});
    }

    void byz_votes(const Observed& obs, VoteKind kind, View view, BlockId block,
                   std::vector<Injection>& out) {
        for (ValidatorId z : obs.byz_ids()) {
            MsgVote mv{z, Vote{kind, block, view, z}};
            send_all(obs, mv, out);
        }
    }

    void attack_normal(const Observed& obs, const QuorumCert& qc, std::vector<Injection>& out) {
        View v = qc.view + 1;
        ValidatorId ldr = leader(v, obs.n());
        if (obs.honest(ldr)) return;
        if (!normal_done_.insert(v).second) return;
        const Block* parent = obs.body(qc.block);
        if (parent == nullptr) return;  // quorum over an unseen body cannot happen

        // Pull everyone into view v now, while their timers for v-1 are still
        // quiet; the optimistic bait below only works on validators that
        // neither timed out of v-1 nor voted in v yet.
        send_all(obs, MsgQc{obs.byz_ids().front(), qc}, out);
        Block opt = (v / obs.n()) % 2 == 0
                        ? make_block(parent->height + 1, v, parent->id,
                                     "z" + std::to_string(v) + ".o")
                        : make_block(1, v, kGenesisId, "z" + std::to_string(v) + ".og");
        send_all(obs, OptimisticProposal{ldr, v, opt}, out);
        byz_votes(obs, VoteKind::Optimistic, v, opt.id, out);

        Block a = make_block(parent->height + 1, v, parent->id, "z" + std::to_string(v) + ".a");
        Block b = make_block(parent->height + 1, v, parent->id, "z" + std::to_string(v) + ".b");
        split_send(obs, NormalProposal{ldr, v, a, qc}, NormalProposal{ldr, v, b, qc}, out);
        byz_votes(obs, VoteKind::Normal, v, a.id, out);
        byz_votes(obs, VoteKind::Normal, v, b.id, out);
    }

    void attack_fallback(const Observed& obs, View timed_out, std::vector<Injection>& out) {
        View v = timed_out + 1;
        ValidatorId ldr = leader(v, obs.n());
        if (obs.honest(ldr)) return;
        if (fallback_done_.count(v)) return;
        // Byzantine timeouts claim the stalest certificate available so the
        // fallback branch forks as low as possible.
        const QuorumCert* stale = nullptr;
        for (const auto& qc : obs.cert_log())
            if (qc.view < timed_out && (stale == nullptr || qc.view < stale->view)) stale = &qc;
        if (stale == nullptr) return;
        auto tc = obs.try_build_tc(timed_out, *stale);
        if (!tc) return;
        fallback_done_.insert(v);
        const QuorumCert& hq = tc_high_qc(*tc);
        const Block* parent = obs.body(hq.block);
        if (parent == nullptr) return;
        Block a = make_block(parent->height + 1, v, parent->id, "z" + std::to_string(v) + ".fa");
        Block b = make_block(parent->height + 1, v, parent->id, "z" + std::to_string(v) + ".fb");
        split_send(obs, FallbackProposal{ldr, v, a, hq, *tc}, FallbackProposal{ldr, v, b, hq, *tc},
                   out);
        byz_votes(obs, VoteKind::Fallback, v, a.id, out);
        byz_votes(obs, VoteKind::Fallback, v, b.id, out);
    }

    size_t vote_cursor_ = 0, cert_cursor_ = 0, timeout_cursor_ = 0;
    std::set<View> normal_done_, fallback_done_;
};

// Votes for every proposed block under every kind with every byzantine
// identity, spreads stale-lock timeouts, and hands out home-made timeout
// certificates to half the validators to drag them across view changes.
class VoteSplitter : public Strategy {
  public:
    void react(const Observed& obs, uint64_t, std::vector<Injection>& out) override {
        while (prop_cursor_ < obs.proposal_log().size()) {
            const Block& b = obs.proposal_log()[prop_cursor_++];
            for (VoteKind k : {VoteKind::Normal, VoteKind::Optimistic, VoteKind::Fallback})
                for (ValidatorId z : obs.byz_ids()) {
                    MsgVote mv{z, Vote{k, b.id, b.view, z}};
                    for (ValidatorId h : obs.honest_ids()) out.push_back({h, mv});
                }
            if (timed_views_.insert(b.view).second) {
                const QuorumCert* stale = stale_cert(obs, b.view);
                for (ValidatorId z : obs.byz_ids()) {
                    MsgTimeout mt{z, Timeout{b.view, z, *stale}};
                    for (ValidatorId h : obs.honest_ids()) out.push_back({h, mt});
                }
            }
        }
        while (timeout_cursor_ < obs.timeout_log().size()) {
            View v = obs.timeout_log()[timeout_cursor_++].view;
            if (tc_done_.count(v)) continue;
            auto tc = obs.try_build_tc(v, *stale_cert(obs, v));
            if (!tc) continue;
            tc_done_.insert(v);
            const auto& hs = obs.honest_ids();
            for (size_t i = 0; i < (hs.size() + 1) / 2; ++i)
                out.push_back({hs[i], MsgTc{obs.byz_ids().front(), *tc}});
        }
    }

  private:
    const QuorumCert* stale_cert(const Observed& obs, View view) {
        const QuorumCert* best = nullptr;
        for (const auto& qc : obs.cert_log()) {
            if (view >= 2 && qc.view > view - 2) continue;
            if (best == nullptr || qc.view < best->view) best = &qc;
        }
        if (best != nullptr) return best;
        genesis_ = genesis_qc(obs.n());
        return &genesis_;
    }

    size_t prop_cursor_ = 0, timeout_cursor_ = 0;
    std::set<View> timed_views_, tc_done_;
    QuorumCert genesis_;
};

// Unstructured noise: replays observed honest messages to arbitrary honest
// validators and throws legal byzantine votes and timeouts around, choosing
// targets from a private generator. Deterministic for a fixed schedule: the
// generator is consumed in lockstep with the observation stream.
class RandomNoise : public Strategy {
  public:
    void react(const Observed& obs, uint64_t, std::vector<Injection>& out) override {
        while (prop_cursor_ < obs.proposal_log().size()) {
            const Block& b = obs.proposal_log()[prop_cursor_++];
            if (rng_.uniform(4) == 0) {  // one byz identity, one random kind
                ValidatorId z = obs.byz_ids()[rng_.uniform(obs.byz_ids().size())];
                auto kind = static_cast<VoteKind>(rng_.uniform(3));
                out.push_back({pick_honest(obs), MsgVote{z, Vote{kind, b.id, b.view, z}}});
            }
        }
        while (vote_cursor_ < obs.vote_log().size()) {
            const Vote& v = obs.vote_log()[vote_cursor_++];
            if (rng_.uniform(4) == 0)  // replay the honest vote somewhere else
                out.push_back({pick_honest(obs), MsgVote{v.author, v}});
        }
        while (timeout_cursor_ < obs.timeout_log().size()) {
            const Timeout& t = obs.timeout_log()[timeout_cursor_++];
            switch (rng_.uniform(4)) {
                case 0:  // replay it
                    out.push_back({pick_honest(obs), MsgTimeout{t.author, t}});
                    break;
                case 1: {  // byz timeout for the same view, lock of its choosing
                    ValidatorId z = obs.byz_ids()[rng_.uniform(obs.byz_ids().size())];
                    const QuorumCert& lock = pick_cert(obs);
                    out.push_back({pick_honest(obs), MsgTimeout{z, Timeout{t.view, z, lock}}});
                    break;
                }
                default:
                    break;
            }
        }
        while (cert_cursor_ < obs.cert_log().size()) {
            const QuorumCert& qc = obs.cert_log()[cert_cursor_++];
            if (rng_.uniform(4) == 0)
                out.push_back({pick_honest(obs), MsgQc{obs.byz_ids().front(), qc}});
        }
    }

  private:
    ValidatorId pick_honest(const Observed& obs) {
        return obs.honest_ids()[rng_.uniform(obs.honest_ids().size())];
    }

    const QuorumCert& pick_cert(const Observed& obs) {
        if (obs.cert_log().empty() || rng_.uniform(3) == 0) {
            genesis_ = genesis_qc(obs.n());
            return genesis_;
        }
        return obs.cert_log()[rng_.uniform(obs.cert_log().size())];
    }

    SplitMix64 rng_{0xbad5eed0bad5eed0ULL};
    size_t prop_cursor_ = 0, vote_cursor_ = 0, timeout_cursor_ = 0, cert_cursor_ = 0;
    QuorumCert genesis_;
};

}  // namespace

std::unique_ptr<Strategy> make_strategy(const std::string& name) {
    if (name == "passive") return std::make_unique<Passive>();
    if (name == "random") return std::make_unique<RandomNoise>();
    if (name == "equivocator") return std::make_unique<Equivocator>();
    if (name == "votesplitter") return std::make_unique<VoteSplitter>();
    return nullptr;
}

ScriptedStrategy::ScriptedStrategy(std::vector<std::pair<uint64_t, Injection>> plan)
    : plan_(std::move(plan)) {
    std::stable_sort(plan_.begin(), plan_.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
}

void ScriptedStrategy::react(const Observed&, uint64_t step, std::vector<Injection>& out) {
    while (next_ < plan_.size() && plan_[next_].first <= step) out.push_back(plan_[next_++].second);
}

}  // namespace moonshot
