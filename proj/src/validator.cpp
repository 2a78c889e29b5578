#include "moonshot/validator.hpp"

#include <algorithm>

#include "moonshot/hash.hpp"

namespace moonshot {

const Mutation kAllMutations[6] = {
    kWeakQuorum,   kNoLockCheck,         kMixedQcKinds,
    kNoEquivocationGuard, kNoTimeoutGuard, kNonAdjacentCommit,
};

const char* mutation_name(Mutation m) {
    switch (m) {
        case kWeakQuorum: return "weak_quorum";
        case kNoLockCheck: return "no_lock_check";
        case kMixedQcKinds: return "mixed_qc_kinds";
        case kNoEquivocationGuard: return "no_equivocation_guard";
        case kNoTimeoutGuard: return "no_timeout_guard";
        case kNonAdjacentCommit: return "non_adjacent_commit";
    }
    return "?";
}

std::optional<Mutation> mutation_from_name(const std::string& name) {
    for (Mutation m : kAllMutations)
        if (name == mutation_name(m)) return m;
    return std::nullopt;
}

Validator::Validator(ValidatorConfig cfg) : cfg_(cfg) {
    st_.lock = genesis_qc(cfg_.n());
    st_.tree.record_certified(st_.lock);
    record_cert(st_.lock);
}

uint32_t Validator::quorum() const {
    return mut(kWeakQuorum) ? cfg_.f + 1 : 2 * cfg_.f + 1;
}

void Validator::start() {
    if (leader(1, cfg_.n()) == cfg_.id) propose_normal(st_.lock);
}

void Validator::multicast(Message m) { outbox_.push_back({std::move(m), std::nullopt}); }

void Validator::unicast(Message m, ValidatorId dst) { outbox_.push_back({std::move(m), dst}); }

std::vector<Outgoing> Validator::drain_outbox() {
    std::vector<Outgoing> out;
    out.swap(outbox_);
    return out;
}

std::string Validator::fresh_payload() {
    return std::to_string(cfg_.id) + ":" + std::to_string(st_.payload_counter++);
}

bool Validator::block_intact(const Block& b) const {
    if (b.id == kGenesisId) return false;  // nobody re-proposes genesis
    return block_id(b.height, b.view, b.parent, b.payload) == b.id;
}

void Validator::record_cert(const QuorumCert& qc) {
    auto key = std::make_tuple(qc.view, static_cast<uint8_t>(qc.kind), qc.block);
    if (certs_seen_.insert(key).second) st_.cert_log.push_back(qc);
}

// ---------------------------------------------------------------------------
// Certificate handling, view advancement, commits

void Validator::qc_processing(const QuorumCert& qc) {
    if (!validate_qc(qc, cfg_.n(), quorum())) return;
    record_cert(qc);
    if (qc.view > st_.lock.view) st_.lock = qc;
    st_.tree.record_certified(qc);
    commit_sweep();
    if (qc.view >= st_.r_c) advance_view(qc.view + 1, &qc, nullptr);
}

void Validator::tc_processing(const TimeoutCert& tc) {
    if (!validate_tc(tc, cfg_.n(), quorum())) return;
    qc_processing(tc_high_qc(tc));
    timeout_sync(tc.view);
    if (tc.view >= st_.r_c) advance_view(tc.view + 1, nullptr, &tc);
}

void Validator::advance_view(View to, const QuorumCert* qc, const TimeoutCert* tc) {
    if (to <= st_.r_c) return;
    st_.r_c = to;
    st_.t_r = false;
    st_.b_o.reset();
    if (qc != nullptr) {
        multicast(MsgQc{cfg_.id, *qc});
    } else if (tc != nullptr && leader(to, cfg_.n()) != cfg_.id) {
        unicast(MsgTc{cfg_.id, *tc}, leader(to, cfg_.n()));
    }
    if (leader(to, cfg_.n()) == cfg_.id) {
        if (qc != nullptr)
            propose_normal(*qc);
        else if (tc != nullptr)
            propose_fallback(*tc);
    }
}

void Validator::timeout_sync(View view) {
    if (view < st_.r_c) return;
    if (st_.t_l < view) {
        multicast(MsgTimeout{cfg_.id, Timeout{view, cfg_.id, st_.lock}});
        st_.t_l = view;
    }
}

void Validator::on_timer() {
    st_.t_r = true;
    if (st_.t_l < st_.r_c) {
        multicast(MsgTimeout{cfg_.id, Timeout{st_.r_c, cfg_.id, st_.lock}});
        st_.t_l = st_.r_c;
    }
}

void Validator::insert_and_track(const Block& b) {
    st_.tree.insert(b);
    commit_sweep();
}

void Validator::commit_sweep() {
    for (const QuorumCert& qc : st_.tree.drain_attached()) commit_check(qc);
}

void Validator::commit_check(const QuorumCert& qc) {
    const Block* b = st_.tree.block(qc.block);
    if (b == nullptr) return;
    bool any_gap = mut(kNonAdjacentCommit);
    // A certified parent one view below commits the parent.
    if (b->id != kGenesisId) {
        const Block* parent = st_.tree.block(b->parent);
        if (parent != nullptr) {
            for (View pv : st_.tree.cert_views(parent->id)) {
                if (pv + 1 == qc.view || (any_gap && pv < qc.view)) direct_commit(*parent, pv);
            }
        }
    }
    // A certified child one view above commits this block.
    if (const std::vector<BlockId>* kids = st_.tree.children(b->id)) {
        for (BlockId child_id : *kids) {
            for (View cv : st_.tree.cert_views(child_id)) {
                if (qc.view + 1 == cv || (any_gap && qc.view < cv)) direct_commit(*b, qc.view);
            }
        }
    }
}

void Validator::direct_commit(const Block& b, View cert_view) {
    st_.direct_log.push_back({b.id, cert_view});
    if (st_.committed_set.count(b.id)) return;
    // Commit every uncommitted ancestor, oldest first.
    std::vector<BlockId> chain;
    const Block* cur = &b;
    while (!st_.committed_set.count(cur->id)) {
        chain.push_back(cur->id);
        if (cur->id == kGenesisId) break;
        cur = st_.tree.block(cur->parent);
        if (cur == nullptr) break;  // unreachable: stored blocks have stored parents
    }
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
        st_.committed.push_back(*it);
        st_.committed_set.insert(*it);
    }
}

// ---------------------------------------------------------------------------
// Proposing

void Validator::propose_normal(const QuorumCert& entry) {
    const Block* parent = st_.tree.block(entry.block);
    if (parent == nullptr) return;  // certificate known but block body missing
    Block b;
    auto it = st_.my_opt_blocks.find(st_.r_c);
    if (it != st_.my_opt_blocks.end() && it->second.parent == entry.block) {
        b = it->second;  // the optimistic proposal already extends the entry cert
    } else {
        b = make_block(parent->height + 1, st_.r_c, parent->id, fresh_payload());
    }
    multicast(NormalProposal{cfg_.id, st_.r_c, b, entry});
}

void Validator::propose_fallback(const TimeoutCert& entry) {
    const QuorumCert& hq = tc_high_qc(entry);
    const Block* parent = st_.tree.block(hq.block);
    if (parent == nullptr) return;
    Block b = make_block(parent->height + 1, st_.r_c, parent->id, fresh_payload());
    multicast(FallbackProposal{cfg_.id, st_.r_c, b, hq, entry});
}

void Validator::maybe_opt_propose_next(const Block& voted) {
    View next = st_.r_c + 1;
    if (leader(next, cfg_.n()) != cfg_.id) return;
    if (st_.my_opt_blocks.count(next)) return;  // at most one optimistic proposal per view
    Block b = make_block(voted.height + 1, next, voted.id, fresh_payload());
    st_.my_opt_blocks.emplace(next, b);
    multicast(OptimisticProposal{cfg_.id, next, b});
}

void Validator::send_vote(VoteKind kind, const Block& b) {
    Vote v{kind, b.id, st_.r_c, cfg_.id};
    multicast(MsgVote{cfg_.id, v});
    switch (kind) {
        case VoteKind::Normal: st_.a_n = st_.r_c; break;
        case VoteKind::Fallback: st_.a_f = st_.r_c; break;
        case VoteKind::Optimistic:
            st_.a_o = st_.r_c;
            st_.b_o = b.id;
            break;
    }
    maybe_opt_propose_next(b);
}

// ---------------------------------------------------------------------------
// Proposal handling

void Validator::normal_proposal_processing(const NormalProposal& p) {
    if (p.view != p.block.view) return;
    if (p.src != leader(p.block.view, cfg_.n())) return;
    if (!block_intact(p.block)) return;
    if (!validate_qc(p.qc, cfg_.n(), quorum())) return;
    if (p.qc.block != p.block.parent) return;

    bool timer_ok = !st_.t_r;  // captured at receipt, before embedded certs move the view
    insert_and_track(p.block);
    qc_processing(p.qc);

    if (p.block.view != st_.r_c) return;
    if (!st_.possessed_n.insert(st_.r_c).second) return;  // only the first one counts
    if (!timer_ok) return;

    if (!(st_.a_f < st_.r_c)) return;
    if (!(st_.t_l < st_.r_c)) return;
    if (!mut(kNoEquivocationGuard) && !(st_.a_o < st_.r_c || st_.b_o == p.block.id)) return;
    if (!(st_.a_n < st_.r_c)) return;
    if (p.qc.view + 1 != st_.r_c) return;
    if (!st_.tree.contains(p.block.id)) return;  // malformed or orphaned: no vote
    send_vote(VoteKind::Normal, p.block);
}

void Validator::optimistic_proposal_processing(const OptimisticProposal& p) {
    if (p.view != p.block.view) return;
    if (p.src != leader(p.block.view, cfg_.n())) return;
    if (!block_intact(p.block)) return;

    insert_and_track(p.block);

    if (p.block.view != st_.r_c) return;
    if (!st_.possessed_o.insert(st_.r_c).second) return;

    if (!mut(kNoTimeoutGuard) && !(st_.t_l < st_.r_c - 1)) return;
    if (!mut(kNoLockCheck) &&
        !(st_.lock.view == st_.r_c - 1 && st_.lock.block == p.block.parent))
        return;
    if (st_.a_n == st_.r_c || st_.a_o == st_.r_c || st_.a_f == st_.r_c) return;
    if (!st_.tree.contains(p.block.id)) return;
    send_vote(VoteKind::Optimistic, p.block);
}

void Validator::fallback_proposal_processing(const FallbackProposal& p) {
    if (p.view != p.block.view) return;
    if (p.src != leader(p.block.view, cfg_.n())) return;
    if (!block_intact(p.block)) return;
    if (!validate_tc(p.tc, cfg_.n(), quorum())) return;
    if (p.tc.view + 1 != p.block.view) return;
    if (!(p.qc == tc_high_qc(p.tc))) return;
    if (p.qc.block != p.block.parent) return;

    bool timer_ok = !st_.t_r;
    insert_and_track(p.block);
    qc_processing(p.qc);
    timeout_sync(p.tc.view);
    if (p.tc.view >= st_.r_c) advance_view(p.tc.view + 1, nullptr, &p.tc);

    if (p.block.view != st_.r_c) return;
    if (!st_.possessed_f.insert(st_.r_c).second) return;
    if (!timer_ok) return;

    if (!(st_.t_l < st_.r_c)) return;
    if (!(st_.a_n < st_.r_c)) return;
    if (!(st_.a_f < st_.r_c)) return;
    if (!st_.tree.contains(p.block.id)) return;
    send_vote(VoteKind::Fallback, p.block);
}

// ---------------------------------------------------------------------------
// Vote and timeout aggregation

void Validator::accumulate_vote(const Vote& v) {
    if (v.author >= cfg_.n()) return;
    if (v.view == 0) return;
    uint8_t kind_key = mut(kMixedQcKinds) ? static_cast<uint8_t>(VoteKind::Normal)
                                          : static_cast<uint8_t>(v.kind);
    auto key = std::make_tuple(v.view, kind_key, v.block);
    auto& signers = st_.vote_pool[key];
    auto pos = std::lower_bound(signers.begin(), signers.end(), v.author);
    if (pos != signers.end() && *pos == v.author) return;
    signers.insert(pos, v.author);
    if (signers.size() == quorum()) {
        QuorumCert qc{v.view, v.block,
                      mut(kMixedQcKinds) ? VoteKind::Normal : v.kind, signers};
        qc_processing(qc);
    }
}

void Validator::accumulate_timeout(const Timeout& t) {
    if (t.author >= cfg_.n()) return;
    if (t.view == 0) return;
    if (!validate_qc(t.high_qc, cfg_.n(), quorum())) return;
    auto& pool = st_.timeout_pool[t.view];
    if (!pool.emplace(t.author, t).second) return;  // keep the first per author
    if (pool.size() == cfg_.f + 1) timeout_sync(t.view);
    if (pool.size() == 2 * cfg_.f + 1 && st_.tc_formed.insert(t.view).second) {
        TimeoutCert tc;
        tc.view = t.view;
        for (const auto& [author, to] : pool) tc.timeouts.push_back(to);
        tc_processing(tc);
    }
}

// ---------------------------------------------------------------------------

void Validator::handle_message(const Message& m) {
    if (std::holds_alternative<NormalProposal>(m)) {
        normal_proposal_processing(std::get<NormalProposal>(m));
    } else if (std::holds_alternative<FallbackProposal>(m)) {
        fallback_proposal_processing(std::get<FallbackProposal>(m));
    } else if (std::holds_alternative<OptimisticProposal>(m)) {
        optimistic_proposal_processing(std::get<OptimisticProposal>(m));
    } else if (std::holds_alternative<MsgVote>(m)) {
        accumulate_vote(std::get<MsgVote>(m).vote);
    } else if (std::holds_alternative<MsgTimeout>(m)) {
        accumulate_timeout(std::get<MsgTimeout>(m).timeout);
    } else if (std::holds_alternative<MsgQc>(m)) {
        qc_processing(std::get<MsgQc>(m).qc);
    } else if (std::holds_alternative<MsgTc>(m)) {
        tc_processing(std::get<MsgTc>(m).tc);
    } else if (std::holds_alternative<MsgWeakTc>(m)) {
        const MsgWeakTc& w = std::get<MsgWeakTc>(m);
        if (validate_wtc(w.wtc, cfg_.n(), cfg_.f, quorum())) timeout_sync(w.wtc.view);
    }
}

namespace {

void hash_opt(Fnv& h, const std::optional<View>& v) {
    h.u64(v.has_value() ? 1 : 0);
    h.u64(v.value_or(0));
}

}  // namespace

void fingerprint_state(Fnv& h, const Validator::State& st) {
    h.u64(st.r_c);
    hash_qc(h, st.lock);
    hash_opt(h, st.t_l);
    h.u64(st.t_r ? 1 : 0);
    hash_opt(h, st.a_n);
    hash_opt(h, st.a_o);
    hash_opt(h, st.a_f);
    h.u64(st.b_o.has_value() ? 1 : 0);
    h.u64(st.b_o.value_or(0));
    for (const auto* views : {&st.possessed_n, &st.possessed_o, &st.possessed_f}) {
        h.u64(views->size());
        for (View v : *views) h.u64(v);
    }
    h.u64(st.vote_pool.size());
    for (const auto& [key, voters] : st.vote_pool) {
        h.u64(std::get<0>(key));
        h.u64(std::get<1>(key));
        h.u64(std::get<2>(key));
        h.u64(voters.size());
        for (ValidatorId v : voters) h.u64(v);
    }
    h.u64(st.timeout_pool.size());
    for (const auto& [view, by_author] : st.timeout_pool) {
        h.u64(view);
        h.u64(by_author.size());
        for (const auto& [author, t] : by_author) hash_timeout(h, t);
    }
    h.u64(st.tc_formed.size());
    for (View v : st.tc_formed) h.u64(v);
    st.tree.fingerprint(h);
    h.u64(st.committed.size());
    for (BlockId b : st.committed) h.u64(b);
    h.u64(st.direct_log.size());
    for (const DirectCommit& d : st.direct_log) {
        h.u64(d.block);
        h.u64(d.cert_view);
    }
    h.u64(st.cert_log.size());
    for (const QuorumCert& q : st.cert_log) hash_qc(h, q);
    h.u64(st.my_opt_blocks.size());
    for (const auto& [view, b] : st.my_opt_blocks) hash_block(h, b);
    h.u64(st.payload_counter);
}

}  // namespace moonshot
