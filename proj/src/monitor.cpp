#include "moonshot/monitor.hpp"

#include <algorithm>

#include "moonshot/encoding.hpp"

namespace moonshot {

namespace {

std::string describe(const QuorumCert& qc) {
    return "view=" + std::to_string(qc.view) + " kind=" + vote_kind_tag(qc.kind) +
           " block=" + hex16(qc.block);
}

}  // namespace

Monitor::Monitor(uint32_t f, uint32_t effective_quorum, std::vector<bool> byzantine)
    : f_(f), quorum_(effective_quorum) {
    ledger_.n = 3 * f + 1;
    ledger_.byzantine = std::move(byzantine);
    ledger_.byzantine.resize(ledger_.n, false);
}

std::pair<uint64_t, uint64_t> Monitor::cert_fingerprint(const QuorumCert& qc) const {
    Fnv h;
    h.u64(qc.view);
    h.u64(static_cast<uint8_t>(qc.kind));
    h.u64(qc.block);
    for (ValidatorId s : qc.signers) h.u64(s);
    return h.pair();
}

std::optional<Violation> Monitor::process_cert(const QuorumCert& qc) {
    if (!validate_qc(qc, ledger_.n, quorum_)) return std::nullopt;  // validators drop these too
    if (!certs_seen_.insert(cert_fingerprint(qc)).second) return std::nullopt;
    ledger_.certs.push_back(qc);

    // Every honest signer must actually have sent a matching vote.
    if (qc.view != 0) {
        for (ValidatorId s : qc.signers) {
            if (!ledger_.honest(s)) continue;
            bool found = false;
            auto va = ledger_.votes.find(s);
            if (va != ledger_.votes.end()) {
                auto vv = va->second.find(qc.view);
                if (vv != va->second.end()) {
                    for (const auto& [kind, block] : vv->second) {
                        if (kind == qc.kind && block == qc.block) {
                            found = true;
                            break;
                        }
                    }
                }
            }
            if (!found)
                return Violation{"quorum", "certificate " + describe(qc) + " lists signer " +
                                               std::to_string(s) + " with no matching vote"};
        }
    }

    // At most one certified block per (view, kind).
    auto ukey = std::make_pair(qc.view, static_cast<uint8_t>(qc.kind));
    auto [it, fresh] = cert_block_.emplace(ukey, qc.block);
    if (!fresh && it->second != qc.block)
        return Violation{"certificate_uniqueness",
                         "view " + std::to_string(qc.view) + " kind " + vote_kind_tag(qc.kind) +
                             " certifies both " + hex16(it->second) + " and " + hex16(qc.block)};

    // Cross-kind conflicts in one view cannot happen in faithful runs either,
    // but are reported as warnings, not violations.
    auto& kinds = view_kinds_[qc.view];
    for (const auto& [ktag, blk] : kinds) {
        if (ktag != static_cast<uint8_t>(qc.kind) && blk != qc.block)
            warnings_.push_back("view " + std::to_string(qc.view) +
                                " certifies different blocks under different kinds: " +
                                hex16(blk) + " vs " + hex16(qc.block));
    }
    kinds.emplace(static_cast<uint8_t>(qc.kind), qc.block);

    // A certificate above a direct commit must certify a descendant of the
    // committed block. Checking the deepest committed block below qc.view
    // covers the rest: committed blocks are pairwise comparable (checked
    // separately), so shallower ones are its ancestors.
    const Block* cb = ledger_.tree.block(qc.block);
    if (cb != nullptr && qc.view != 0) {
        auto it2 = dc_by_view_.lower_bound(qc.view);
        Height covered = 0;
        bool have_covered = false;
        while (it2 != dc_by_view_.begin()) {
            --it2;
            Height here_max = 0;
            for (BlockId b : it2->second) {
                if (!ledger_.tree.is_ancestor(b, qc.block))
                    return Violation{
                        "quorum_after_ldc_descendant",
                        "certificate " + describe(qc) + " does not extend block " + hex16(b) +
                            " directly committed with certificate view " +
                            std::to_string(it2->first)};
                const Block* bb = ledger_.tree.block(b);
                if (bb != nullptr) here_max = std::max(here_max, bb->height);
            }
            covered = have_covered ? std::max(covered, here_max) : here_max;
            have_covered = true;
            // All lower-view commits at or below this height are ancestors of
            // the block just verified, hence already covered.
            auto pm = dc_pmax_.lower_bound(it2->first);
            if (pm == dc_pmax_.begin()) break;
            --pm;
            if (pm->second <= covered) break;
        }
    }

    certs_by_view_[qc.view].emplace_back(qc.block, qc.kind);
    return std::nullopt;
}

std::optional<Violation> Monitor::process_timeout_object(const Timeout& t) {
    if (ledger_.honest(t.author)) {
        auto sent = ledger_.timeouts.find(t.author);
        const Timeout* rec = nullptr;
        if (sent != ledger_.timeouts.end()) {
            auto sv = sent->second.find(t.view);
            if (sv != sent->second.end()) rec = &sv->second;
        }
        if (rec == nullptr || !(*rec == t))
            return Violation{"quorum", "timeout for view " + std::to_string(t.view) +
                                           " attributed to validator " +
                                           std::to_string(t.author) +
                                           " does not match any timeout it sent"};
        ledger_.observed_timeouts[t.author].emplace(t.view, t);
    }
    return process_cert(t.high_qc);
}

std::optional<Violation> Monitor::record_sent_vote(const Vote& v) {
    auto& entries = ledger_.votes[v.author][v.view];
    for (const auto& [kind, block] : entries)
        if (kind == v.kind && block == v.block) return std::nullopt;
    entries.emplace_back(v.kind, v.block);

    int opt = 0, other = 0;
    std::optional<BlockId> opt_block, normal_block;
    for (const auto& [kind, block] : entries) {
        if (kind == VoteKind::Optimistic) {
            ++opt;
            opt_block = block;
        } else {
            ++other;
            if (kind == VoteKind::Normal) normal_block = block;
        }
    }
    std::string who = "validator " + std::to_string(v.author) + " view " + std::to_string(v.view);
    if (opt > 1) return Violation{"vote_budget", who + ": more than one optimistic vote"};
    if (other > 1)
        return Violation{"vote_budget", who + ": more than one normal/fallback vote"};
    if (opt_block && normal_block && *opt_block != *normal_block)
        return Violation{"vote_budget", who + ": optimistic vote for " + hex16(*opt_block) +
                                            " but normal vote for " + hex16(*normal_block)};
    return std::nullopt;
}

std::optional<Violation> Monitor::record_commit(ValidatorId who, BlockId block) {
    auto& list = ledger_.committed[who];
    size_t pos = list.size();

    // All honest chains must agree position by position.
    if (pos < canon_.size()) {
        if (canon_[pos] != block)
            return Violation{"blockchain_prefix",
                             "validator " + std::to_string(who) + " committed " + hex16(block) +
                                 " at position " + std::to_string(pos) +
                                 " where another validator committed " + hex16(canon_[pos])};
    } else {
        canon_.push_back(block);
    }

    // A block may only be committed once its parent is.
    if (block != kGenesisId) {
        const Block* b = ledger_.tree.block(block);
        if (b == nullptr)
            return Violation{"ancestor_closure", "validator " + std::to_string(who) +
                                                     " committed unknown block " + hex16(block)};
        if (!committed_sets_[who].count(b->parent))
            return Violation{"ancestor_closure",
                             "validator " + std::to_string(who) + " committed " + hex16(block) +
                                 " before its parent " + hex16(b->parent)};
    }

    // Every committed block anywhere must sit on one chain.
    const Block* nb = ledger_.tree.block(block);
    if (nb == nullptr)
        return Violation{"committed_blocks_ancestors",
                         "committed block " + hex16(block) + " has no known body"};
    if (tip_) {
        if (!ledger_.tree.is_ancestor(*tip_, block) && !ledger_.tree.is_ancestor(block, *tip_))
            return Violation{"committed_blocks_ancestors",
                             "committed blocks " + hex16(block) + " and " + hex16(*tip_) +
                                 " lie on divergent branches"};
        const Block* tb = ledger_.tree.block(*tip_);
        if (tb == nullptr || nb->height > tb->height) tip_ = block;
    } else {
        tip_ = block;
    }

    list.push_back(block);
    committed_sets_[who].insert(block);
    return std::nullopt;
}

std::optional<Violation> Monitor::record_direct(ValidatorId who, const DirectCommit& dc) {
    ledger_.direct_commits.emplace_back(dc, who);
    auto& at_view = dc_by_view_[dc.cert_view];
    if (!at_view.insert(dc.block).second) return std::nullopt;  // already checked

    // Certificates already formed above this view must extend the block.
    for (auto it = certs_by_view_.upper_bound(dc.cert_view); it != certs_by_view_.end(); ++it) {
        for (const auto& [blk, kind] : it->second) {
            if (!ledger_.tree.is_ancestor(dc.block, blk))
                return Violation{"quorum_after_ldc_descendant",
                                 "block " + hex16(dc.block) +
                                     " directly committed with certificate view " +
                                     std::to_string(dc.cert_view) +
                                     " but a certificate at view " + std::to_string(it->first) +
                                     " covers non-descendant " + hex16(blk)};
        }
    }

    // Maintain prefix-max committed heights for the early-stop in
    // process_cert.
    const Block* b = ledger_.tree.block(dc.block);
    Height h = b != nullptr ? b->height : 0;
    auto floor_it = dc_pmax_.upper_bound(dc.cert_view);
    Height prefix = h;
    if (floor_it != dc_pmax_.begin()) prefix = std::max(prefix, std::prev(floor_it)->second);
    dc_pmax_[dc.cert_view] = std::max(dc_pmax_.count(dc.cert_view) ? dc_pmax_[dc.cert_view] : 0,
                                      prefix);
    for (auto it = dc_pmax_.upper_bound(dc.cert_view); it != dc_pmax_.end(); ++it) {
        if (it->second >= prefix) break;
        it->second = prefix;
    }
    return std::nullopt;
}

std::optional<Violation> Monitor::observe_message(ValidatorId src, bool src_honest,
                                                  const Message& m) {
    if (const auto* p = std::get_if<NormalProposal>(&m)) {
        ledger_.tree.insert(p->block);
        return process_cert(p->qc);
    }
    if (const auto* p = std::get_if<FallbackProposal>(&m)) {
        ledger_.tree.insert(p->block);
        if (auto v = process_cert(p->qc)) return v;
        for (const Timeout& t : p->tc.timeouts)
            if (auto v = process_timeout_object(t)) return v;
        return std::nullopt;
    }
    if (const auto* p = std::get_if<OptimisticProposal>(&m)) {
        ledger_.tree.insert(p->block);
        return std::nullopt;
    }
    if (const auto* p = std::get_if<MsgVote>(&m)) {
        if (src_honest && p->vote.author == src) return record_sent_vote(p->vote);
        return std::nullopt;
    }
    if (const auto* p = std::get_if<MsgTimeout>(&m)) {
        if (src_honest && p->timeout.author == src) {
            ledger_.timeouts[src].emplace(p->timeout.view, p->timeout);
            return process_cert(p->timeout.high_qc);
        }
        return process_timeout_object(p->timeout);
    }
    if (const auto* p = std::get_if<MsgQc>(&m)) return process_cert(p->qc);
    if (const auto* p = std::get_if<MsgTc>(&m)) {
        for (const Timeout& t : p->tc.timeouts)
            if (auto v = process_timeout_object(t)) return v;
        return std::nullopt;
    }
    if (const auto* p = std::get_if<MsgWeakTc>(&m)) {
        for (const Timeout& t : p->wtc.timeouts)
            if (auto v = process_timeout_object(t)) return v;
    }
    return std::nullopt;
}

std::optional<Violation> Monitor::observe_state(const Validator& v) {
    ValidatorId id = v.config().id;
    const Validator::State& s = v.state();

    size_t& cc = consumed_certs_[id];
    while (cc < s.cert_log.size()) {
        if (auto viol = process_cert(s.cert_log[cc++])) return viol;
    }
    size_t& cm = consumed_commits_[id];
    while (cm < s.committed.size()) {
        if (auto viol = record_commit(id, s.committed[cm++])) return viol;
    }
    size_t& cd = consumed_directs_[id];
    while (cd < s.direct_log.size()) {
        if (auto viol = record_direct(id, s.direct_log[cd++])) return viol;
    }
    return std::nullopt;
}

void Monitor::fingerprint(Fnv& h) const {
    h.u64(ledger_.votes.size());
    for (const auto& [author, per_view] : ledger_.votes) {
        h.u64(author);
        h.u64(per_view.size());
        for (const auto& [view, entries] : per_view) {
            h.u64(view);
            for (const auto& [kind, block] : entries) {
                h.u64(static_cast<uint8_t>(kind));
                h.u64(block);
            }
        }
    }
    h.u64(ledger_.timeouts.size());
    for (const auto& [author, per_view] : ledger_.timeouts) {
        h.u64(author);
        for (const auto& [view, t] : per_view) {
            h.u64(view);
            h.u64(t.high_qc.view);
            h.u64(t.high_qc.block);
        }
    }
    for (const auto& [a, b] : certs_seen_) {
        h.u64(a);
        h.u64(b);
    }
    for (const auto& [key, block] : cert_block_) {
        h.u64(key.first);
        h.u64(key.second);
        h.u64(block);
    }
    for (const auto& [view, blocks] : dc_by_view_) {
        h.u64(view);
        for (BlockId b : blocks) h.u64(b);
    }
    for (BlockId b : canon_) h.u64(b);
    h.u64(tip_ ? *tip_ + 1 : 0);
    for (const auto& [id, b] : ledger_.tree.blocks()) {
        h.u64(id);
        h.u64(b.height);
        h.u64(b.view);
        h.u64(b.parent);
        h.bytes(b.payload.data(), b.payload.size());
    }
    for (const auto& [id, certs] : ledger_.tree.certified()) {
        h.u64(id);
        for (const auto& qc : certs) {
            h.u64(qc.view);
            h.u64(static_cast<uint8_t>(qc.kind));
        }
    }
}

// ---------------------------------------------------------------------------
// Pure full-scan checks

namespace checks {

std::optional<Violation> quorum(const Ledger& lg) {
    for (const QuorumCert& qc : lg.certs) {
        if (qc.view == 0) continue;
        for (ValidatorId s : qc.signers) {
            if (!lg.honest(s)) continue;
            bool found = false;
            auto va = lg.votes.find(s);
            if (va != lg.votes.end()) {
                auto vv = va->second.find(qc.view);
                if (vv != va->second.end()) {
                    for (const auto& [kind, block] : vv->second)
                        if (kind == qc.kind && block == qc.block) found = true;
                }
            }
            if (!found)
                return Violation{"quorum", "certificate " + describe(qc) + " lists signer " +
                                               std::to_string(s) + " with no matching vote"};
        }
    }
    for (const auto& [author, per_view] : lg.observed_timeouts) {
        for (const auto& [view, t] : per_view) {
            auto sa = lg.timeouts.find(author);
            const Timeout* rec = nullptr;
            if (sa != lg.timeouts.end()) {
                auto sv = sa->second.find(view);
                if (sv != sa->second.end()) rec = &sv->second;
            }
            if (rec == nullptr || !(*rec == t))
                return Violation{"quorum", "timeout for view " + std::to_string(view) +
                                               " attributed to validator " +
                                               std::to_string(author) +
                                               " does not match any timeout it sent"};
        }
    }
    return std::nullopt;
}

std::optional<Violation> certificate_uniqueness(const Ledger& lg) {
    std::map<std::pair<View, uint8_t>, BlockId> seen;
    for (const QuorumCert& qc : lg.certs) {
        auto key = std::make_pair(qc.view, static_cast<uint8_t>(qc.kind));
        auto [it, fresh] = seen.emplace(key, qc.block);
        if (!fresh && it->second != qc.block)
            return Violation{"certificate_uniqueness",
                             "view " + std::to_string(qc.view) + " kind " +
                                 vote_kind_tag(qc.kind) + " certifies both " +
                                 hex16(it->second) + " and " + hex16(qc.block)};
    }
    return std::nullopt;
}

std::optional<Violation> vote_budget(const Ledger& lg) {
    for (const auto& [author, per_view] : lg.votes) {
        if (!lg.honest(author)) continue;
        for (const auto& [view, entries] : per_view) {
            int opt = 0, other = 0;
            std::optional<BlockId> opt_block, normal_block;
            for (const auto& [kind, block] : entries) {
                if (kind == VoteKind::Optimistic) {
                    ++opt;
                    opt_block = block;
                } else {
                    ++other;
                    if (kind == VoteKind::Normal) normal_block = block;
                }
            }
            std::string who =
                "validator " + std::to_string(author) + " view " + std::to_string(view);
            if (opt > 1) return Violation{"vote_budget", who + ": more than one optimistic vote"};
            if (other > 1)
                return Violation{"vote_budget", who + ": more than one normal/fallback vote"};
            if (opt_block && normal_block && *opt_block != *normal_block)
                return Violation{"vote_budget", who + ": optimistic vote for " +
                                                    hex16(*opt_block) + " but normal vote for " +
                                                    hex16(*normal_block)};
        }
    }
    return std::nullopt;
}

std::optional<Violation> blockchain_prefix(const Ledger& lg) {
    for (auto a = lg.committed.begin(); a != lg.committed.end(); ++a) {
        if (!lg.honest(a->first)) continue;
        for (auto b = std::next(a); b != lg.committed.end(); ++b) {
            if (!lg.honest(b->first)) continue;
            size_t common = std::min(a->second.size(), b->second.size());
            for (size_t i = 0; i < common; ++i) {
                if (a->second[i] != b->second[i])
                    return Violation{"blockchain_prefix",
                                     "validators " + std::to_string(a->first) + " and " +
                                         std::to_string(b->first) + " disagree at position " +
                                         std::to_string(i) + ": " + hex16(a->second[i]) +
                                         " vs " + hex16(b->second[i])};
            }
        }
    }
    return std::nullopt;
}

std::optional<Violation> ancestor_closure(const Ledger& lg) {
    for (const auto& [who, list] : lg.committed) {
        if (!lg.honest(who)) continue;
        std::set<BlockId> have;
        for (BlockId id : list) {
            if (id != kGenesisId) {
                const Block* b = lg.tree.block(id);
                if (b == nullptr)
                    return Violation{"ancestor_closure", "validator " + std::to_string(who) +
                                                             " committed unknown block " +
                                                             hex16(id)};
                if (!have.count(b->parent))
                    return Violation{"ancestor_closure",
                                     "validator " + std::to_string(who) + " committed " +
                                         hex16(id) + " before its parent " + hex16(b->parent)};
            }
            have.insert(id);
        }
    }
    return std::nullopt;
}

std::optional<Violation> committed_blocks_ancestors(const Ledger& lg) {
    for (const auto& [who, list] : lg.committed) {
        if (!lg.honest(who)) continue;
        std::set<BlockId> distinct(list.begin(), list.end());
        std::vector<const Block*> blocks;
        for (BlockId id : distinct) {
            const Block* b = lg.tree.block(id);
            if (b == nullptr)
                return Violation{"committed_blocks_ancestors",
                                 "validator " + std::to_string(who) + " committed block " +
                                     hex16(id) + " with no known body"};
            blocks.push_back(b);
        }
        std::sort(blocks.begin(), blocks.end(), [](const Block* a, const Block* b) {
            return a->height != b->height ? a->height < b->height : a->id < b->id;
        });
        for (size_t i = 1; i < blocks.size(); ++i) {
            const Block *lo = blocks[i - 1], *hi = blocks[i];
            bool ok = lo->height == hi->height ? lo->id == hi->id
                                               : lg.tree.is_ancestor(lo->id, hi->id);
            if (!ok)
                return Violation{"committed_blocks_ancestors",
                                 "validator " + std::to_string(who) + " committed blocks " +
                                     hex16(lo->id) + " and " + hex16(hi->id) +
                                     " on divergent branches"};
        }
    }
    return std::nullopt;
}

std::optional<Violation> quorum_after_ldc_descendant(const Ledger& lg) {
    std::set<std::pair<View, BlockId>> dcs;
    for (const auto& [dc, who] : lg.direct_commits) dcs.emplace(dc.cert_view, dc.block);
    for (const auto& [view, block] : dcs) {
        for (const QuorumCert& qc : lg.certs) {
            if (qc.view <= view) continue;
            if (!lg.tree.is_ancestor(block, qc.block))
                return Violation{"quorum_after_ldc_descendant",
                                 "certificate " + describe(qc) + " does not extend block " +
                                     hex16(block) + " directly committed with certificate view " +
                                     std::to_string(view)};
        }
    }
    return std::nullopt;
}

std::optional<Violation> all(const Ledger& lg) {
    if (auto v = quorum(lg)) return v;
    if (auto v = certificate_uniqueness(lg)) return v;
    if (auto v = vote_budget(lg)) return v;
    if (auto v = blockchain_prefix(lg)) return v;
    if (auto v = ancestor_closure(lg)) return v;
    if (auto v = committed_blocks_ancestors(lg)) return v;
    if (auto v = quorum_after_ldc_descendant(lg)) return v;
    return std::nullopt;
}

}  // namespace checks

}  // namespace moonshot
