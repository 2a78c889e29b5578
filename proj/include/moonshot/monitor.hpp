#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "moonshot/block_tree.hpp"
#include "moonshot/rng.hpp"
#include "moonshot/types.hpp"
#include "moonshot/validator.hpp"

namespace moonshot {

struct Violation {
    std::string kind;    // which check fired
    std::string detail;  // human-readable evidence

    bool operator==(const Violation& o) const = default;
};

// Everything the monitor has learned about a run: what honest validators sent,
// which certificates appeared anywhere (standalone, embedded in proposals,
// timeouts or timeout certs), which blocks were committed and how. Checks run
// incrementally as observations arrive; the pure functions below re-derive the
// same verdicts from a ledger for cross-validation and the end-of-run sweep.
struct Ledger {
    uint32_t n = 0;
    std::vector<bool> byzantine;  // indexed by validator id
    // Honest votes actually sent: per author, per view, (kind, block) pairs.
    std::map<ValidatorId, std::map<View, std::vector<std::pair<VoteKind, BlockId>>>> votes;
    // Honest timeouts actually sent (at most one per author per view).
    std::map<ValidatorId, std::map<View, Timeout>> timeouts;
    // Honest-authored timeouts observed anywhere (relays, TCs); each must
    // match the sent record. One retained per (author, view).
    std::map<ValidatorId, std::map<View, Timeout>> observed_timeouts;
    // Distinct certificates observed, in first-seen order.
    std::vector<QuorumCert> certs;
    // Direct-commit firings: (block, certificate view) with the reporter.
    std::vector<std::pair<DirectCommit, ValidatorId>> direct_commits;
    // Committed chains as reported, one list per validator id.
    std::map<ValidatorId, std::vector<BlockId>> committed;
    // Every block body seen in any message.
    BlockTree tree;

    bool honest(ValidatorId v) const { return v < byzantine.size() && !byzantine[v]; }
};

// Pure full-scan checks over a complete ledger. Each returns the first
// violation it finds, scanning in a deterministic order.
namespace checks {
std::optional<Violation> quorum(const Ledger& lg);
std::optional<Violation> certificate_uniqueness(const Ledger& lg);
std::optional<Violation> vote_budget(const Ledger& lg);
std::optional<Violation> blockchain_prefix(const Ledger& lg);
std::optional<Violation> ancestor_closure(const Ledger& lg);
std::optional<Violation> committed_blocks_ancestors(const Ledger& lg);
std::optional<Violation> quorum_after_ldc_descendant(const Ledger& lg);

// All of the above in order; used for the end-of-run sweep.
std::optional<Violation> all(const Ledger& lg);
}  // namespace checks

class Monitor {
  public:
    // `effective_quorum` is what the system under test treats as a QC
    // threshold (2f+1, or f+1 under the weakened-quorum mutation): the monitor
    // accepts the same certificates the validators do, then holds them to the
    // real safety checks.
    Monitor(uint32_t f, uint32_t effective_quorum, std::vector<bool> byzantine);

    // Feed one message entering the network: an honest validator's outbox
    // entry or an adversary injection. Returns the first violation, if any.
    std::optional<Violation> observe_message(ValidatorId src, bool src_honest, const Message& m);

    // Consume new suffixes of a validator's append-only logs after it handled
    // an event.
    std::optional<Violation> observe_state(const Validator& v);

    // Pure re-check of the accumulated ledger (end of run, and test
    // cross-validation against the incremental path).
    std::optional<Violation> final_sweep() const { return checks::all(ledger_); }

    const Ledger& ledger() const { return ledger_; }
    const std::vector<std::string>& warnings() const { return warnings_; }

    // Mixed into exploration state fingerprints so schedules that differ only
    // in what the monitor has learned are not conflated.
    void fingerprint(Fnv& h) const;

  private:
    std::optional<Violation> process_cert(const QuorumCert& qc);
    std::optional<Violation> process_timeout_object(const Timeout& t);
    std::optional<Violation> record_sent_vote(const Vote& v);
    std::optional<Violation> record_commit(ValidatorId who, BlockId block);
    std::optional<Violation> record_direct(ValidatorId who, const DirectCommit& dc);
    std::pair<uint64_t, uint64_t> cert_fingerprint(const QuorumCert& qc) const;

    uint32_t f_;
    uint32_t quorum_;
    Ledger ledger_;
    std::vector<std::string> warnings_;

    std::set<std::pair<uint64_t, uint64_t>> certs_seen_;
    std::map<std::pair<View, uint8_t>, BlockId> cert_block_;   // uniqueness
    std::map<View, std::map<uint8_t, BlockId>> view_kinds_;    // cross-kind warnings
    std::map<View, std::vector<std::pair<BlockId, VoteKind>>> certs_by_view_;
    std::map<View, std::set<BlockId>> dc_by_view_;             // deduped direct commits
    std::map<View, Height> dc_pmax_;  // max committed height among views <= key
    std::map<ValidatorId, std::set<BlockId>> committed_sets_;
    std::vector<BlockId> canon_;                               // longest committed chain
    std::map<ValidatorId, size_t> consumed_commits_;
    std::map<ValidatorId, size_t> consumed_certs_;
    std::map<ValidatorId, size_t> consumed_directs_;
    std::optional<BlockId> tip_;                               // deepest committed block
};

}  // namespace moonshot
