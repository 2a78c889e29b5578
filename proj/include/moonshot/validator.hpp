#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "moonshot/block_tree.hpp"
#include "moonshot/types.hpp"

namespace moonshot {

class Fnv;

// Guard/threshold toggles for the mutation suite. Each weakens exactly one
// rule; the safety monitor must catch every one of them.
enum Mutation : uint32_t {
    kWeakQuorum = 1u << 0,           // QCs form and validate at f+1 instead of 2f+1
    kNoLockCheck = 1u << 1,          // optimistic vote skips the lock equality check
    kMixedQcKinds = 1u << 2,         // votes pool across kinds; formed QCs labeled Normal
    kNoEquivocationGuard = 1u << 3,  // normal vote ignores a prior conflicting optimistic vote
    kNoTimeoutGuard = 1u << 4,       // optimistic vote ignores timeout_view
    kNonAdjacentCommit = 1u << 5,    // direct commit accepts any view gap, not just adjacent
};

std::optional<Mutation> mutation_from_name(const std::string& name);
const char* mutation_name(Mutation m);
extern const Mutation kAllMutations[6];

struct ValidatorConfig {
    ValidatorId id = 0;
    uint32_t f = 1;
    uint32_t mutations = 0;

    uint32_t n() const { return 3 * f + 1; }
};

// Outbound message with routing: no dst means multicast.
struct Outgoing {
    Message msg;
    std::optional<ValidatorId> dst;
};

struct DirectCommit {
    BlockId block = kGenesisId;
    View cert_view = 0;  // view of the certificate on the committed block
};

class Validator {
  public:
    // Everything observable about a validator. The simulator, monitor, tests
    // and the exploration fingerprint all read this; handlers are the only
    // writers.
    struct State {
        View r_c = 1;
        QuorumCert lock;
        std::optional<View> t_l;  // highest view a timeout was sent for
        bool t_r = false;         // timer expired in the current view
        std::optional<View> a_n, a_o, a_f;
        std::optional<BlockId> b_o;  // block voted optimistically in r_c
        std::set<View> possessed_n, possessed_o, possessed_f;
        std::map<std::tuple<View, uint8_t, BlockId>, std::vector<ValidatorId>> vote_pool;
        std::map<View, std::map<ValidatorId, Timeout>> timeout_pool;
        std::set<View> tc_formed;
        BlockTree tree;
        std::vector<BlockId> committed;
        std::set<BlockId> committed_set;
        std::vector<DirectCommit> direct_log;  // every direct-commit rule firing
        std::vector<QuorumCert> cert_log;      // certificates accepted, in first-seen order
        std::map<View, Block> my_opt_blocks;   // own optimistic proposals
        uint64_t payload_counter = 0;
    };

    explicit Validator(ValidatorConfig cfg);

    // Bootstrap: every validator starts in view 1 locked on the genesis
    // certificate; the leader of view 1 proposes off it.
    void start();

    void handle_message(const Message& m);
    void on_timer();

    std::vector<Outgoing> drain_outbox();

    const State& state() const { return st_; }
    const ValidatorConfig& config() const { return cfg_; }
    uint32_t quorum() const;

  private:
    bool mut(Mutation m) const { return (cfg_.mutations & m) != 0; }

    void advance_view(View to, const QuorumCert* qc, const TimeoutCert* tc);
    void qc_processing(const QuorumCert& qc);
    void tc_processing(const TimeoutCert& tc);
    void timeout_sync(View view);
    void propose_normal(const QuorumCert& entry);
    void propose_fallback(const TimeoutCert& entry);
    void maybe_opt_propose_next(const Block& voted);
    void normal_proposal_processing(const NormalProposal& p);
    void fallback_proposal_processing(const FallbackProposal& p);
    void optimistic_proposal_processing(const OptimisticProposal& p);
    void accumulate_vote(const Vote& v);
    void accumulate_timeout(const Timeout& t);

    void insert_and_track(const Block& b);
    void commit_sweep();
    void commit_check(const QuorumCert& qc);
    void direct_commit(const Block& b, View cert_view);
    void record_cert(const QuorumCert& qc);
    void send_vote(VoteKind kind, const Block& b);
    void multicast(Message m);
    void unicast(Message m, ValidatorId dst);
    std::string fresh_payload();
    bool block_intact(const Block& b) const;

    ValidatorConfig cfg_;
    State st_;
    std::set<std::tuple<View, uint8_t, BlockId>> certs_seen_;
    std::vector<Outgoing> outbox_;
};

// Canonical digest of everything in State; exploration treats two validators
// with equal fingerprints as behaviorally identical.
void fingerprint_state(Fnv& h, const Validator::State& st);

}  // namespace moonshot
