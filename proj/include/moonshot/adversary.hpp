#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "moonshot/types.hpp"

namespace moonshot {

class Fnv;

// A single adversary-controlled delivery: `msg` handed to `dst` as one
// simulation step, bypassing drop/duplicate sampling.
struct Injection {
    ValidatorId dst = 0;
    Message msg;
};

// Everything an omniscient adversary has seen honest validators send, plus
// bodies it injected itself. Also the authority for what the adversary is
// ALLOWED to inject: byzantine validators may say anything in their own name,
// but honest-attributed material (votes, timeouts, certificate signatures,
// whole relayed messages) must have actually been produced by its honest
// author.
class Observed {
  public:
    Observed(uint32_t f, uint32_t effective_quorum, std::vector<bool> byzantine);

    void add(ValidatorId src, const Message& m);  // honest send
    void add_injected(const Message& m);          // adversary's own material

    bool honest(ValidatorId v) const { return v < byz_.size() && !byz_[v]; }
    uint32_t n() const { return n_; }
    uint32_t f() const { return f_; }
    uint32_t quorum() const { return quorum_; }
    const std::vector<bool>& byzantine() const { return byz_; }
    const std::vector<ValidatorId>& byz_ids() const { return byz_ids_; }
    const std::vector<ValidatorId>& honest_ids() const { return honest_ids_; }

    // Boundary rule for one injected message (recursive over embedded
    // objects). Messages with an honest src must be exact replays.
    bool injection_legal(const Message& m) const;

    // Digest of every input injection_legal consults, so state-space search
    // never merges two states whose sets of legal injections could differ.
    void fingerprint(Fnv& h) const;

    bool vote_backed(const Vote& v) const;         // byz author, or honest author really voted it
    bool timeout_backed(const Timeout& t) const;   // byz author, or exact match of a sent timeout
    bool cert_backed(const QuorumCert& qc) const;  // every honest signer really voted it

    // Can the adversary assemble a QC for (view, kind, block) out of observed
    // honest votes plus its own signatures? Returns the certificate if so.
    std::optional<QuorumCert> try_build_qc(View view, VoteKind kind, BlockId block) const;
    // Same for a TC over `view`; byzantine members claim `byz_lock`.
    std::optional<TimeoutCert> try_build_tc(View view, const QuorumCert& byz_lock) const;

    // Append-only logs for strategies to consume by cursor.
    const std::vector<QuorumCert>& cert_log() const { return cert_log_; }   // first per view
    const std::vector<Block>& proposal_log() const { return proposal_log_; }  // distinct blocks
    const std::vector<Timeout>& timeout_log() const { return timeout_log_; }  // honest timeouts
    const std::vector<Vote>& vote_log() const { return vote_log_; }           // honest votes

    const QuorumCert* cert_at(View view) const;
    const Block* body(BlockId id) const;

  private:
    void note_cert(const QuorumCert& qc);
    void note_block(const Block& b);

    uint32_t f_;
    uint32_t n_;
    uint32_t quorum_;
    std::vector<bool> byz_;
    std::vector<ValidatorId> byz_ids_, honest_ids_;

    std::map<std::tuple<View, uint8_t, BlockId>, std::set<ValidatorId>> votes_;
    std::map<View, std::map<ValidatorId, Timeout>> timeouts_;
    std::map<View, QuorumCert> cert_at_;
    std::map<BlockId, Block> blocks_;
    std::vector<QuorumCert> cert_log_;
    std::vector<Block> proposal_log_;
    std::vector<Timeout> timeout_log_;
    std::vector<Vote> vote_log_;
    std::set<std::pair<uint64_t, uint64_t>> sent_fps_;  // exact honest messages (replay rule)
};

// Attack behaviors; composed by listing names comma-separated in the config.
// Strategies react to new observations by queueing injections; they are
// deterministic functions of the observation stream.
class Strategy {
  public:
    virtual ~Strategy() = default;
    virtual void react(const Observed& obs, uint64_t step, std::vector<Injection>& out) = 0;
};

// Recognized names: "passive", "equivocator", "votesplitter". Unknown names
// return nullptr.
std::unique_ptr<Strategy> make_strategy(const std::string& name);

// Fixed injections from a script: pairs of (step, injection). In run mode
// each fires when its step is reached.
class ScriptedStrategy : public Strategy {
  public:
    explicit ScriptedStrategy(std::vector<std::pair<uint64_t, Injection>> plan);
    void react(const Observed& obs, uint64_t step, std::vector<Injection>& out) override;
    const std::vector<std::pair<uint64_t, Injection>>& plan() const { return plan_; }

  private:
    std::vector<std::pair<uint64_t, Injection>> plan_;  // sorted by step
    size_t next_ = 0;
};

}  // namespace moonshot
