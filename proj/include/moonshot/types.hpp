#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

namespace moonshot {

using View = uint64_t;
using Height = uint64_t;
using ValidatorId = uint32_t;
using BlockId = uint64_t;

inline constexpr BlockId kGenesisId = 0;

enum class VoteKind : uint8_t { Normal = 0, Optimistic = 1, Fallback = 2 };

const char* vote_kind_tag(VoteKind k);

// Payloads are opaque transaction stand-ins; honest leaders stamp
// "<author>:<counter>" so every proposed block is unique.
struct Block {
    BlockId id = kGenesisId;
    Height height = 0;
    View view = 0;
    BlockId parent = kGenesisId;
    std::string payload;

    bool operator==(const Block& o) const = default;
};

BlockId block_id(Height height, View view, BlockId parent, const std::string& payload);
Block make_block(Height height, View view, BlockId parent, std::string payload);
Block genesis_block();

struct Vote {
    VoteKind kind = VoteKind::Normal;
    BlockId block = kGenesisId;
    View view = 0;
    ValidatorId author = 0;

    bool operator==(const Vote& o) const = default;
    auto key() const { return std::tuple(view, kind, block); }
};

struct QuorumCert {
    View view = 0;
    BlockId block = kGenesisId;
    VoteKind kind = VoteKind::Normal;
    std::vector<ValidatorId> signers;  // ascending, distinct

    bool operator==(const QuorumCert& o) const = default;
};

QuorumCert genesis_qc(uint32_t n);

struct Timeout {
    View view = 0;
    ValidatorId author = 0;
    QuorumCert high_qc;  // author's lock when the timeout was sent

    bool operator==(const Timeout& o) const = default;
};

struct TimeoutCert {
    View view = 0;
    std::vector<Timeout> timeouts;  // 2f+1, sorted by author

    bool operator==(const TimeoutCert& o) const = default;
};

struct WeakTimeoutCert {
    View view = 0;
    std::vector<Timeout> timeouts;  // f+1, sorted by author

    bool operator==(const WeakTimeoutCert& o) const = default;
};

struct NormalProposal {
    ValidatorId src = 0;
    View view = 0;
    Block block;
    QuorumCert qc;  // certifies block.parent at view-1

    bool operator==(const NormalProposal& o) const = default;
};

struct FallbackProposal {
    ValidatorId src = 0;
    View view = 0;
    Block block;
    QuorumCert qc;  // highest-ranked certificate inside tc
    TimeoutCert tc;

    bool operator==(const FallbackProposal& o) const = default;
};

struct OptimisticProposal {
    ValidatorId src = 0;
    View view = 0;
    Block block;

    bool operator==(const OptimisticProposal& o) const = default;
};

struct MsgVote {
    ValidatorId src = 0;
    Vote vote;

    bool operator==(const MsgVote& o) const = default;
};

struct MsgTimeout {
    ValidatorId src = 0;
    Timeout timeout;

    bool operator==(const MsgTimeout& o) const = default;
};

struct MsgQc {
    ValidatorId src = 0;
    QuorumCert qc;

    bool operator==(const MsgQc& o) const = default;
};

struct MsgTc {
    ValidatorId src = 0;
    TimeoutCert tc;

    bool operator==(const MsgTc& o) const = default;
};

struct MsgWeakTc {
    ValidatorId src = 0;
    WeakTimeoutCert wtc;

    bool operator==(const MsgWeakTc& o) const = default;
};

using Message = std::variant<NormalProposal, FallbackProposal, OptimisticProposal, MsgVote,
                             MsgTimeout, MsgQc, MsgTc, MsgWeakTc>;

ValidatorId message_src(const Message& m);

// Round-robin schedule over n = 3f+1 validators.
ValidatorId leader(View view, uint32_t n);

// A certificate is acceptable iff it carries exactly `quorum` distinct
// in-range signers, or it is the genesis bootstrap certificate (view 0,
// genesis block, all n signers). `quorum` is 2f+1 except under the
// weakened-threshold mutation.
bool validate_qc(const QuorumCert& qc, uint32_t n, uint32_t quorum);

// 2f+1 timeouts, distinct in-range authors, uniform view, valid embedded QCs.
bool validate_tc(const TimeoutCert& tc, uint32_t n, uint32_t quorum);

// f+1 variant of validate_tc.
bool validate_wtc(const WeakTimeoutCert& wtc, uint32_t n, uint32_t f, uint32_t quorum);

// Highest-view embedded QC; ties broken by smallest block id.
const QuorumCert& tc_high_qc(const TimeoutCert& tc);

}  // namespace moonshot
