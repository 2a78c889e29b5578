#include <algorithm>
#include <set>
#include <vector>

#include "doctest.h"
#include "moonshot/rng.hpp"
#include "moonshot/types.hpp"

using namespace moonshot;

namespace {

QuorumCert qc_of(View view, BlockId block, VoteKind kind, std::vector<ValidatorId> signers) {
    QuorumCert qc;
    qc.view = view;
    qc.block = block;
    qc.kind = kind;
    qc.signers = std::move(signers);
    return qc;
}

Timeout timeout_of(View view, ValidatorId author, QuorumCert lock) {
    Timeout t;
    t.view = view;
    t.author = author;
    t.high_qc = std::move(lock);
    return t;
}

// All size-k subsets of [0, n), as sorted id vectors.
void combinations(uint32_t n, uint32_t k, std::vector<std::vector<ValidatorId>>& out) {
    std::vector<ValidatorId> cur;
    auto rec = [&](auto&& self, uint32_t from) -> void {
        if (cur.size() == k) {
            out.push_back(cur);
            return;
        }
        for (uint32_t i = from; i + (k - cur.size()) <= n; ++i) {
            cur.push_back(i);
            self(self, i + 1);
            cur.pop_back();
        }
    };
    rec(rec, 0);
}

}  // namespace

TEST_CASE("leader is round-robin by view") {
    CHECK(leader(0, 4) == 0);
    CHECK(leader(5, 4) == 1);
    CHECK(leader(7, 7) == 0);
    CHECK(leader(1, 1) == 0);
    for (View v = 0; v < 50; ++v) {
        CHECK(leader(v, 4) == v % 4);
        CHECK(leader(v, 4) == leader(v, 4));  // total + deterministic
    }
}

TEST_CASE("vote kind tags") {
    CHECK(std::string(vote_kind_tag(VoteKind::Normal)) == "n");
    CHECK(std::string(vote_kind_tag(VoteKind::Optimistic)) == "o");
    CHECK(std::string(vote_kind_tag(VoteKind::Fallback)) == "f");
}

TEST_CASE("validate_qc thresholds and signer hygiene") {
    const uint32_t n = 4, quorum = 3;  // f=1
    CHECK(validate_qc(genesis_qc(n), n, quorum));  // bootstrap sentinel, full signer set
    CHECK(validate_qc(qc_of(1, 7, VoteKind::Normal, {0, 1, 2}), n, quorum));
    CHECK_FALSE(validate_qc(qc_of(1, 7, VoteKind::Normal, {0, 0, 1}), n, quorum));
    CHECK_FALSE(validate_qc(qc_of(1, 7, VoteKind::Normal, {0, 1}), n, quorum));
    CHECK_FALSE(validate_qc(qc_of(1, 7, VoteKind::Normal, {0, 1, 2, 3}), n, quorum));
    CHECK_FALSE(validate_qc(qc_of(1, 7, VoteKind::Normal, {0, 1, 4}), n, quorum));  // out of range
    // Weakened threshold accepts f+1.
    CHECK(validate_qc(qc_of(1, 7, VoteKind::Normal, {0, 3}), n, 2));
    CHECK_FALSE(validate_qc(qc_of(1, 7, VoteKind::Normal, {0, 1, 2}), n, 2));
}

TEST_CASE("genesis qc shape") {
    QuorumCert g = genesis_qc(4);
    CHECK(g.view == 0);
    CHECK(g.block == kGenesisId);
    CHECK(g.signers == std::vector<ValidatorId>{0, 1, 2, 3});
}

TEST_CASE("validate_tc counts, view uniformity, embedded qcs") {
    const uint32_t n = 4, quorum = 3;
    QuorumCert g = genesis_qc(n);
    TimeoutCert tc;
    tc.view = 2;
    tc.timeouts = {timeout_of(2, 0, g), timeout_of(2, 1, g), timeout_of(2, 2, g)};
    CHECK(validate_tc(tc, n, quorum));

    TimeoutCert mixed = tc;
    mixed.timeouts[2].view = 3;
    CHECK_FALSE(validate_tc(mixed, n, quorum));

    TimeoutCert low = tc;
    low.timeouts.pop_back();
    CHECK_FALSE(validate_tc(low, n, quorum));

    TimeoutCert dup = tc;
    dup.timeouts[1].author = 0;
    CHECK_FALSE(validate_tc(dup, n, quorum));

    TimeoutCert bad_qc = tc;
    bad_qc.timeouts[0].high_qc.signers = {0, 0, 1};
    CHECK_FALSE(validate_tc(bad_qc, n, quorum));

    TimeoutCert wrong_view = tc;
    wrong_view.view = 3;  // timeouts still say view 2
    CHECK_FALSE(validate_tc(wrong_view, n, quorum));
}

TEST_CASE("validate_wtc accepts f+1 distinct authors") {
    const uint32_t n = 4, f = 1, quorum = 3;
    QuorumCert g = genesis_qc(n);
    WeakTimeoutCert w;
    w.view = 1;
    w.timeouts = {timeout_of(1, 2, g), timeout_of(1, 3, g)};
    CHECK(validate_wtc(w, n, f, quorum));
    w.timeouts.pop_back();
    CHECK_FALSE(validate_wtc(w, n, f, quorum));
    w.timeouts = {timeout_of(1, 2, g), timeout_of(1, 2, g)};
    CHECK_FALSE(validate_wtc(w, n, f, quorum));
}

TEST_CASE("tc_high_qc picks max view, smallest block id on ties") {
    const uint32_t n = 4;
    QuorumCert g = genesis_qc(n);

    TimeoutCert all_genesis;
    all_genesis.view = 1;
    all_genesis.timeouts = {timeout_of(1, 0, g), timeout_of(1, 1, g), timeout_of(1, 2, g)};
    CHECK(tc_high_qc(all_genesis) == g);

    QuorumCert q1 = qc_of(1, 11, VoteKind::Normal, {0, 1, 2});
    QuorumCert q2 = qc_of(2, 22, VoteKind::Normal, {1, 2, 3});
    TimeoutCert spread;
    spread.view = 3;
    spread.timeouts = {timeout_of(3, 0, g), timeout_of(3, 1, q2), timeout_of(3, 2, q1)};
    CHECK(tc_high_qc(spread).view == 2);
    CHECK(tc_high_qc(spread).block == 22);

    QuorumCert b_small = qc_of(3, 5, VoteKind::Normal, {0, 1, 2});
    QuorumCert b_large = qc_of(3, 9, VoteKind::Normal, {1, 2, 3});
    QuorumCert low = qc_of(1, 77, VoteKind::Normal, {0, 1, 3});
    TimeoutCert tie;
    tie.view = 4;
    tie.timeouts = {timeout_of(4, 0, b_large), timeout_of(4, 1, b_small), timeout_of(4, 2, low)};
    CHECK(tc_high_qc(tie).view == 3);
    CHECK(tc_high_qc(tie).block == 5);
}

TEST_CASE("block ids: deterministic, injective at desk scale, genesis sentinel") {
    Block g = genesis_block();
    CHECK(g.id == kGenesisId);
    CHECK(g.height == 0);
    CHECK(g.view == 0);
    CHECK(g.parent == kGenesisId);

    CHECK(block_id(1, 1, kGenesisId, "1:0") == block_id(1, 1, kGenesisId, "1:0"));

    // Distinct (height, view, parent, payload) tuples get distinct ids.
    std::set<BlockId> ids;
    size_t tuples = 0;
    for (Height h = 0; h < 8; ++h)
        for (View v = 0; v < 8; ++v)
            for (BlockId p : {BlockId{0}, BlockId{1}, BlockId{0x3e41fe9322651966}})
                for (const char* pay : {"", "a", "b", "0:1", "1:0"}) {
                    ids.insert(block_id(h, v, p, pay));
                    ++tuples;
                }
    CHECK(ids.size() == tuples);
    CHECK(ids.count(kGenesisId) == 0);  // id 0 is reserved for genesis

    Block b = make_block(1, 1, kGenesisId, "1:0");
    CHECK(b.id == block_id(1, 1, kGenesisId, "1:0"));
}

TEST_CASE("message_src covers every message variant") {
    Block b = make_block(1, 1, kGenesisId, "1:0");
    QuorumCert g = genesis_qc(4);
    Timeout t = timeout_of(1, 2, g);
    TimeoutCert tc;
    tc.view = 1;
    tc.timeouts = {timeout_of(1, 0, g), timeout_of(1, 1, g), timeout_of(1, 2, g)};
    WeakTimeoutCert w;
    w.view = 1;
    w.timeouts = {timeout_of(1, 0, g), timeout_of(1, 1, g)};

    CHECK(message_src(Message{NormalProposal{1, 1, b, g}}) == 1);
    CHECK(message_src(Message{FallbackProposal{2, 2, b, g, tc}}) == 2);
    CHECK(message_src(Message{OptimisticProposal{3, 2, b}}) == 3);
    CHECK(message_src(Message{MsgVote{0, Vote{VoteKind::Normal, b.id, 1, 0}}}) == 0);
    CHECK(message_src(Message{MsgTimeout{2, t}}) == 2);
    CHECK(message_src(Message{MsgQc{1, g}}) == 1);
    CHECK(message_src(Message{MsgTc{0, tc}}) == 0);
    CHECK(message_src(Message{MsgWeakTc{3, w}}) == 3);
}

TEST_CASE("quorum intersection: any two 2f+1 subsets of 3f+1 share >= f+1 members") {
    for (uint32_t f : {1u, 2u, 3u}) {
        const uint32_t n = 3 * f + 1, q = 2 * f + 1;
        std::vector<std::vector<ValidatorId>> subsets;
        combinations(n, q, subsets);
        size_t pairs = 0;
        for (const auto& a : subsets)
            for (const auto& b : subsets) {
                std::vector<ValidatorId> both;
                std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                                      std::back_inserter(both));
                REQUIRE(both.size() >= f + 1);
                ++pairs;
            }
        CHECK(pairs == subsets.size() * subsets.size());
    }
}
