#pragma once

// Shared builders and randomized generators for the test suites. Generators
// draw from SplitMix64 so every failure reproduces from the seed alone, and
// payloads stay inside the canonical-encoding charset.

#include <string>
#include <vector>

#include "moonshot/rng.hpp"
#include "moonshot/types.hpp"

namespace testsup {

using namespace moonshot;

inline QuorumCert qc_of(View view, BlockId block, VoteKind kind,
                        std::vector<ValidatorId> signers) {
    QuorumCert qc;
    qc.view = view;
    qc.block = block;
    qc.kind = kind;
    qc.signers = std::move(signers);
    return qc;
}

inline Timeout timeout_of(View view, ValidatorId author, QuorumCert lock) {
    Timeout t;
    t.view = view;
    t.author = author;
    t.high_qc = std::move(lock);
    return t;
}

inline TimeoutCert tc_of(View view, std::vector<Timeout> timeouts) {
    TimeoutCert tc;
    tc.view = view;
    tc.timeouts = std::move(timeouts);
    return tc;
}

inline std::string random_payload(SplitMix64& rng) {
    static const char kChars[] =
        "0123456789abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ:._-";
    const size_t len = rng.uniform(9);  // empty allowed
    std::string s;
    for (size_t i = 0; i < len; ++i) s += kChars[rng.uniform(sizeof(kChars) - 1)];
    return s;
}

inline Block random_block(SplitMix64& rng) {
    return make_block(rng.uniform(6), rng.uniform(8), rng.next(), random_payload(rng));
}

inline VoteKind random_kind(SplitMix64& rng) {
    return static_cast<VoteKind>(rng.uniform(3));
}

inline Vote random_vote(SplitMix64& rng, uint32_t n) {
    Vote v;
    v.kind = random_kind(rng);
    v.block = rng.next();
    v.view = rng.uniform(8);
    v.author = static_cast<ValidatorId>(rng.uniform(n));
    return v;
}

// Sorted distinct signer subset of the requested size.
inline std::vector<ValidatorId> random_signers(SplitMix64& rng, uint32_t n, uint32_t count) {
    std::vector<ValidatorId> all(n);
    for (uint32_t i = 0; i < n; ++i) all[i] = i;
    for (uint32_t i = 0; i < count; ++i) {
        uint32_t j = i + static_cast<uint32_t>(rng.uniform(n - i));
        std::swap(all[i], all[j]);
    }
    all.resize(count);
    std::sort(all.begin(), all.end());
    return all;
}

inline QuorumCert random_qc(SplitMix64& rng, uint32_t n) {
    return qc_of(rng.uniform(8), rng.next(), random_kind(rng),
                 random_signers(rng, n, 1 + static_cast<uint32_t>(rng.uniform(n))));
}

inline Timeout random_timeout(SplitMix64& rng, uint32_t n) {
    return timeout_of(rng.uniform(8), static_cast<ValidatorId>(rng.uniform(n)),
                      random_qc(rng, n));
}

inline TimeoutCert random_tc(SplitMix64& rng, uint32_t n, uint32_t count) {
    TimeoutCert tc;
    tc.view = rng.uniform(8);
    for (ValidatorId a : random_signers(rng, n, count))
        tc.timeouts.push_back(timeout_of(tc.view, a, random_qc(rng, n)));
    return tc;
}

inline Message random_message(SplitMix64& rng, uint32_t n) {
    const ValidatorId src = static_cast<ValidatorId>(rng.uniform(n));
    switch (rng.uniform(8)) {
        case 0: return NormalProposal{src, rng.uniform(8), random_block(rng), random_qc(rng, n)};
        case 1: {
            TimeoutCert tc = random_tc(rng, n, 3);
            return FallbackProposal{src, tc.view + 1, random_block(rng), random_qc(rng, n), tc};
        }
        case 2: return OptimisticProposal{src, rng.uniform(8), random_block(rng)};
        case 3: return MsgVote{src, random_vote(rng, n)};
        case 4: return MsgTimeout{src, random_timeout(rng, n)};
        case 5: return MsgQc{src, random_qc(rng, n)};
        case 6: return MsgTc{src, random_tc(rng, n, 3)};
        default: {
            TimeoutCert tc = random_tc(rng, n, 2);
            WeakTimeoutCert w;
            w.view = tc.view;
            w.timeouts = tc.timeouts;
            return MsgWeakTc{src, w};
        }
    }
}

}  // namespace testsup
