#include "moonshot/types.hpp"

#include <algorithm>

#include "moonshot/rng.hpp"

namespace moonshot {

const char* vote_kind_tag(VoteKind k) {
    switch (k) {
        case VoteKind::Normal: return "n";
        case VoteKind::Optimistic: return "o";
        case VoteKind::Fallback: return "f";
    }
    return "?";
}

BlockId block_id(Height height, View view, BlockId parent, const std::string& payload) {
    Fnv h;
    h.u64(height);
    h.u64(view);
    h.u64(parent);
    h.bytes(payload.data(), payload.size());
    BlockId id = h.value();
    return id == kGenesisId ? 1 : id;
}

Block make_block(Height height, View view, BlockId parent, std::string payload) {
    Block b;
    b.height = height;
    b.view = view;
    b.parent = parent;
    b.payload = std::move(payload);
    b.id = block_id(b.height, b.view, b.parent, b.payload);
    return b;
}

Block genesis_block() {
    Block g;
    g.id = kGenesisId;
    g.height = 0;
    g.view = 0;
    g.parent = kGenesisId;
    return g;
}

QuorumCert genesis_qc(uint32_t n) {
    QuorumCert qc;
    qc.view = 0;
    qc.block = kGenesisId;
    qc.kind = VoteKind::Normal;
    qc.signers.resize(n);
    for (uint32_t i = 0; i < n; ++i) qc.signers[i] = i;
    return qc;
}

ValidatorId message_src(const Message& m) {
    return std::visit([](const auto& v) { return v.src; }, m);
}

ValidatorId leader(View view, uint32_t n) {
    return static_cast<ValidatorId>(view % n);
}

namespace {

bool distinct_ascending_in_range(const std::vector<ValidatorId>& ids, uint32_t n) {
    for (size_t i = 0; i < ids.size(); ++i) {
        if (ids[i] >= n) return false;
        if (i > 0 && ids[i] <= ids[i - 1]) return false;
    }
    return true;
}

}  // namespace

bool validate_qc(const QuorumCert& qc, uint32_t n, uint32_t quorum) {
    if (!distinct_ascending_in_range(qc.signers, n)) return false;
    if (qc.view == 0 && qc.block == kGenesisId && qc.signers.size() == n) return true;
    return qc.signers.size() == quorum;
}

bool validate_tc(const TimeoutCert& tc, uint32_t n, uint32_t quorum) {
    if (tc.timeouts.size() != 2 * ((n - 1) / 3) + 1) return false;
    ValidatorId prev = 0;
    bool first = true;
    for (const Timeout& t : tc.timeouts) {
        if (t.view != tc.view) return false;
        if (t.author >= n) return false;
        if (!first && t.author <= prev) return false;
        prev = t.author;
        first = false;
        if (!validate_qc(t.high_qc, n, quorum)) return false;
    }
    return true;
}

bool validate_wtc(const WeakTimeoutCert& wtc, uint32_t n, uint32_t f, uint32_t quorum) {
    if (wtc.timeouts.size() != f + 1) return false;
    ValidatorId prev = 0;
    bool first = true;
    for (const Timeout& t : wtc.timeouts) {
        if (t.view != wtc.view) return false;
        if (t.author >= n) return false;
        if (!first && t.author <= prev) return false;
        prev = t.author;
        first = false;
        if (!validate_qc(t.high_qc, n, quorum)) return false;
    }
    return true;
}

const QuorumCert& tc_high_qc(const TimeoutCert& tc) {
    const QuorumCert* best = &tc.timeouts.front().high_qc;
    for (const Timeout& t : tc.timeouts) {
        const QuorumCert& q = t.high_qc;
        if (q.view > best->view || (q.view == best->view && q.block < best->block)) best = &q;
    }
    return *best;
}

}  // namespace moonshot
