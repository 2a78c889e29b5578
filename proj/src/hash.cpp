#include "moonshot/hash.hpp"

namespace moonshot {

void hash_block(Fnv& h, const Block& b) {
    h.u64(b.id);
    h.u64(b.height);
    h.u64(b.view);
    h.u64(b.parent);
    h.u64(b.payload.size());
    h.bytes(b.payload.data(), b.payload.size());
}

void hash_vote(Fnv& h, const Vote& v) {
    h.u64(static_cast<uint8_t>(v.kind));
    h.u64(v.block);
    h.u64(v.view);
    h.u64(v.author);
}

void hash_qc(Fnv& h, const QuorumCert& qc) {
    h.u64(qc.view);
    h.u64(qc.block);
    h.u64(static_cast<uint8_t>(qc.kind));
    h.u64(qc.signers.size());
    for (ValidatorId s : qc.signers) h.u64(s);
}

void hash_timeout(Fnv& h, const Timeout& t) {
    h.u64(t.view);
    h.u64(t.author);
    hash_qc(h, t.high_qc);
}

void hash_tc(Fnv& h, const TimeoutCert& tc) {
    h.u64(tc.view);
    h.u64(tc.timeouts.size());
    for (const Timeout& t : tc.timeouts) hash_timeout(h, t);
}

void hash_wtc(Fnv& h, const WeakTimeoutCert& wtc) {
    h.u64(wtc.view);
    h.u64(wtc.timeouts.size());
    for (const Timeout& t : wtc.timeouts) hash_timeout(h, t);
}

void hash_message(Fnv& h, const Message& m) {
    h.u64(m.index());
    h.u64(message_src(m));
    if (const auto* p = std::get_if<NormalProposal>(&m)) {
        h.u64(p->view);
        hash_block(h, p->block);
        hash_qc(h, p->qc);
    } else if (const auto* p = std::get_if<FallbackProposal>(&m)) {
        h.u64(p->view);
        hash_block(h, p->block);
        hash_qc(h, p->qc);
        hash_tc(h, p->tc);
    } else if (const auto* p = std::get_if<OptimisticProposal>(&m)) {
        h.u64(p->view);
        hash_block(h, p->block);
    } else if (const auto* p = std::get_if<MsgVote>(&m)) {
        hash_vote(h, p->vote);
    } else if (const auto* p = std::get_if<MsgTimeout>(&m)) {
        hash_timeout(h, p->timeout);
    } else if (const auto* p = std::get_if<MsgQc>(&m)) {
        hash_qc(h, p->qc);
    } else if (const auto* p = std::get_if<MsgTc>(&m)) {
        hash_tc(h, p->tc);
    } else if (const auto* p = std::get_if<MsgWeakTc>(&m)) {
        hash_wtc(h, p->wtc);
    }
}

std::pair<uint64_t, uint64_t> message_fingerprint(const Message& m) {
    Fnv h;
    hash_message(h, m);
    return h.pair();
}

}  // namespace moonshot
