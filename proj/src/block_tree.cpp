#include "moonshot/block_tree.hpp"

#include <algorithm>

#include "moonshot/hash.hpp"

namespace moonshot {

BlockTree::BlockTree() { store(genesis_block()); }

const Block* BlockTree::block(BlockId id) const {
    auto it = nodes_.find(id);
    return it == nodes_.end() ? nullptr : &it->second;
}

const std::vector<BlockId>* BlockTree::children(BlockId id) const {
    auto it = children_.find(id);
    return it == children_.end() ? nullptr : &it->second;
}

void BlockTree::store(const Block& b) {
    nodes_.emplace(b.id, b);
    if (b.id != kGenesisId) children_[b.parent].push_back(b.id);
    auto pc = pending_certs_.find(b.id);
    if (pc != pending_certs_.end()) {
        std::vector<QuorumCert> waiting = std::move(pc->second);
        pending_certs_.erase(pc);
        for (QuorumCert& qc : waiting) record_certified(qc);
    }
}

BlockTree::Insert BlockTree::insert(const Block& b) {
    if (contains(b.id)) return Insert::Duplicate;
    auto parent = nodes_.find(b.parent);
    if (parent == nodes_.end()) {
        auto& bucket = orphans_[b.parent];
        if (std::find(bucket.begin(), bucket.end(), b) == bucket.end()) bucket.push_back(b);
        return Insert::Orphaned;
    }
    if (b.height != parent->second.height + 1 || b.view <= parent->second.view)
        return Insert::Malformed;
    store(b);
    flush_orphans_of(b.id);
    return Insert::Stored;
}

void BlockTree::flush_orphans_of(BlockId parent) {
    auto it = orphans_.find(parent);
    if (it == orphans_.end()) return;
    std::vector<Block> waiting = std::move(it->second);
    orphans_.erase(it);
    const Block& p = nodes_.at(parent);
    for (const Block& b : waiting) {
        if (contains(b.id)) continue;
        if (b.height != p.height + 1 || b.view <= p.view) continue;
        store(b);
        flush_orphans_of(b.id);
    }
}

bool BlockTree::is_ancestor(BlockId ancestor, BlockId descendant) const {
    auto a = nodes_.find(ancestor);
    auto d = nodes_.find(descendant);
    if (a == nodes_.end() || d == nodes_.end()) return false;
    Height target = a->second.height;
    const Block* cur = &d->second;
    while (cur->height > target) {
        auto next = nodes_.find(cur->parent);
        if (next == nodes_.end()) return false;
        cur = &next->second;
    }
    return cur->id == ancestor;
}

void BlockTree::record_certified(const QuorumCert& qc) {
    if (!contains(qc.block)) {
        auto& bucket = pending_certs_[qc.block];
        for (const QuorumCert& q : bucket)
            if (q.view == qc.view && q.kind == qc.kind) return;
        bucket.push_back(qc);
        return;
    }
    auto& bucket = certs_[qc.block];
    for (const QuorumCert& q : bucket)
        if (q.view == qc.view && q.kind == qc.kind) return;
    bucket.push_back(qc);
    attached_.push_back(qc);
}

bool BlockTree::has_cert(BlockId id, View view) const {
    auto it = certs_.find(id);
    if (it == certs_.end()) return false;
    for (const QuorumCert& q : it->second)
        if (q.view == view) return true;
    return false;
}

std::vector<View> BlockTree::cert_views(BlockId id) const {
    std::vector<View> out;
    auto it = certs_.find(id);
    if (it == certs_.end()) return out;
    for (const QuorumCert& q : it->second) out.push_back(q.view);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

const std::vector<QuorumCert>* BlockTree::certs_of(BlockId id) const {
    auto it = certs_.find(id);
    return it == certs_.end() ? nullptr : &it->second;
}

std::vector<QuorumCert> BlockTree::drain_attached() {
    std::vector<QuorumCert> out = std::move(attached_);
    attached_.clear();
    return out;
}

void BlockTree::fingerprint(Fnv& h) const {
    h.u64(nodes_.size());
    for (const auto& [id, b] : nodes_) hash_block(h, b);
    h.u64(certs_.size());
    for (const auto& [id, qcs] : certs_) {
        h.u64(id);
        h.u64(qcs.size());
        for (const QuorumCert& q : qcs) hash_qc(h, q);
    }
    h.u64(orphans_.size());
    for (const auto& [parent, blocks] : orphans_) {
        h.u64(parent);
        h.u64(blocks.size());
        for (const Block& b : blocks) hash_block(h, b);
    }
    h.u64(pending_certs_.size());
    for (const auto& [id, qcs] : pending_certs_) {
        h.u64(id);
        h.u64(qcs.size());
        for (const QuorumCert& q : qcs) hash_qc(h, q);
    }
    h.u64(attached_.size());
    for (const QuorumCert& q : attached_) hash_qc(h, q);
}

}  // namespace moonshot
