#pragma once

#include <map>
#include <vector>

#include "moonshot/types.hpp"

namespace moonshot {

class Fnv;

// Parent-linked block storage with orphan buffering. Blocks whose parent has
// not arrived wait unlinked; certificates for unknown blocks wait likewise and
// attach when the block shows up. Both buffers flush recursively.
class BlockTree {
  public:
    BlockTree();

    enum class Insert { Stored, Duplicate, Orphaned, Malformed };

    Insert insert(const Block& b);

    bool contains(BlockId id) const { return nodes_.count(id) != 0; }
    const Block* block(BlockId id) const;
    const std::vector<BlockId>* children(BlockId id) const;

    // Reflexive ancestry over stored blocks; false when either block is
    // missing or the walk crosses an unlinked gap.
    bool is_ancestor(BlockId ancestor, BlockId descendant) const;

    // Deduplicates on (view, kind, block). Unknown block: buffered.
    void record_certified(const QuorumCert& qc);

    bool has_cert(BlockId id, View view) const;
    // Distinct views at which `id` is certified (any kind), ascending.
    std::vector<View> cert_views(BlockId id) const;
    const std::vector<QuorumCert>* certs_of(BlockId id) const;

    // Certificates attached (block known) since the last drain, in attach
    // order; the caller runs its commit rule over them.
    std::vector<QuorumCert> drain_attached();

    size_t size() const { return nodes_.size(); }
    const std::map<BlockId, Block>& blocks() const { return nodes_; }
    const std::map<BlockId, std::vector<QuorumCert>>& certified() const { return certs_; }

    // Hashes linked blocks, certificates and both orphan buffers: trees that
    // differ only in undelivered-parent limbo still compare as different.
    void fingerprint(Fnv& h) const;

  private:
    void store(const Block& b);
    void flush_orphans_of(BlockId parent);

    std::map<BlockId, Block> nodes_;
    std::map<BlockId, std::vector<BlockId>> children_;
    std::map<BlockId, std::vector<QuorumCert>> certs_;
    std::map<BlockId, std::vector<Block>> orphans_;        // keyed by missing parent
    std::map<BlockId, std::vector<QuorumCert>> pending_certs_;  // keyed by missing block
    std::vector<QuorumCert> attached_;
};

}  // namespace moonshot
