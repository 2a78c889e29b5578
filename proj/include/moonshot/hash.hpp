#pragma once

#include <utility>

#include "moonshot/rng.hpp"
#include "moonshot/types.hpp"

namespace moonshot {

// Structural hashing of protocol objects into an FNV accumulator; used for
// message fingerprints, dedup sets and exploration state fingerprints.
// Cheaper than hashing canonical encodings because no strings are built.

void hash_block(Fnv& h, const Block& b);
void hash_vote(Fnv& h, const Vote& v);
void hash_qc(Fnv& h, const QuorumCert& qc);
void hash_timeout(Fnv& h, const Timeout& t);
void hash_tc(Fnv& h, const TimeoutCert& tc);
void hash_wtc(Fnv& h, const WeakTimeoutCert& wtc);
void hash_message(Fnv& h, const Message& m);

// Two independently seeded 64-bit digests; collision-safe enough to stand in
// for full equality in dedup sets.
std::pair<uint64_t, uint64_t> message_fingerprint(const Message& m);

}  // namespace moonshot
