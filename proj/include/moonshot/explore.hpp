#pragma once

#include <optional>
#include <string>
#include <vector>

#include "moonshot/sim.hpp"

namespace moonshot {

// Bounded exhaustive exploration: from the post-bootstrap state, try every
// schedule of at most `depth` events. An event is one of
//   - delivering one pending message (distinct (dst, message) pairs only),
//   - injecting a vocabulary entry that is legal at that state,
//   - firing a timer that would change something.
// Message transport is lossless here; drop/duplicate/seed in `sim` are
// ignored, as are its adversary strategies — the vocabulary is the adversary.
struct ExploreConfig {
    SimConfig sim;
    uint32_t depth = 8;
    std::vector<Injection> vocabulary;
};

struct ExploreReport {
    uint64_t states = 0;  // distinct states visited (fingerprint-deduplicated)
    uint64_t edges = 0;   // events executed, pruned revisits included
    bool complete = false;
    std::optional<Violation> violation;
    std::vector<std::string> path;  // events from bootstrap to the violation

    std::string render() const;
};

ExploreReport explore(const ExploreConfig& cfg);

}  // namespace moonshot
