#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "moonshot/sim.hpp"

namespace moonshot {

struct TraceMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TraceEvent {
    enum class Kind { Start, Deliver, Timer, Inject };
    Kind kind = Kind::Start;
    uint64_t step = 0;
    ValidatorId dst = 0;
    std::optional<Message> msg;  // Deliver / Inject only
    std::string raw;             // the full original line, for byte comparison
};

struct ParsedTrace {
    std::string config_line;
    SimConfig cfg;
    std::vector<TraceEvent> events;
    std::vector<std::string> tail;  // VIOLATION line (if any), then report line
};

ParsedTrace parse_trace(std::istream& in);
ParsedTrace load_trace_file(const std::string& path);

// Re-executes the recorded schedule against fresh replicas and re-renders
// every line of the trace from what actually happened, comparing byte for
// byte with the original; throws TraceMismatch at the first divergence.
RunReport replay_trace(const ParsedTrace& t);

// Adversary scripts: lines of "step=N dst=K msg=<message>" ('#' comments).
std::vector<std::pair<uint64_t, Injection>> load_script_file(const std::string& path);

}  // namespace moonshot
