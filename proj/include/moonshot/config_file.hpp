#pragma once

#include <string>

#include "moonshot/sim.hpp"

namespace moonshot {

// Simulation configs as "key = value" lines ('#' starts a comment). Every key
// has a SimConfig default, so an empty file is a valid config; an unknown key
// or a malformed value is a SimError, never a silent skip.
//
//   f = 1
//   byzantine = [3]
//   seed = 42
//   max_steps = 2000
//   drop_probability = 1/10
//   duplicate_probability = 0.1
//   adversary_strategy = equivocator,votesplitter
//   timer_policy = random          # or idle_only
//   mutations = [no_lock_check]

SimConfig load_config_file(const std::string& path);
SimConfig parse_config_text(const std::string& text);

// One key applied onto cfg; shared with trace headers, which carry the same
// keys in "key=value" tokens.
void apply_config_kv(SimConfig& cfg, const std::string& key, const std::string& value);

// "p/q", an integer, or a decimal such as 0.125 — all converted exactly.
Rational parse_rational(const std::string& s);

}  // namespace moonshot
