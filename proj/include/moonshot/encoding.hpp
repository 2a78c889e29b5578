#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "moonshot/types.hpp"

namespace moonshot {

// Canonical single-line text encodings. One rendering per value: fields in
// fixed order, lists sorted by their natural key, block ids as 16 lowercase
// hex digits. These strings are the wire format of traces, scripted adversary
// files, and violation details, and they parse back losslessly.

struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

std::string encode(const Block& b);
std::string encode(const Vote& v);
std::string encode(const QuorumCert& qc);
std::string encode(const Timeout& t);
std::string encode(const TimeoutCert& tc);
std::string encode(const WeakTimeoutCert& wtc);
std::string encode(const Message& m);

void encode_to(std::string& out, const Block& b);
void encode_to(std::string& out, const Vote& v);
void encode_to(std::string& out, const QuorumCert& qc);
void encode_to(std::string& out, const Timeout& t);
void encode_to(std::string& out, const TimeoutCert& tc);
void encode_to(std::string& out, const WeakTimeoutCert& wtc);
void encode_to(std::string& out, const Message& m);

std::string hex16(BlockId id);

// Each parse_* consumes one value from pos onward and leaves pos just past it.
Block parse_block(std::string_view s, size_t& pos);
Vote parse_vote(std::string_view s, size_t& pos);
QuorumCert parse_qc(std::string_view s, size_t& pos);
Timeout parse_timeout(std::string_view s, size_t& pos);
TimeoutCert parse_tc(std::string_view s, size_t& pos);
WeakTimeoutCert parse_wtc(std::string_view s, size_t& pos);
Message parse_message(std::string_view s, size_t& pos);

Message parse_message_line(std::string_view s);

}  // namespace moonshot
