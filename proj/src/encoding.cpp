#include "moonshot/encoding.hpp"

#include <charconv>

namespace moonshot {

std::string hex16(BlockId id) {
    static const char* digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[i] = digits[id & 0xf];
        id >>= 4;
    }
    return s;
}

namespace {

void put_u64(std::string& out, uint64_t v) {
    char buf[24];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, end);
}

void put_hex16(std::string& out, BlockId id) { out += hex16(id); }

bool payload_char_ok(char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
           c == ':' || c == '.' || c == '_' || c == '-';
}

struct Cursor {
    std::string_view s;
    size_t& pos;

    [[noreturn]] void fail(const std::string& what) const {
        throw ParseError(what + " at offset " + std::to_string(pos) + " in \"" +
                         std::string(s.substr(0, 200)) + "\"");
    }

    void lit(std::string_view expect) {
        if (s.substr(pos, expect.size()) != expect) fail("expected \"" + std::string(expect) + "\"");
        pos += expect.size();
    }

    bool peek_lit(std::string_view expect) const { return s.substr(pos, expect.size()) == expect; }

    uint64_t u64() {
        uint64_t v = 0;
        auto [ptr, ec] = std::from_chars(s.data() + pos, s.data() + s.size(), v);
        if (ec != std::errc() || ptr == s.data() + pos) fail("expected integer");
        pos = static_cast<size_t>(ptr - s.data());
        return v;
    }

    BlockId id16() {
        if (pos + 16 > s.size()) fail("expected 16 hex digits");
        BlockId v = 0;
        for (size_t i = 0; i < 16; ++i) {
            char c = s[pos + i];
            uint64_t d;
            if (c >= '0' && c <= '9') d = static_cast<uint64_t>(c - '0');
            else if (c >= 'a' && c <= 'f') d = static_cast<uint64_t>(c - 'a' + 10);
            else fail("expected 16 hex digits");
            v = (v << 4) | d;
        }
        pos += 16;
        return v;
    }

    std::string payload() {
        size_t start = pos;
        while (pos < s.size() && payload_char_ok(s[pos])) ++pos;
        return std::string(s.substr(start, pos - start));
    }

    VoteKind kind() {
        if (pos >= s.size()) fail("expected vote kind");
        char c = s[pos++];
        switch (c) {
            case 'n': return VoteKind::Normal;
            case 'o': return VoteKind::Optimistic;
            case 'f': return VoteKind::Fallback;
        }
        fail("expected vote kind n|o|f");
    }
};

}  // namespace

void encode_to(std::string& out, const Block& b) {
    out += "blk(id=";
    put_hex16(out, b.id);
    out += ",h=";
    put_u64(out, b.height);
    out += ",v=";
    put_u64(out, b.view);
    out += ",parent=";
    put_hex16(out, b.parent);
    out += ",payload=";
    out += b.payload;
    out += ')';
}

void encode_to(std::string& out, const Vote& v) {
    out += "vote(kind=";
    out += vote_kind_tag(v.kind);
    out += ",block=";
    put_hex16(out, v.block);
    out += ",view=";
    put_u64(out, v.view);
    out += ",author=";
    put_u64(out, v.author);
    out += ')';
}

void encode_to(std::string& out, const QuorumCert& qc) {
    out += "qc(view=";
    put_u64(out, qc.view);
    out += ",block=";
    put_hex16(out, qc.block);
    out += ",kind=";
    out += vote_kind_tag(qc.kind);
    out += ",signers=[";
    for (size_t i = 0; i < qc.signers.size(); ++i) {
        if (i) out += ',';
        put_u64(out, qc.signers[i]);
    }
    out += "])";
}

void encode_to(std::string& out, const Timeout& t) {
    out += "timeout(view=";
    put_u64(out, t.view);
    out += ",author=";
    put_u64(out, t.author);
    out += ",lock=";
    encode_to(out, t.high_qc);
    out += ')';
}

namespace {

template <class Cert>
void encode_timeout_list(std::string& out, const Cert& c) {
    out += "view=";
    put_u64(out, c.view);
    out += ",timeouts=[";
    for (size_t i = 0; i < c.timeouts.size(); ++i) {
        if (i) out += ',';
        encode_to(out, c.timeouts[i]);
    }
    out += "])";
}

}  // namespace

void encode_to(std::string& out, const TimeoutCert& tc) {
    out += "tc(";
    encode_timeout_list(out, tc);
}

void encode_to(std::string& out, const WeakTimeoutCert& wtc) {
    out += "wtc(";
    encode_timeout_list(out, wtc);
}

void encode_to(std::string& out, const Message& m) {
    struct Enc {
        std::string& out;

        void operator()(const NormalProposal& p) {
            out += "m_prop_n(src=";
            put_u64(out, p.src);
            out += ",view=";
            put_u64(out, p.view);
            out += ",block=";
            encode_to(out, p.block);
            out += ",qc=";
            encode_to(out, p.qc);
            out += ')';
        }
        void operator()(const FallbackProposal& p) {
            out += "m_prop_f(src=";
            put_u64(out, p.src);
            out += ",view=";
            put_u64(out, p.view);
            out += ",block=";
            encode_to(out, p.block);
            out += ",qc=";
            encode_to(out, p.qc);
            out += ",tc=";
            encode_to(out, p.tc);
            out += ')';
        }
        void operator()(const OptimisticProposal& p) {
            out += "m_prop_o(src=";
            put_u64(out, p.src);
            out += ",view=";
            put_u64(out, p.view);
            out += ",block=";
            encode_to(out, p.block);
            out += ')';
        }
        void operator()(const MsgVote& p) {
            out += "m_vote(src=";
            put_u64(out, p.src);
            out += ",vote=";
            encode_to(out, p.vote);
            out += ')';
        }
        void operator()(const MsgTimeout& p) {
            out += "m_timeout(src=";
            put_u64(out, p.src);
            out += ",timeout=";
            encode_to(out, p.timeout);
            out += ')';
        }
        void operator()(const MsgQc& p) {
            out += "m_qc(src=";
            put_u64(out, p.src);
            out += ",qc=";
            encode_to(out, p.qc);
            out += ')';
        }
        void operator()(const MsgTc& p) {
            out += "m_tc(src=";
            put_u64(out, p.src);
            out += ",tc=";
            encode_to(out, p.tc);
            out += ')';
        }
        void operator()(const MsgWeakTc& p) {
            out += "m_wtc(src=";
            put_u64(out, p.src);
            out += ",wtc=";
            encode_to(out, p.wtc);
            out += ')';
        }
    };
    std::visit(Enc{out}, m);
}

std::string encode(const Block& b) { std::string s; encode_to(s, b); return s; }
std::string encode(const Vote& v) { std::string s; encode_to(s, v); return s; }
std::string encode(const QuorumCert& qc) { std::string s; encode_to(s, qc); return s; }
std::string encode(const Timeout& t) { std::string s; encode_to(s, t); return s; }
std::string encode(const TimeoutCert& tc) { std::string s; encode_to(s, tc); return s; }
std::string encode(const WeakTimeoutCert& wtc) { std::string s; encode_to(s, wtc); return s; }
std::string encode(const Message& m) { std::string s; encode_to(s, m); return s; }

Block parse_block(std::string_view s, size_t& pos) {
    Cursor c{s, pos};
    c.lit("blk(id=");
    BlockId id = c.id16();
    c.lit(",h=");
    Height h = c.u64();
    c.lit(",v=");
    View v = c.u64();
    c.lit(",parent=");
    BlockId parent = c.id16();
    c.lit(",payload=");
    std::string payload = c.payload();
    c.lit(")");
    Block b;
    b.id = id;
    b.height = h;
    b.view = v;
    b.parent = parent;
    b.payload = std::move(payload);
    if (b.id != kGenesisId && b.id != block_id(b.height, b.view, b.parent, b.payload))
        c.fail("block id does not match its fields");
    return b;
}

Vote parse_vote(std::string_view s, size_t& pos) {
    Cursor c{s, pos};
    c.lit("vote(kind=");
    Vote v;
    v.kind = c.kind();
    c.lit(",block=");
    v.block = c.id16();
    c.lit(",view=");
    v.view = c.u64();
    c.lit(",author=");
    v.author = static_cast<ValidatorId>(c.u64());
    c.lit(")");
    return v;
}

QuorumCert parse_qc(std::string_view s, size_t& pos) {
    Cursor c{s, pos};
    c.lit("qc(view=");
    QuorumCert qc;
    qc.view = c.u64();
    c.lit(",block=");
    qc.block = c.id16();
    c.lit(",kind=");
    qc.kind = c.kind();
    c.lit(",signers=[");
    if (!c.peek_lit("]")) {
        while (true) {
            qc.signers.push_back(static_cast<ValidatorId>(c.u64()));
            if (c.peek_lit("]")) break;
            c.lit(",");
        }
    }
    c.lit("])");
    return qc;
}

Timeout parse_timeout(std::string_view s, size_t& pos) {
    Cursor c{s, pos};
    c.lit("timeout(view=");
    Timeout t;
    t.view = c.u64();
    c.lit(",author=");
    t.author = static_cast<ValidatorId>(c.u64());
    c.lit(",lock=");
    t.high_qc = parse_qc(s, pos);
    c.lit(")");
    return t;
}

namespace {

template <class Cert>
void parse_timeout_list(std::string_view s, size_t& pos, Cert& out) {
    Cursor c{s, pos};
    c.lit("view=");
    out.view = c.u64();
    c.lit(",timeouts=[");
    if (!c.peek_lit("]")) {
        while (true) {
            out.timeouts.push_back(parse_timeout(s, pos));
            if (c.peek_lit("]")) break;
            c.lit(",");
        }
    }
    c.lit("])");
}

}  // namespace

TimeoutCert parse_tc(std::string_view s, size_t& pos) {
    Cursor c{s, pos};
    c.lit("tc(");
    TimeoutCert tc;
    parse_timeout_list(s, pos, tc);
    return tc;
}

WeakTimeoutCert parse_wtc(std::string_view s, size_t& pos) {
    Cursor c{s, pos};
    c.lit("wtc(");
    WeakTimeoutCert wtc;
    parse_timeout_list(s, pos, wtc);
    return wtc;
}

Message parse_message(std::string_view s, size_t& pos) {
    Cursor c{s, pos};
    if (c.peek_lit("m_prop_n(")) {
        c.lit("m_prop_n(src=");
        NormalProposal p;
        p.src = static_cast<ValidatorId>(c.u64());
        c.lit(",view=");
        p.view = c.u64();
        c.lit(",block=");
        p.block = parse_block(s, pos);
        c.lit(",qc=");
        p.qc = parse_qc(s, pos);
        c.lit(")");
        return p;
    }
    if (c.peek_lit("m_prop_f(")) {
        c.lit("m_prop_f(src=");
        FallbackProposal p;
        p.src = static_cast<ValidatorId>(c.u64());
        c.lit(",view=");
        p.view = c.u64();
        c.lit(",block=");
        p.block = parse_block(s, pos);
        c.lit(",qc=");
        p.qc = parse_qc(s, pos);
        c.lit(",tc=");
        p.tc = parse_tc(s, pos);
        c.lit(")");
        return p;
    }
    if (c.peek_lit("m_prop_o(")) {
        c.lit("m_prop_o(src=");
        OptimisticProposal p;
        p.src = static_cast<ValidatorId>(c.u64());
        c.lit(",view=");
        p.view = c.u64();
        c.lit(",block=");
        p.block = parse_block(s, pos);
        c.lit(")");
        return p;
    }
    if (c.peek_lit("m_vote(")) {
        c.lit("m_vote(src=");
        MsgVote p;
        p.src = static_cast<ValidatorId>(c.u64());
        c.lit(",vote=");
        p.vote = parse_vote(s, pos);
        c.lit(")");
        return p;
    }
    if (c.peek_lit("m_timeout(")) {
        c.lit("m_timeout(src=");
        MsgTimeout p;
        p.src = static_cast<ValidatorId>(c.u64());
        c.lit(",timeout=");
        p.timeout = parse_timeout(s, pos);
        c.lit(")");
        return p;
    }
    if (c.peek_lit("m_qc(")) {
        c.lit("m_qc(src=");
        MsgQc p;
        p.src = static_cast<ValidatorId>(c.u64());
        c.lit(",qc=");
        p.qc = parse_qc(s, pos);
        c.lit(")");
        return p;
    }
    if (c.peek_lit("m_tc(")) {
        c.lit("m_tc(src=");
        MsgTc p;
        p.src = static_cast<ValidatorId>(c.u64());
        c.lit(",tc=");
        p.tc = parse_tc(s, pos);
        c.lit(")");
        return p;
    }
    if (c.peek_lit("m_wtc(")) {
        c.lit("m_wtc(src=");
        MsgWeakTc p;
        p.src = static_cast<ValidatorId>(c.u64());
        c.lit(",wtc=");
        p.wtc = parse_wtc(s, pos);
        c.lit(")");
        return p;
    }
    c.fail("unknown message tag");
}

Message parse_message_line(std::string_view s) {
    size_t pos = 0;
    Message m = parse_message(s, pos);
    if (pos != s.size()) throw ParseError("trailing bytes after message: \"" + std::string(s.substr(pos)) + "\"");
    return m;
}

}  // namespace moonshot
