#include <string>

#include "doctest.h"
#include "moonshot/encoding.hpp"
#include "moonshot/rng.hpp"
#include "moonshot/types.hpp"
#include "support.hpp"

using namespace moonshot;
using namespace testsup;

TEST_CASE("hex16 is fixed-width lowercase") {
    CHECK(hex16(0) == "0000000000000000");
    CHECK(hex16(0x3e41fe9322651966ULL) == "3e41fe9322651966");
    CHECK(hex16(~uint64_t{0}) == "ffffffffffffffff");
    CHECK(hex16(0xABCDEF) == "0000000000abcdef");
}

TEST_CASE("canonical renderings are stable strings") {
    CHECK(encode(genesis_block()) ==
          "blk(id=0000000000000000,h=0,v=0,parent=0000000000000000,payload=)");

    Block b1 = make_block(1, 1, kGenesisId, "1:0");
    CHECK(encode(b1) == "blk(id=" + hex16(b1.id) +
                            ",h=1,v=1,parent=0000000000000000,payload=1:0)");

    CHECK(encode(genesis_qc(4)) ==
          "qc(view=0,block=0000000000000000,kind=n,signers=[0,1,2,3])");

    Vote v{VoteKind::Optimistic, b1.id, 2, 3};
    CHECK(encode(v) == "vote(kind=o,block=" + hex16(b1.id) + ",view=2,author=3)");

    Timeout t = timeout_of(1, 2, genesis_qc(4));
    CHECK(encode(t) ==
          "timeout(view=1,author=2,lock=qc(view=0,block=0000000000000000,kind=n,"
          "signers=[0,1,2,3]))");
}

TEST_CASE("message encodings carry their tag and src") {
    Block b1 = make_block(1, 1, kGenesisId, "1:0");
    std::string s = encode(Message{NormalProposal{1, 1, b1, genesis_qc(4)}});
    CHECK(s.substr(0, 13) == "m_prop_n(src=");
    CHECK(encode(Message{MsgVote{2, Vote{VoteKind::Normal, b1.id, 1, 2}}}).substr(0, 11) ==
          "m_vote(src=");
    // No spaces anywhere: traces split fields on spaces.
    for (char c : s) CHECK(c != ' ');
}

TEST_CASE("encode/parse round-trips on randomized messages") {
    SplitMix64 rng(0xec0dec0de5eedULL);
    for (int i = 0; i < 2000; ++i) {
        const uint32_t n = 4 + 3 * static_cast<uint32_t>(rng.uniform(3));  // 4, 7, 10
        Message m = random_message(rng, n);
        const std::string s = encode(m);
        CAPTURE(s);
        Message back = parse_message_line(s);
        CHECK(back == m);
        CHECK(encode(back) == s);  // canonical: re-encoding is byte-identical
        for (char c : s) CHECK(c != ' ');
    }
}

TEST_CASE("value-level round-trips") {
    SplitMix64 rng(7);
    for (int i = 0; i < 500; ++i) {
        Block b = random_block(rng);
        size_t pos = 0;
        CHECK(parse_block(encode(b), pos) == b);

        QuorumCert qc = random_qc(rng, 7);
        pos = 0;
        CHECK(parse_qc(encode(qc), pos) == qc);

        Timeout t = random_timeout(rng, 4);
        pos = 0;
        CHECK(parse_timeout(encode(t), pos) == t);

        TimeoutCert tc = random_tc(rng, 7, 5);
        pos = 0;
        CHECK(parse_tc(encode(tc), pos) == tc);
    }
}

TEST_CASE("malformed inputs raise ParseError") {
    CHECK_THROWS_AS(parse_message_line(""), ParseError);
    CHECK_THROWS_AS(parse_message_line("nonsense(src=0)"), ParseError);
    CHECK_THROWS_AS(parse_message_line("m_vote(src=0"), ParseError);
    CHECK_THROWS_AS(
        parse_message_line("m_vote(src=0,vote=vote(kind=x,block=0000000000000000,"
                           "view=1,author=0))"),
        ParseError);
    CHECK_THROWS_AS(
        parse_message_line("m_vote(src=0,vote=vote(kind=n,block=zzzzzzzzzzzzzzzz,"
                           "view=1,author=0))"),
        ParseError);
    // Trailing garbage after a complete message.
    std::string good = encode(Message{MsgQc{3, genesis_qc(4)}});
    CHECK_THROWS_AS(parse_message_line(good + "x"), ParseError);

    size_t pos = 0;
    CHECK_THROWS_AS(parse_block("blk(id=00,h=0,v=0,parent=0000000000000000,payload=)", pos),
                    ParseError);  // short hex
}
