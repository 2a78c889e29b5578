#include <set>

#include "doctest.h"
#include "moonshot/adversary.hpp"
#include "moonshot/encoding.hpp"
#include "moonshot/hash.hpp"
#include "moonshot/rng.hpp"
#include "support.hpp"

using namespace moonshot;
using namespace testsup;

namespace {

Observed fresh_obs() { return Observed(1, 3, {false, false, false, true}); }

}  // namespace

TEST_CASE("observed: roster bookkeeping") {
    Observed obs = fresh_obs();
    CHECK(obs.n() == 4);
    CHECK(obs.f() == 1);
    CHECK(obs.quorum() == 3);
    CHECK(obs.honest_ids() == std::vector<ValidatorId>{0, 1, 2});
    CHECK(obs.byz_ids() == std::vector<ValidatorId>{3});
    CHECK(obs.honest(0));
    CHECK_FALSE(obs.honest(3));
    CHECK_FALSE(obs.honest(200));  // out of roster: never counts as honest backing
    CHECK(obs.body(kGenesisId) != nullptr);
}

TEST_CASE("observed: logs record each object once, in first-seen order") {
    Observed obs = fresh_obs();
    Block b1 = make_block(1, 1, kGenesisId, "1:0");
    QuorumCert g = genesis_qc(4);

    obs.add(1, NormalProposal{1, 1, b1, g});
    obs.add(1, NormalProposal{1, 1, b1, g});  // resend changes nothing
    CHECK(obs.proposal_log().size() == 1);
    CHECK(obs.cert_log().size() == 1);
    CHECK(obs.cert_at(0) != nullptr);
    CHECK(obs.body(b1.id) != nullptr);

    Vote v{VoteKind::Normal, b1.id, 1, 0};
    obs.add(0, MsgVote{0, v});
    obs.add(0, MsgVote{0, v});
    CHECK(obs.vote_log().size() == 1);

    Timeout t = timeout_of(1, 0, g);
    obs.add(0, MsgTimeout{0, t});
    obs.add(0, MsgTimeout{0, t});
    CHECK(obs.timeout_log().size() == 1);

    // A later certificate for a new view extends the log; a second certificate
    // for an already-logged view does not (first per view wins).
    QuorumCert c1 = qc_of(1, b1.id, VoteKind::Normal, {0, 1, 2});
    obs.add(0, MsgQc{0, c1});
    CHECK(obs.cert_log().size() == 2);
    QuorumCert c1b = qc_of(1, b1.id, VoteKind::Optimistic, {0, 1, 2});
    obs.add(0, MsgQc{0, c1b});
    CHECK(obs.cert_log().size() == 2);
    REQUIRE(obs.cert_at(1) != nullptr);
    CHECK(obs.cert_at(1)->kind == VoteKind::Normal);
}

TEST_CASE("injection legality: honest sources are replay-only") {
    Observed obs = fresh_obs();
    Block b1 = make_block(1, 1, kGenesisId, "1:0");
    Vote v{VoteKind::Normal, b1.id, 1, 0};
    Message sent = MsgVote{0, v};

    CHECK_FALSE(obs.injection_legal(sent));  // never observed
    obs.add(0, sent);
    CHECK(obs.injection_legal(sent));  // byte-exact replay

    // Any mutation of the payload breaks the replay rule.
    Message altered = MsgVote{0, Vote{VoteKind::Normal, b1.id, 2, 0}};
    CHECK_FALSE(obs.injection_legal(altered));
    Message wrong_kind = MsgVote{0, Vote{VoteKind::Fallback, b1.id, 1, 0}};
    CHECK_FALSE(obs.injection_legal(wrong_kind));

    // An honest-src proposal the leader never sent is a forgery even if the
    // certificate inside is common knowledge.
    Message forged_prop = NormalProposal{1, 1, b1, genesis_qc(4)};
    CHECK_FALSE(obs.injection_legal(forged_prop));
    obs.add(1, forged_prop);
    CHECK(obs.injection_legal(forged_prop));
}

TEST_CASE("injection legality: byzantine material is recursively checked") {
    Observed obs = fresh_obs();
    Block b1 = make_block(1, 1, kGenesisId, "1:0");
    QuorumCert g = genesis_qc(4);
    obs.add(1, NormalProposal{1, 1, b1, g});

    SUBCASE("byzantine votes for anything are its own business") {
        CHECK(obs.injection_legal(MsgVote{3, Vote{VoteKind::Normal, b1.id, 1, 3}}));
        CHECK(obs.injection_legal(MsgVote{3, Vote{VoteKind::Optimistic, 0xdeadbeef, 9, 3}}));
    }
    SUBCASE("byzantine relay of an honest vote needs the honest vote to exist") {
        Vote hv{VoteKind::Normal, b1.id, 1, 0};
        CHECK_FALSE(obs.injection_legal(MsgVote{3, hv}));
        obs.add(0, MsgVote{0, hv});
        CHECK(obs.injection_legal(MsgVote{3, hv}));
    }
    SUBCASE("certificates need every honest signer on record") {
        QuorumCert c1 = qc_of(1, b1.id, VoteKind::Normal, {0, 1, 2});
        CHECK_FALSE(obs.injection_legal(MsgQc{3, c1}));
        obs.add(0, MsgVote{0, Vote{VoteKind::Normal, b1.id, 1, 0}});
        obs.add(1, MsgVote{1, Vote{VoteKind::Normal, b1.id, 1, 1}});
        CHECK_FALSE(obs.injection_legal(MsgQc{3, c1}));  // signer 2 still missing
        obs.add(2, MsgVote{2, Vote{VoteKind::Normal, b1.id, 1, 2}});
        CHECK(obs.injection_legal(MsgQc{3, c1}));

        // Kind mismatch between certificate and recorded votes is a forgery.
        QuorumCert c1o = qc_of(1, b1.id, VoteKind::Optimistic, {0, 1, 2});
        CHECK_FALSE(obs.injection_legal(MsgQc{3, c1o}));

        // A quorum that leans on the byzantine seat only needs the honest two.
        QuorumCert lean = qc_of(1, b1.id, VoteKind::Normal, {0, 1, 3});
        CHECK(obs.injection_legal(MsgQc{3, lean}));
    }
    SUBCASE("the genesis certificate is common knowledge") {
        CHECK(obs.injection_legal(MsgQc{3, g}));
    }
    SUBCASE("byzantine timeouts are vetted through their embedded certificate") {
        CHECK(obs.injection_legal(MsgTimeout{3, timeout_of(1, 3, g)}));
        QuorumCert fake = qc_of(1, b1.id, VoteKind::Normal, {0, 1, 2});
        CHECK_FALSE(obs.injection_legal(MsgTimeout{3, timeout_of(1, 3, fake)}));
    }
    SUBCASE("honest timeouts must match the sent record exactly") {
        Timeout t = timeout_of(1, 0, g);
        CHECK_FALSE(obs.injection_legal(MsgTimeout{3, t}));
        obs.add(0, MsgTimeout{0, t});
        CHECK(obs.injection_legal(MsgTimeout{3, t}));
        Timeout wrong_view = timeout_of(2, 0, g);
        CHECK_FALSE(obs.injection_legal(MsgTimeout{3, wrong_view}));
    }
    SUBCASE("proposals from the byzantine seat need a backed certificate") {
        Block zb = make_block(1, 3, kGenesisId, "z");
        CHECK(obs.injection_legal(NormalProposal{3, 3, zb, g}));
        QuorumCert fake = qc_of(2, b1.id, VoteKind::Normal, {0, 1, 2});
        CHECK_FALSE(obs.injection_legal(NormalProposal{3, 3, zb, fake}));
    }
    SUBCASE("optimistic proposals carry no justification and are always legal") {
        Block zb = make_block(19, 7, 0x1234, "junk");
        CHECK(obs.injection_legal(OptimisticProposal{3, 7, zb}));
    }
    SUBCASE("timeout certificates are vetted member by member") {
        Timeout t0 = timeout_of(1, 0, g);
        Timeout t1 = timeout_of(1, 1, g);
        Timeout tz = timeout_of(1, 3, g);
        TimeoutCert tc = tc_of(1, {t0, t1, tz});
        CHECK_FALSE(obs.injection_legal(MsgTc{3, tc}));  // honest members unseen
        obs.add(0, MsgTimeout{0, t0});
        obs.add(1, MsgTimeout{1, t1});
        CHECK(obs.injection_legal(MsgTc{3, tc}));
        CHECK(obs.injection_legal(MsgWeakTc{3, WeakTimeoutCert{1, {t0, tz}}}));
    }
}

TEST_CASE("injected material never counts as honest backing") {
    Observed obs = fresh_obs();
    Block b1 = make_block(1, 1, kGenesisId, "1:0");

    // The adversary publishing its own proposal teaches everyone the body...
    obs.add_injected(NormalProposal{3, 1, b1, genesis_qc(4)});
    CHECK(obs.body(b1.id) != nullptr);
    CHECK(obs.proposal_log().size() == 1);

    // ...but does not whitelist the message for honest-src replay, and an
    // injected vote leaves no trace at all.
    CHECK_FALSE(obs.injection_legal(NormalProposal{1, 1, b1, genesis_qc(4)}));
    obs.add_injected(MsgVote{3, Vote{VoteKind::Normal, b1.id, 1, 0}});
    CHECK_FALSE(obs.injection_legal(MsgVote{3, Vote{VoteKind::Normal, b1.id, 1, 0}}));
    CHECK(obs.vote_log().empty());
}

TEST_CASE("try_build_qc assembles quorums from honest votes plus byzantine seats") {
    Observed obs = fresh_obs();
    Block b1 = make_block(1, 1, kGenesisId, "1:0");

    CHECK_FALSE(obs.try_build_qc(1, VoteKind::Normal, b1.id).has_value());
    obs.add(0, MsgVote{0, Vote{VoteKind::Normal, b1.id, 1, 0}});
    CHECK_FALSE(obs.try_build_qc(1, VoteKind::Normal, b1.id).has_value());  // 2 of 3
    obs.add(1, MsgVote{1, Vote{VoteKind::Normal, b1.id, 1, 1}});

    auto qc = obs.try_build_qc(1, VoteKind::Normal, b1.id);
    REQUIRE(qc.has_value());
    CHECK(qc->view == 1);
    CHECK(qc->block == b1.id);
    CHECK(qc->kind == VoteKind::Normal);
    CHECK(qc->signers == std::vector<ValidatorId>{0, 1, 3});
    CHECK(validate_qc(*qc, 4, 3));

    // Kind segregation: optimistic votes do not help a normal certificate.
    CHECK_FALSE(obs.try_build_qc(1, VoteKind::Optimistic, b1.id).has_value());

    // With all three honest votes the certificate is trimmed to quorum size.
    obs.add(2, MsgVote{2, Vote{VoteKind::Normal, b1.id, 1, 2}});
    auto full = obs.try_build_qc(1, VoteKind::Normal, b1.id);
    REQUIRE(full.has_value());
    CHECK(full->signers.size() == 3);
}

TEST_CASE("try_build_tc needs 2f+1 members and plants the byzantine lock") {
    Observed obs = fresh_obs();
    QuorumCert g = genesis_qc(4);
    QuorumCert claimed = qc_of(0, kGenesisId, VoteKind::Normal, {0, 1, 2, 3});

    CHECK_FALSE(obs.try_build_tc(1, claimed).has_value());
    obs.add(0, MsgTimeout{0, timeout_of(1, 0, g)});
    CHECK_FALSE(obs.try_build_tc(1, claimed).has_value());  // 2 of 3
    obs.add(1, MsgTimeout{1, timeout_of(1, 1, g)});

    auto tc = obs.try_build_tc(1, claimed);
    REQUIRE(tc.has_value());
    CHECK(tc->view == 1);
    CHECK(tc->timeouts.size() == 3);
    CHECK(validate_tc(*tc, 4, 1));
    bool byz_member = false;
    for (const Timeout& t : tc->timeouts)
        if (t.author == 3) {
            byz_member = true;
            CHECK(t.high_qc == claimed);
        }
    CHECK(byz_member);

    // The threshold is always 2f+1, even when the observer was constructed
    // with a weakened effective quorum.
    Observed weak(1, 2, {false, false, false, true});
    CHECK_FALSE(weak.try_build_tc(1, claimed).has_value());
    weak.add(0, MsgTimeout{0, timeout_of(1, 0, g)});
    CHECK_FALSE(weak.try_build_tc(1, claimed).has_value());
}

TEST_CASE("observed fingerprint tracks exactly the legality inputs") {
    auto digest = [](const Observed& o) {
        Fnv h;
        o.fingerprint(h);
        return h.pair();
    };
    Observed a = fresh_obs();
    Observed b = fresh_obs();
    CHECK(digest(a) == digest(b));

    Block b1 = make_block(1, 1, kGenesisId, "1:0");
    Message vote = MsgVote{0, Vote{VoteKind::Normal, b1.id, 1, 0}};
    a.add(0, vote);
    CHECK(digest(a) != digest(b));
    b.add(0, vote);
    CHECK(digest(a) == digest(b));

    a.add(0, MsgTimeout{0, timeout_of(1, 0, genesis_qc(4))});
    CHECK(digest(a) != digest(b));
}

TEST_CASE("strategy factory and scripted injections") {
    CHECK(make_strategy("passive") != nullptr);
    CHECK(make_strategy("random") != nullptr);
    CHECK(make_strategy("equivocator") != nullptr);
    CHECK(make_strategy("votesplitter") != nullptr);
    CHECK(make_strategy("chaos") == nullptr);
    CHECK(make_strategy("") == nullptr);

    Observed obs = fresh_obs();
    Injection early{0, MsgQc{3, genesis_qc(4)}};
    Injection late{1, MsgQc{3, genesis_qc(4)}};
    ScriptedStrategy s({{5, late}, {2, early}});  // out of order on purpose

    std::vector<Injection> out;
    s.react(obs, 1, out);
    CHECK(out.empty());
    s.react(obs, 2, out);
    REQUIRE(out.size() == 1);
    CHECK(out[0].dst == 0);
    s.react(obs, 4, out);
    CHECK(out.size() == 1);
    s.react(obs, 9, out);  // catches up past its step
    REQUIRE(out.size() == 2);
    CHECK(out[1].dst == 1);
    s.react(obs, 50, out);  // plan exhausted, stays quiet
    CHECK(out.size() == 2);
}

TEST_CASE("passive strategy never injects") {
    auto s = make_strategy("passive");
    Observed obs = fresh_obs();
    obs.add(1, NormalProposal{1, 1, make_block(1, 1, kGenesisId, "1:0"), genesis_qc(4)});
    std::vector<Injection> out;
    s->react(obs, 3, out);
    CHECK(out.empty());
}

TEST_CASE("live strategies emit only legal injections on a real schedule") {
    // Feed each strategy a growing observation stream and insist every
    // injection it queues passes the legality boundary it will be held to.
    for (const char* name : {"random", "equivocator", "votesplitter"}) {
        CAPTURE(name);
        auto s = make_strategy(name);
        Observed obs = fresh_obs();
        SplitMix64 rng(7);

        Block b1 = make_block(1, 1, kGenesisId, "1:0");
        QuorumCert g = genesis_qc(4);
        std::vector<Message> feed;
        feed.push_back(NormalProposal{1, 1, b1, g});
        for (ValidatorId v : {0u, 1u, 2u})
            feed.push_back(MsgVote{v, Vote{VoteKind::Normal, b1.id, 1, v}});
        QuorumCert c1 = qc_of(1, b1.id, VoteKind::Normal, {0, 1, 2});
        feed.push_back(MsgQc{0, c1});
        for (ValidatorId v : {0u, 1u, 2u}) feed.push_back(MsgTimeout{v, timeout_of(2, v, c1)});

        std::vector<Injection> out;
        uint64_t step = 0;
        for (const Message& m : feed) {
            obs.add(message_src(m), m);
            s->react(obs, ++step, out);
        }
        CHECK_FALSE(out.empty());
        for (const Injection& inj : out) {
            CAPTURE(encode(inj.msg));
            CHECK(inj.dst < 4);
            CHECK(obs.honest(inj.dst));
            CHECK(obs.injection_legal(inj.msg));
            obs.add_injected(inj.msg);
        }
    }
}
