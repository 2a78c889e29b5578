#include "doctest.h"
#include "moonshot/encoding.hpp"
#include "moonshot/explore.hpp"
#include "support.hpp"

using namespace moonshot;
using namespace testsup;

namespace {

ExploreConfig base_explore(uint32_t depth) {
    ExploreConfig cfg;
    cfg.sim.f = 1;
    cfg.sim.byzantine = {3};
    cfg.depth = depth;
    return cfg;
}

}  // namespace

TEST_CASE("depth zero sees exactly the post-bootstrap state") {
    ExploreReport r = explore(base_explore(0));
    CHECK(r.states == 1);
    CHECK(r.edges == 0);
    CHECK(r.complete);
    CHECK_FALSE(r.violation.has_value());
    CHECK(r.render() == "states=1 edges=0 result=safe");
}

TEST_CASE("small passive explorations: pinned state counts") {
    // Regression pins: any change to handler logic, hashing, or the event
    // menu shows up here first.
    CHECK(explore(base_explore(1)).render() == "states=7 edges=6 result=safe");
    CHECK(explore(base_explore(2)).render() == "states=46 edges=57 result=safe");
    ExploreReport d4 = explore(base_explore(4));
    CHECK(d4.complete);
    CHECK_FALSE(d4.violation.has_value());
    CHECK(d4.render() == "states=910 edges=2151 result=safe");
}

TEST_CASE("transport knobs and strategies are ignored by the explorer") {
    ExploreConfig noisy = base_explore(3);
    noisy.sim.drop = {1, 1};
    noisy.sim.duplicate = {1, 1};
    noisy.sim.seed = 999;
    noisy.sim.adversaries = {"equivocator"};
    CHECK(explore(noisy).render() == explore(base_explore(3)).render());
}

TEST_CASE("exploration is deterministic") {
    ExploreConfig cfg = base_explore(5);
    cfg.vocabulary.push_back({0, MsgQc{3, genesis_qc(4)}});
    cfg.vocabulary.push_back({1, MsgVote{3, Vote{VoteKind::Normal, 0x5b, 1, 3}}});
    ExploreReport a = explore(cfg);
    ExploreReport b = explore(cfg);
    CHECK(a.render() == b.render());
    CHECK(a.complete);
}

TEST_CASE("vocabulary targets are vetted") {
    ExploreConfig cfg = base_explore(2);
    cfg.vocabulary.push_back({7, MsgQc{3, genesis_qc(4)}});
    CHECK_THROWS_AS(explore(cfg), SimError);

    // Entries aimed at the byzantine seat are dead vocabulary, not errors.
    cfg.vocabulary = {{3, MsgQc{3, genesis_qc(4)}}};
    ExploreReport r = explore(cfg);
    CHECK(r.render() == explore(base_explore(2)).render());
}

TEST_CASE("illegal vocabulary stays un-injectable until observations license it") {
    // A byzantine-relayed honest vote only becomes a legal edge after the
    // honest author really votes; the explorer must still terminate cleanly
    // and visit more states than without the vocabulary.
    Block b1 = make_block(1, 1, kGenesisId, "1:0");
    ExploreConfig cfg = base_explore(4);
    cfg.vocabulary.push_back({2, MsgVote{3, Vote{VoteKind::Normal, b1.id, 1, 0}}});
    ExploreReport with = explore(cfg);
    CHECK(with.complete);
    CHECK_FALSE(with.violation.has_value());
    CHECK(with.states > explore(base_explore(4)).states);
}

TEST_CASE("the explorer finds a mutant's divergence and reports the path") {
    // Byzantine validator 2 leads view 2. The vocabulary lets it certify the
    // view-1 block, dangle an optimistic block X, then propose a conflicting
    // normal block Y. A faithful validator refuses the second vote; with the
    // equivocation guard removed it votes for both and the monitor calls the
    // vote-budget breach.
    Block b1 = make_block(1, 1, kGenesisId, "1:0");
    Block x = make_block(2, 2, b1.id, "x");
    Block y = make_block(2, 2, b1.id, "y");
    QuorumCert c1 = qc_of(1, b1.id, VoteKind::Normal, {0, 1, 3});

    ExploreConfig cfg;
    cfg.sim.f = 1;
    cfg.sim.byzantine = {2};
    cfg.depth = 7;
    cfg.vocabulary.push_back({0, MsgQc{2, c1}});
    cfg.vocabulary.push_back({0, OptimisticProposal{2, 2, x}});
    cfg.vocabulary.push_back({0, NormalProposal{2, 2, y, c1}});

    SUBCASE("faithful validators survive the full search") {
        ExploreReport r = explore(cfg);
        CHECK(r.complete);
        CHECK_FALSE(r.violation.has_value());
    }
    SUBCASE("without the equivocation guard the budget breaks") {
        cfg.sim.mutations = kNoEquivocationGuard;
        ExploreReport r = explore(cfg);
        REQUIRE(r.violation.has_value());
        CHECK(r.violation->kind == "vote_budget");
        CHECK_FALSE(r.complete);
        CHECK_FALSE(r.path.empty());
        // The last step of the counterexample is the conflicting proposal.
        CHECK(r.path.back() == "inject(dst=0,msg=" + encode(Message{NormalProposal{2, 2, y, c1}}) +
                                   ")");
        CHECK(r.render().find("result=violation kind=vote_budget") != std::string::npos);
    }
}

TEST_CASE("deeper searches only grow the state count") {
    uint64_t prev = 0;
    for (uint32_t d : {1u, 2u, 3u, 4u, 5u}) {
        ExploreReport r = explore(base_explore(d));
        CHECK(r.states > prev);
        prev = r.states;
        CHECK(r.complete);
    }
}
