/**
 * Copyright 2026 The hsduo Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <algorithm>
#include <functional>

#include "doctest.h"
#include "hsduo/error.h"
#include "hsduo/protocol_core.h"

using namespace hsduo;

namespace {

QcPtr qc_for(KeyRegistry &reg, PhaseTag phase, ViewNumber view, const Digest &block,
             NodeId count) {
    std::vector<Vote> votes;
    for (NodeId i = 0; i < count; i++) votes.push_back(make_vote(reg, i, phase, view, block));
    return std::make_shared<const QuorumCertificate>(make_qc(reg, votes, count));
}

std::vector<std::uint8_t> payload(const char *s) {
    return {s, s + std::char_traits<char>::length(s)};
}

// ancestor walk by parent links, independent of extends()
bool brute_ancestor(const BlockStore &store, const Digest &blk, const Digest &anc) {
    auto b = store.find(blk);
    while (b && !b->is_genesis())
    {
        b = store.find(b->parent);
        if (b && b->hash == anc) return true;
    }
    return false;
}

} // namespace

TEST_CASE("quorum size") {
    CHECK(quorum_size(13, 4) == 9);
    CHECK(quorum_size(4, 1) == 3);
    CHECK(quorum_size(103, 34) == 69);
    CHECK(quorum_size(103, 4) == 99);
    CHECK_THROWS_AS(quorum_size(12, 4), ConfigError);
    CHECK_THROWS_AS(quorum_size(0, 0), ConfigError);
}

TEST_CASE("BFT condition") {
    CHECK(validate_bft_condition(13, 4));
    CHECK(validate_bft_condition(103, 34));
    CHECK_FALSE(validate_bft_condition(12, 4));
    CHECK(validate_bft_condition(1, 0));
    for (size_t n = 1; n <= 60; n++)
        for (size_t f = 0; f <= 25; f++) CHECK(validate_bft_condition(n, f) == (n >= 3 * f + 1));
}

TEST_CASE("round-robin leaders") {
    CHECK(leader_for_view(0, 13) == 0);
    CHECK(leader_for_view(13, 13) == 0);
    CHECK(leader_for_view(7, 103) == 7);
    for (size_t n: {1, 4, 13, 103})
        for (ViewNumber start: {0ull, 1ull, 57ull, 1000003ull})
        {
            std::vector<bool> hit(n, false);
            for (ViewNumber v = start; v < start + n; v++) hit[leader_for_view(v, n)] = true;
            CHECK(std::all_of(hit.begin(), hit.end(), [](bool b) { return b; }));
        }
}

TEST_CASE("quorums intersect in an honest node, exhaustively for n <= 7") {
    for (size_t n = 1; n <= 7; n++)
        for (size_t f = 0; 3 * f + 1 <= n; f++)
        {
            size_t q = quorum_size(n, f);
            std::vector<unsigned> sets;
            for (unsigned m = 0; m < (1u << n); m++)
                if (static_cast<size_t>(__builtin_popcount(m)) == q) sets.push_back(m);
            size_t min_overlap = n;
            for (auto a: sets)
                for (auto b: sets)
                    min_overlap = std::min<size_t>(min_overlap, __builtin_popcount(a & b));
            CHECK(min_overlap >= n - 2 * f);
            CHECK(min_overlap >= f + 1);
        }
}

TEST_CASE("canonical serialization is length-prefixed little-endian") {
    CanonicalWriter w;
    w.uint<std::uint32_t>(0x01020304u);
    const std::uint8_t raw[] = {0xaa, 0xbb};
    w.bytes(raw);
    std::vector<std::uint8_t> expect{4, 0, 0, 0, 4, 3, 2, 1, 2, 0, 0, 0, 0xaa, 0xbb};
    CHECK(w.data() == expect);
}

TEST_CASE("sha256 known answer") {
    CHECK(to_hex(sha256("abc")) ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(to_hex(sha256("")) ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("blocks") {
    Block g = Block::genesis();
    CHECK(g.height == 0);
    CHECK(g.is_genesis());
    CHECK(g.parent == g.hash);

    Block a = Block::make(g, 1, 1, payload("a"));
    CHECK(a.height == 1);
    CHECK(a.parent == g.hash);
    CHECK(a.hash == Block::compute_hash(a.parent, a.height, a.view, a.proposer, a.payload));

    // every field feeds the hash
    CHECK(Block::make(g, 2, 1, payload("a")).hash != a.hash);
    CHECK(Block::make(g, 1, 2, payload("a")).hash != a.hash);
    CHECK(Block::make(g, 1, 1, payload("b")).hash != a.hash);
    CHECK(Block::make(a, 1, 1, payload("a")).hash != a.hash);
    CHECK(Block::make(g, 1, 1, payload("a")).hash == a.hash);
}

TEST_CASE("block store") {
    BlockStore store;
    CHECK(store.size() == 1);
    auto a = store.add(Block::make(*store.genesis(), 1, 1, payload("a")));
    auto again = store.add(Block::make(*store.genesis(), 1, 1, payload("a")));
    CHECK(a == again);
    CHECK(store.size() == 2);
    CHECK(store.get(a->hash) == a);
    CHECK(store.find(sha256("nothing")) == nullptr);
    CHECK_THROWS_AS(store.get(sha256("nothing")), UnknownBlock);
}

TEST_CASE("extends over a hand-built fork") {
    KeyRegistry reg(4);
    BlockStore store;
    auto g = store.genesis();
    auto a = store.add(Block::make(*g, 1, 1, payload("a")));
    auto b1 = store.add(Block::make(*a, 2, 2, payload("b1")));
    auto b2 = store.add(Block::make(*a, 3, 3, payload("b2")));
    auto c = store.add(Block::make(*b1, 4, 0, payload("c")));

    CHECK(extends(*a, *qc_for(reg, PhaseTag::Prepare, 0, g->hash, 3), store));
    CHECK(extends(*b1, *qc_for(reg, PhaseTag::Prepare, 1, a->hash, 3), store));
    CHECK_FALSE(extends(*b1, *qc_for(reg, PhaseTag::Prepare, 3, b2->hash, 3), store));
    CHECK_FALSE(extends(*b2, *qc_for(reg, PhaseTag::Prepare, 2, b1->hash, 3), store));

    std::vector<BlockPtr> all{g, a, b1, b2, c};
    for (const auto &blk: all)
        for (const auto &anc: all)
        {
            auto qc = qc_for(reg, PhaseTag::Prepare, anc->view, anc->hash, 3);
            CHECK(extends(*blk, *qc, store) == brute_ancestor(store, blk->hash, anc->hash));
        }

    Block orphan = Block::make(*c, 9, 1, payload("orphan"));
    orphan.parent = sha256("missing");
    CHECK_THROWS_AS(extends(orphan, g->hash, store), UnknownBlock);
    CHECK_THROWS_AS(extends(*c, sha256("missing"), store), UnknownBlock);
}

TEST_CASE("votes and certificates") {
    KeyRegistry reg(13);
    BlockStore store;
    auto a = store.add(Block::make(*store.genesis(), 1, 1, payload("a")));
    Vote v = make_vote(reg, 5, PhaseTag::Prepare, 1, a->hash);
    CHECK(verify_vote(reg, v));
    Vote w = v;
    w.view = 2;
    CHECK_FALSE(verify_vote(reg, w));
    w = v;
    w.voter = 6;
    CHECK_FALSE(verify_vote(reg, w));

    auto qc = qc_for(reg, PhaseTag::PreCommit, 1, a->hash, 9);
    CHECK(qc->signers.size() == 9);
    CHECK(verify_qc(reg, *qc, 9));
    CHECK_FALSE(verify_qc(reg, *qc, 10));
    auto bad = *qc;
    bad.view = 2;
    CHECK_FALSE(verify_qc(reg, bad, 9));
    bad = *qc;
    bad.phase = PhaseTag::Commit;
    CHECK_FALSE(verify_qc(reg, bad, 9));
    bad = *qc;
    bad.signers.pop_back();
    CHECK_FALSE(verify_qc(reg, bad, 9));

    auto gqc = make_genesis_qc(reg, store);
    CHECK(gqc.view == 0);
    CHECK(gqc.block_hash == store.genesis()->hash);
    CHECK(verify_qc(reg, gqc, 13));
}

TEST_CASE("make_qc error taxonomy") {
    KeyRegistry reg(13);
    Digest b = sha256("b");
    std::vector<Vote> votes;
    for (NodeId i = 0; i < 9; i++) votes.push_back(make_vote(reg, i, PhaseTag::Prepare, 4, b));
    CHECK_NOTHROW(make_qc(reg, votes, 9));

    auto mixed = votes;
    mixed[2] = make_vote(reg, 2, PhaseTag::Prepare, 5, b);
    CHECK_THROWS_AS(make_qc(reg, mixed, 9), MixedVoteSet);
    mixed = votes;
    mixed[2] = make_vote(reg, 2, PhaseTag::PreCommit, 4, b);
    CHECK_THROWS_AS(make_qc(reg, mixed, 9), MixedVoteSet);

    auto dup = votes;
    dup[8] = votes[3];
    CHECK_THROWS_AS(make_qc(reg, dup, 9), DuplicateVote);

    auto few = votes;
    few.pop_back();
    CHECK_THROWS_AS(make_qc(reg, few, 9), InsufficientQuorum);
    CHECK_THROWS_AS(make_qc(reg, {}, 9), InsufficientQuorum);

    auto forged = votes;
    forged[0].sig = reg.sign(0, sha256("unrelated"));
    CHECK_THROWS_AS(make_qc(reg, forged, 9), InvalidSignature);
    forged = votes;
    forged[0].sig.nonce ^= 1;
    CHECK_THROWS_AS(make_qc(reg, forged, 9), InvalidSignature);
    forged = votes;
    forged[0].voter = 12;   // signature belongs to node 0
    CHECK_THROWS_AS(make_qc(reg, forged, 9), InvalidSignature);
}

TEST_CASE("safety state only moves forward") {
    KeyRegistry reg(4);
    Digest b = sha256("b");
    SafetyState s;
    s.update_high(qc_for(reg, PhaseTag::Prepare, 5, b, 3));
    CHECK(s.high_view() == 5);
    s.update_high(qc_for(reg, PhaseTag::Prepare, 2, b, 3));
    CHECK(s.high_view() == 5);

    s.update_lock(qc_for(reg, PhaseTag::PreCommit, 3, b, 3));
    CHECK(s.locked_view() == 3);
    SafetyState before = s;
    s.update_lock(qc_for(reg, PhaseTag::PreCommit, 5, b, 3));
    CHECK(s.locked_view() == 5);
    CHECK(safety_monotone(before, s));
    CHECK_FALSE(safety_monotone(s, before));

    SafetyState lagging = s;
    lagging.update_lock(qc_for(reg, PhaseTag::PreCommit, 9, b, 3));
    CHECK_FALSE(safety_monotone(s, lagging));   // lock above high_qc

    SafetyState voted = s;
    voted.last_voted_view = 7;
    CHECK(safety_monotone(s, voted));
    CHECK_FALSE(safety_monotone(voted, s));
}

TEST_CASE("SafeNode rule") {
    KeyRegistry reg(4);
    BlockStore store;
    auto g = store.genesis();
    auto a = store.add(Block::make(*g, 1, 1, payload("a")));
    auto locked = store.add(Block::make(*a, 3, 3, payload("locked")));
    auto other = store.add(Block::make(*a, 2, 2, payload("other")));

    SafetyState s;
    s.locked_qc = qc_for(reg, PhaseTag::PreCommit, 3, locked->hash, 3);
    s.high_qc = s.locked_qc;

    auto child = store.add(Block::make(*locked, 5, 1, payload("child")));
    auto rival = store.add(Block::make(*other, 5, 1, payload("rival")));

    // liveness branch: newer justify overrides the lock
    CHECK(safe_node(*rival, *qc_for(reg, PhaseTag::Prepare, 5, other->hash, 3), s, store));
    // safety branch: proposal extends the locked block
    CHECK(safe_node(*child, *qc_for(reg, PhaseTag::Prepare, 3, locked->hash, 3), s, store));
    // neither
    CHECK_FALSE(safe_node(*rival, *qc_for(reg, PhaseTag::Prepare, 2, other->hash, 3), s, store));
    // no lock: vacuously safe
    CHECK(safe_node(*rival, *qc_for(reg, PhaseTag::Prepare, 2, other->hash, 3), SafetyState{},
                    store));
}
