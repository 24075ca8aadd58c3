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
#include <string>

#include "hsduo/error.h"
#include "hsduo/protocol_core.h"

namespace hsduo {

bool validate_bft_condition(size_t n, size_t f) {
    return n >= 1 && n >= 3 * f + 1;
}

size_t quorum_size(size_t n, size_t f) {
    if (!validate_bft_condition(n, f))
        throw ConfigError("n=" + std::to_string(n) + ", f=" +
                          std::to_string(f) + " violates n >= 3f+1");
    return n - f;
}

NodeId leader_for_view(ViewNumber view, size_t n) {
    return static_cast<NodeId>(view % n);
}

Digest Block::compute_hash(const Digest &parent, std::uint64_t height,
                           ViewNumber view, NodeId proposer,
                           std::span<const std::uint8_t> payload) {
    return CanonicalWriter()
        .digest(parent)
        .uint(height)
        .uint(view)
        .uint(proposer)
        .bytes(payload)
        .hash();
}

Block Block::make(const Block &parent, ViewNumber view, NodeId proposer,
                  std::vector<std::uint8_t> payload) {
    Block b;
    b.parent = parent.hash;
    b.height = parent.height + 1;
    b.view = view;
    b.proposer = proposer;
    b.payload = std::move(payload);
    b.hash = compute_hash(b.parent, b.height, b.view, b.proposer, b.payload);
    return b;
}

Block Block::genesis() {
    static const std::string tag = "genesis";
    Block b;
    b.payload.assign(tag.begin(), tag.end());
    b.hash = compute_hash(Digest{}, 0, 0, 0, b.payload);
    b.parent = b.hash;
    return b;
}

BlockStore::BlockStore() {
    genesis_ = add(Block::genesis());
}

BlockPtr BlockStore::add(Block blk) {
    auto it = blocks.find(blk.hash);
    if (it != blocks.end()) return it->second;
    auto ptr = std::make_shared<const Block>(std::move(blk));
    blocks.emplace(ptr->hash, ptr);
    return ptr;
}

BlockPtr BlockStore::find(const Digest &hash) const {
    auto it = blocks.find(hash);
    return it == blocks.end() ? nullptr : it->second;
}

const BlockPtr &BlockStore::get(const Digest &hash) const {
    auto it = blocks.find(hash);
    if (it == blocks.end())
        throw UnknownBlock("unknown block " + to_hex(hash).substr(0, 16));
    return it->second;
}

std::string_view to_string(PhaseTag p) {
    switch (p)
    {
        case PhaseTag::Prepare: return "prepare";
        case PhaseTag::PreCommit: return "pre-commit";
        case PhaseTag::Commit: return "commit";
        case PhaseTag::Decide: return "decide";
        case PhaseTag::NewView: return "new-view";
    }
    return "?";
}

Digest vote_digest(PhaseTag phase, ViewNumber view, const Digest &block_hash) {
    return CanonicalWriter()
        .uint(static_cast<std::uint8_t>(phase))
        .uint(view)
        .digest(block_hash)
        .hash();
}

Vote make_vote(KeyRegistry &reg, NodeId voter, PhaseTag phase,
               ViewNumber view, const Digest &block_hash) {
    return Vote{phase, view, block_hash, voter,
                reg.sign(voter, vote_digest(phase, view, block_hash))};
}

bool verify_vote(const KeyRegistry &reg, const Vote &vote,
                 const Digest &expected) {
    return vote.sig.signer == vote.voter && vote.sig.digest == expected &&
           reg.verify(vote.sig);
}

bool verify_vote(const KeyRegistry &reg, const Vote &vote) {
    return verify_vote(reg, vote,
                       vote_digest(vote.phase, vote.view, vote.block_hash));
}

QuorumCertificate make_qc(const KeyRegistry &reg, std::span<const Vote> votes,
                          size_t quorum) {
    if (votes.empty())
        throw InsufficientQuorum("no votes");
    const auto &first = votes.front();
    for (const auto &v: votes)
        if (v.phase != first.phase || v.view != first.view ||
            v.block_hash != first.block_hash)
            throw MixedVoteSet("votes disagree on (phase, view, block)");
    auto expected = vote_digest(first.phase, first.view, first.block_hash);
    std::vector<SigToken> tokens;
    tokens.reserve(votes.size());
    for (const auto &v: votes)
    {
        if (v.sig.signer != v.voter || v.sig.digest != expected)
            throw InvalidSignature("vote by node " + std::to_string(v.voter) +
                                   " is not signed over its content");
        tokens.push_back(v.sig);
    }
    QuorumCertificate qc;
    qc.phase = first.phase;
    qc.view = first.view;
    qc.block_hash = first.block_hash;
    qc.agg = aggregate(reg, tokens, quorum);
    qc.signers = qc.agg.signers;
    return qc;
}

bool verify_qc(const KeyRegistry &reg, const QuorumCertificate &qc,
               size_t quorum, const Digest &expected) {
    return qc.agg.digest == expected && qc.signers == qc.agg.signers &&
           verify_aggregate(reg, qc.agg, quorum);
}

bool verify_qc(const KeyRegistry &reg, const QuorumCertificate &qc,
               size_t quorum) {
    return verify_qc(reg, qc, quorum,
                     vote_digest(qc.phase, qc.view, qc.block_hash));
}

QuorumCertificate make_genesis_qc(KeyRegistry &reg, const BlockStore &store) {
    const auto &g = store.genesis()->hash;
    std::vector<Vote> votes;
    for (NodeId i = 0; i < reg.node_count(); i++)
        votes.push_back(make_vote(reg, i, PhaseTag::Prepare, 0, g));
    return make_qc(reg, votes, reg.node_count());
}

void SafetyState::update_high(const QcPtr &qc) {
    if (qc && (!high_qc || qc->view > high_qc->view))
        high_qc = qc;
}

void SafetyState::update_lock(const QcPtr &qc) {
    if (qc && (!locked_qc || qc->view > locked_qc->view))
        locked_qc = qc;
}

bool safety_monotone(const SafetyState &before, const SafetyState &after) {
    if (before.locked_qc && !after.locked_qc) return false;
    if (before.high_qc && !after.high_qc) return false;
    if (after.locked_view() < before.locked_view()) return false;
    if (after.high_view() < before.high_view()) return false;
    if (after.last_voted_view < before.last_voted_view) return false;
    if (after.locked_qc && after.high_qc &&
        after.high_qc->view < after.locked_qc->view)
        return false;
    return true;
}

bool extends(const Block &blk, const Digest &ancestor, const BlockStore &store) {
    const auto &target = store.get(ancestor);
    if (target->height >= blk.height) return false;
    const Block *b = &blk;
    while (b->height > target->height)
        b = store.get(b->parent).get();
    return b->hash == target->hash;
}

bool extends(const Block &blk, const QuorumCertificate &qc,
             const BlockStore &store) {
    return extends(blk, qc.block_hash, store);
}

bool safe_node(const Block &proposal, const QuorumCertificate &justify,
               const SafetyState &safety, const BlockStore &store) {
    if (!safety.locked_qc) return true;
    if (justify.view > safety.locked_qc->view) return true;
    return extends(proposal, *safety.locked_qc, store);
}

} // namespace hsduo
