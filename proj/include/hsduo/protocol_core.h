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

#ifndef _HSDUO_PROTOCOL_CORE_H
#define _HSDUO_PROTOCOL_CORE_H

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hsduo/crypto_sim.h"
#include "hsduo/digest.h"

namespace hsduo {

/* Quorum arithmetic */

/** n >= 3f + 1 */
bool validate_bft_condition(size_t n, size_t f);
/** n - f; throws ConfigError when (n, f) is not a BFT configuration. */
size_t quorum_size(size_t n, size_t f);
NodeId leader_for_view(ViewNumber view, size_t n);

/* Blocks */

struct Block {
    Digest hash{};
    Digest parent{};
    std::uint64_t height = 0;
    ViewNumber view = 0;
    NodeId proposer = 0;
    std::vector<std::uint8_t> payload;

    /** Hash of (parent, height, view, proposer, payload) in canonical form. */
    static Digest compute_hash(const Digest &parent, std::uint64_t height,
                               ViewNumber view, NodeId proposer,
                               std::span<const std::uint8_t> payload);
    static Block make(const Block &parent, ViewNumber view, NodeId proposer,
                      std::vector<std::uint8_t> payload);
    /** Height 0; its parent is its own hash (the hash covers an all-zero parent). */
    static Block genesis();

    bool is_genesis() const { return height == 0; }
};

using BlockPtr = std::shared_ptr<const Block>;

/** Append-only block storage shared by the replicas of one simulation. */
class BlockStore {
    std::unordered_map<Digest, BlockPtr, DigestHash> blocks;
    BlockPtr genesis_;

    public:
    BlockStore();

    const BlockPtr &genesis() const { return genesis_; }
    /** Inserting an existing hash returns the stored block. */
    BlockPtr add(Block blk);
    BlockPtr find(const Digest &hash) const;
    /** Throws UnknownBlock. */
    const BlockPtr &get(const Digest &hash) const;
    size_t size() const { return blocks.size(); }
};

/* Votes and certificates */

enum class PhaseTag: std::uint8_t {
    Prepare = 0,
    PreCommit = 1,
    Commit = 2,
    Decide = 3,
    NewView = 4,
};

std::string_view to_string(PhaseTag p);

/** Digest a vote signs: canonical (phase, view, block_hash). */
Digest vote_digest(PhaseTag phase, ViewNumber view, const Digest &block_hash);

struct Vote {
    PhaseTag phase = PhaseTag::Prepare;
    ViewNumber view = 0;
    Digest block_hash{};
    NodeId voter = 0;
    SigToken sig;

    bool operator==(const Vote &) const = default;
};

Vote make_vote(KeyRegistry &reg, NodeId voter, PhaseTag phase,
               ViewNumber view, const Digest &block_hash);
/** Signature verifies and covers exactly this vote's (phase, view, block). */
bool verify_vote(const KeyRegistry &reg, const Vote &vote);
bool verify_vote(const KeyRegistry &reg, const Vote &vote, const Digest &expected);

struct QuorumCertificate {
    PhaseTag phase = PhaseTag::Prepare;
    ViewNumber view = 0;
    Digest block_hash{};
    std::vector<NodeId> signers;
    AggregateToken agg;
};

using QcPtr = std::shared_ptr<const QuorumCertificate>;

/**
 * Form a QC from votes. Errors: MixedVoteSet (differing phase/view/block),
 * InvalidSignature, DuplicateVote, InsufficientQuorum.
 */
QuorumCertificate make_qc(const KeyRegistry &reg, std::span<const Vote> votes,
                          size_t quorum);
bool verify_qc(const KeyRegistry &reg, const QuorumCertificate &qc,
               size_t quorum);
/** Same as verify_qc but reuses an already computed vote digest. */
bool verify_qc(const KeyRegistry &reg, const QuorumCertificate &qc,
               size_t quorum, const Digest &expected);

/** Prepare QC for the genesis block at view 0, signed by every node. */
QuorumCertificate make_genesis_qc(KeyRegistry &reg, const BlockStore &store);

/* Safety state */

struct SafetyState {
    QcPtr locked_qc;
    QcPtr high_qc;
    ViewNumber last_voted_view = 0;

    ViewNumber locked_view() const { return locked_qc ? locked_qc->view : 0; }
    ViewNumber high_view() const { return high_qc ? high_qc->view : 0; }

    /** Replace high_qc when `qc` has a strictly higher view. */
    void update_high(const QcPtr &qc);
    /** Replace locked_qc when `qc` has a strictly higher view. */
    void update_lock(const QcPtr &qc);
};

/**
 * Monotonicity between two consecutive snapshots of one replica:
 * locked view and last voted view never decrease, and high_qc's view is at
 * least locked_qc's view.
 */
bool safety_monotone(const SafetyState &before, const SafetyState &after);

/**
 * True iff the QC's block is a strict ancestor of `blk` via parent links.
 * Throws UnknownBlock when either side cannot be resolved.
 */
bool extends(const Block &blk, const QuorumCertificate &qc,
             const BlockStore &store);
bool extends(const Block &blk, const Digest &ancestor, const BlockStore &store);

/**
 * The voting predicate shared by both protocols: the proposal extends the
 * locked block, or its justify QC is newer than the lock. Vacuously true
 * without a lock.
 */
bool safe_node(const Block &proposal, const QuorumCertificate &justify,
               const SafetyState &safety, const BlockStore &store);

} // namespace hsduo

#endif
