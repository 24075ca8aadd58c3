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

#ifndef _HSDUO_CRYPTO_SIM_H
#define _HSDUO_CRYPTO_SIM_H

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "hsduo/digest.h"

namespace hsduo {

/**
 * Simulated signature: a signer id, the signed digest and the registry
 * sequence number handed out when it was signed. There is no key material;
 * authenticity is a lookup in the issuing KeyRegistry.
 */
struct SigToken {
    NodeId signer = 0;
    Digest digest{};
    std::uint64_t nonce = 0;

    bool operator==(const SigToken &) const = default;
};

/** An aggregate of signatures on one digest, recording the exact signer set. */
struct AggregateToken {
    Digest digest{};
    std::vector<NodeId> signers;        // sorted ascending
    std::vector<std::uint64_t> nonces;  // parallel to signers

    bool operator==(const AggregateToken &) const = default;
};

/**
 * Hash-table stand-in for public-key signing. One registry per simulation
 * instance; tokens issued by one registry never verify on another.
 *
 * Not thread-safe. A registry may be moved between threads between runs.
 */
class KeyRegistry {
    NodeId nodes;
    std::uint64_t instance;
    std::uint64_t issued = 0;
    // digest -> nonce per signer (0 = never signed)
    std::unordered_map<Digest, std::vector<std::uint64_t>, DigestHash> entries;

    public:
    /** @param n number of nodes; valid signer ids are [0, n). */
    explicit KeyRegistry(NodeId n);

    NodeId node_count() const { return nodes; }
    std::uint64_t issued_count() const { return issued; }

    /** Idempotent per (signer, digest). Throws ConfigError for an unknown signer. */
    SigToken sign(NodeId signer, const Digest &digest);
    bool verify(const SigToken &token) const;
    /** Verify several signers on one digest: one table probe, then one slot per signer. */
    bool verify_each(const Digest &digest, std::span<const NodeId> signers,
                     std::span<const std::uint64_t> nonces) const;
};

/**
 * Aggregate n-f (or more) signatures on the same digest.
 *
 * Checks, in order: mixed digests (MixedVoteSet), non-verifying tokens
 * (InvalidSignature), repeated signers (DuplicateVote), and the signer count
 * against `quorum` (InsufficientQuorum).
 */
AggregateToken aggregate(const KeyRegistry &reg,
                         std::span<const SigToken> tokens, size_t quorum);

/** O(quorum) lookups; fails on unsorted/duplicate signers or any stale nonce. */
bool verify_aggregate(const KeyRegistry &reg, const AggregateToken &agg,
                      size_t quorum);

} // namespace hsduo

#endif
