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
#include <atomic>
#include <string>

#include "hsduo/crypto_sim.h"
#include "hsduo/error.h"

namespace hsduo {

namespace {
std::atomic<std::uint64_t> next_instance{1};
constexpr int instance_shift = 40;
}

KeyRegistry::KeyRegistry(NodeId n):
    nodes(n), instance(next_instance.fetch_add(1)) {
    if (n == 0)
        throw ConfigError("key registry needs at least one node");
}

SigToken KeyRegistry::sign(NodeId signer, const Digest &digest) {
    if (signer >= nodes)
        throw ConfigError("unknown signer id " + std::to_string(signer));
    auto &slots = entries[digest];
    if (slots.empty())
        slots.assign(nodes, 0);
    auto &nonce = slots[signer];
    if (nonce == 0)
        nonce = (instance << instance_shift) | ++issued;
    return SigToken{signer, digest, nonce};
}

bool KeyRegistry::verify(const SigToken &token) const {
    if (token.signer >= nodes || token.nonce == 0) return false;
    auto it = entries.find(token.digest);
    if (it == entries.end()) return false;
    return it->second[token.signer] == token.nonce;
}

bool KeyRegistry::verify_each(const Digest &digest,
                              std::span<const NodeId> signers,
                              std::span<const std::uint64_t> nonces) const {
    if (signers.size() != nonces.size()) return false;
    auto it = entries.find(digest);
    if (it == entries.end()) return signers.empty();
    const auto &slots = it->second;
    for (size_t i = 0; i < signers.size(); i++)
        if (signers[i] >= nodes || nonces[i] == 0 ||
            slots[signers[i]] != nonces[i])
            return false;
    return true;
}

AggregateToken aggregate(const KeyRegistry &reg,
                         std::span<const SigToken> tokens, size_t quorum) {
    if (!tokens.empty())
    {
        const auto &d = tokens.front().digest;
        for (const auto &t: tokens)
            if (t.digest != d)
                throw MixedVoteSet("signatures cover different statements");
    }
    for (const auto &t: tokens)
        if (!reg.verify(t))
            throw InvalidSignature("signature by node " +
                                   std::to_string(t.signer) +
                                   " does not verify");
    std::vector<const SigToken *> sorted;
    sorted.reserve(tokens.size());
    for (const auto &t: tokens) sorted.push_back(&t);
    std::sort(sorted.begin(), sorted.end(),
              [](auto a, auto b) { return a->signer < b->signer; });
    for (size_t i = 1; i < sorted.size(); i++)
        if (sorted[i]->signer == sorted[i - 1]->signer)
            throw DuplicateVote("node " + std::to_string(sorted[i]->signer) +
                                " signed twice");
    if (sorted.size() < quorum)
        throw InsufficientQuorum(std::to_string(sorted.size()) + " of " +
                                 std::to_string(quorum) + " signatures");

    AggregateToken agg;
    agg.digest = tokens.front().digest;
    agg.signers.reserve(sorted.size());
    agg.nonces.reserve(sorted.size());
    for (auto t: sorted)
    {
        agg.signers.push_back(t->signer);
        agg.nonces.push_back(t->nonce);
    }
    return agg;
}

bool verify_aggregate(const KeyRegistry &reg, const AggregateToken &agg,
                      size_t quorum) {
    if (agg.signers.size() != agg.nonces.size()) return false;
    if (agg.signers.size() < quorum) return false;
    for (size_t i = 1; i < agg.signers.size(); i++)
        if (agg.signers[i] <= agg.signers[i - 1]) return false;
    return reg.verify_each(agg.digest, agg.signers, agg.nonces);
}

} // namespace hsduo
